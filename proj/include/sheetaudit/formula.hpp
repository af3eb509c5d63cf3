#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sheetaudit/address.hpp"
#include "sheetaudit/date.hpp"

namespace sheetaudit {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct NumberLit {
    double value = 0.0;
};

struct TextLit {
    std::string value;
};

struct DateLit {
    Date value;
};

struct CellRef {
    CellAddress addr;
};

struct RangeRef {
    CellAddress first;
    CellAddress last;
};

/// A reference that left the grid under rebasing ("#REF!").
struct BrokenRef {};

struct Call {
    std::string name;  // upper-cased
    std::vector<ExprPtr> args;
};

enum class UnaryOp { Neg };

enum class BinaryOp { Add, Sub, Mul, Div, Pow };

struct Unary {
    UnaryOp op = UnaryOp::Neg;
    ExprPtr operand;
};

struct Binary {
    BinaryOp op = BinaryOp::Add;
    ExprPtr lhs;
    ExprPtr rhs;
};

using ExprNode =
    std::variant<NumberLit, TextLit, DateLit, CellRef, RangeRef, BrokenRef, Call, Unary, Binary>;

struct Expr {
    ExprNode node;
    bool parenthesized = false;  // written inside "(...)" in the source
};

/// Structural equality; ignores the parenthesized flag.
bool equal(const Expr& a, const Expr& b);
bool equal(const ExprPtr& a, const ExprPtr& b);

ExprPtr make_number(double v);
ExprPtr make_text(std::string v);
ExprPtr make_date(Date d);
ExprPtr make_ref(CellAddress a);
ExprPtr make_range(CellAddress first, CellAddress last);
ExprPtr make_broken();
ExprPtr make_call(std::string name, std::vector<ExprPtr> args);
ExprPtr make_neg(ExprPtr operand);
ExprPtr make_binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs);

struct SyntaxError {
    std::size_t position = 0;  // offset into the source, "=" included
    std::string message;
};

using ParseResult = std::variant<ExprPtr, SyntaxError>;

inline bool parsed_ok(const ParseResult& r) { return std::holds_alternative<ExprPtr>(r); }

bool is_known_function(std::string_view upper_name);

ParseResult parse_formula(std::string_view src);

/// Canonical text with a leading "=" and minimal parentheses.
std::string serialize(const Expr& ast);
std::string serialize(const ExprPtr& ast);

/// Shortest text that reads back to the same double.
std::string format_number(double v);

/// A cell or range reference as written in a formula.
struct Reference {
    CellAddress first;
    CellAddress last;
    bool is_range = false;

    bool operator==(const Reference&) const = default;
};

/// References in source order; duplicates kept.
std::vector<Reference> extract_refs(const Expr& ast);

/// Copy semantics: relative axes shift by (to - from), absolute axes stay.
/// References pushed off the grid become BrokenRef.
ExprPtr rebase(const ExprPtr& ast, const CellAddress& from, const CellAddress& to);

/// Rebuilds the tree bottom-up; `fn` sees each node after its children have
/// been rewritten and returns a replacement or nullptr to keep it.
ExprPtr transform(const ExprPtr& ast, const std::function<ExprPtr(const ExprPtr&)>& fn);

/// Rebuilds one level: `fn` maps each direct child. Leaves are returned as is.
ExprPtr map_children(const ExprPtr& ast, const std::function<ExprPtr(const ExprPtr&)>& fn);

/// Replaces the node object `target` (by identity) with `with`.
ExprPtr replace_node(const ExprPtr& ast, const Expr* target, const ExprPtr& with);

/// Pre-order walk.
void visit(const Expr& ast, const std::function<void(const Expr&)>& fn);

}  // namespace sheetaudit
