#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sheetaudit {

class LookupError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class TaxonomyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TaxonomyNode {
    std::string id;
    std::string label;
    std::optional<std::string> parent;
    std::vector<std::string> children;
    std::string description;

    /// Label lower-cased with spaces as hyphens, e.g. "real-world-knowledge".
    std::string slug() const;
};

namespace leaf {
inline constexpr std::string_view kSystem = "system";
inline constexpr std::string_view kDeveloperOmission = "user.quant.accidental.developer.omission";
inline constexpr std::string_view kDeveloperAlteration = "user.quant.accidental.developer.alteration";
inline constexpr std::string_view kDeveloperDuplication = "user.quant.accidental.developer.duplication";
inline constexpr std::string_view kInputterOmission = "user.quant.accidental.end-user.data-inputter.omission";
inline constexpr std::string_view kInputterAlteration = "user.quant.accidental.end-user.data-inputter.alteration";
inline constexpr std::string_view kInputterDuplication = "user.quant.accidental.end-user.data-inputter.duplication";
inline constexpr std::string_view kInterpreterOmission = "user.quant.accidental.end-user.interpreter.omission";
inline constexpr std::string_view kInterpreterAlteration = "user.quant.accidental.end-user.interpreter.alteration";
inline constexpr std::string_view kInterpreterDuplication = "user.quant.accidental.end-user.interpreter.duplication";
inline constexpr std::string_view kRealWorld = "user.quant.reasoning.domain.real-world";
inline constexpr std::string_view kMathRepresentation = "user.quant.reasoning.domain.math-representation";
inline constexpr std::string_view kSyntax = "user.quant.reasoning.implementation.syntax";
inline constexpr std::string_view kLogic = "user.quant.reasoning.implementation.logic";
inline constexpr std::string_view kStructural = "user.qual.semantic.structural";
inline constexpr std::string_view kTemporal = "user.qual.semantic.temporal";
inline constexpr std::string_view kMaintainability = "user.qual.maintainability";
}  // namespace leaf

/// Immutable classification tree. insert_category returns a new tree.
class TaxonomyTree {
public:
    static const TaxonomyTree& default_tree();
    static TaxonomyTree load_default();

    const std::string& root_id() const { return root_; }
    const TaxonomyNode& node(std::string_view id) const;  // throws LookupError
    bool contains(std::string_view id) const;
    bool is_leaf(std::string_view id) const;

    /// Pre-order (parents before children, children in insertion order).
    std::vector<std::string> ids() const;
    std::vector<std::string> leaves() const;
    std::size_t leaf_count() const;

    /// Node ids root -> id. Throws LookupError.
    std::vector<std::string> classify_path(std::string_view id) const;
    std::vector<std::string> path_labels(std::string_view id) const;
    std::vector<std::string> path_slugs(std::string_view id) const;

    /// Accepts a full id or a unique dotted suffix ("implementation.syntax",
    /// "maintainability"). Throws LookupError when unknown or ambiguous.
    std::string resolve(std::string_view id_or_suffix) const;

    struct Inserted;
    Inserted insert_category(std::string_view parent_id, std::string_view label,
                             std::string_view description) const;

    std::string to_text() const;
    std::string to_json() const;

private:
    void add(std::string id, std::string label, std::optional<std::string> parent,
             std::string description);

    std::string root_;
    std::map<std::string, TaxonomyNode, std::less<>> nodes_;
};

struct TaxonomyTree::Inserted {
    TaxonomyTree tree;
    std::string id;
};

}  // namespace sheetaudit
