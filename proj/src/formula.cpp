#include "sheetaudit/formula.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>

namespace sheetaudit {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

ExprPtr wrap(ExprNode node, bool parenthesized = false) {
    return std::make_shared<const Expr>(Expr{std::move(node), parenthesized});
}

bool equal_addr(const CellAddress& a, const CellAddress& b) { return a == b; }

}  // namespace

bool equal(const ExprPtr& a, const ExprPtr& b) {
    if (!a || !b)
        return a == b;
    return equal(*a, *b);
}

bool equal(const Expr& a, const Expr& b) {
    if (a.node.index() != b.node.index())
        return false;
    return std::visit(
        overloaded{
            [&](const NumberLit& x) { return x.value == std::get<NumberLit>(b.node).value; },
            [&](const TextLit& x) { return x.value == std::get<TextLit>(b.node).value; },
            [&](const DateLit& x) { return x.value == std::get<DateLit>(b.node).value; },
            [&](const CellRef& x) { return equal_addr(x.addr, std::get<CellRef>(b.node).addr); },
            [&](const RangeRef& x) {
                const auto& y = std::get<RangeRef>(b.node);
                return equal_addr(x.first, y.first) && equal_addr(x.last, y.last);
            },
            [&](const BrokenRef&) { return true; },
            [&](const Call& x) {
                const auto& y = std::get<Call>(b.node);
                if (x.name != y.name || x.args.size() != y.args.size())
                    return false;
                for (std::size_t i = 0; i < x.args.size(); ++i)
                    if (!equal(x.args[i], y.args[i]))
                        return false;
                return true;
            },
            [&](const Unary& x) {
                const auto& y = std::get<Unary>(b.node);
                return x.op == y.op && equal(x.operand, y.operand);
            },
            [&](const Binary& x) {
                const auto& y = std::get<Binary>(b.node);
                return x.op == y.op && equal(x.lhs, y.lhs) && equal(x.rhs, y.rhs);
            },
        },
        a.node);
}

ExprPtr make_number(double v) { return wrap(NumberLit{v}); }
ExprPtr make_text(std::string v) { return wrap(TextLit{std::move(v)}); }
ExprPtr make_date(Date d) { return wrap(DateLit{d}); }
ExprPtr make_ref(CellAddress a) { return wrap(CellRef{std::move(a)}); }
ExprPtr make_range(CellAddress first, CellAddress last) { return wrap(RangeRef{std::move(first), std::move(last)}); }
ExprPtr make_broken() { return wrap(BrokenRef{}); }
ExprPtr make_call(std::string name, std::vector<ExprPtr> args) {
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return wrap(Call{std::move(name), std::move(args)});
}
ExprPtr make_neg(ExprPtr operand) { return wrap(Unary{UnaryOp::Neg, std::move(operand)}); }
ExprPtr make_binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs) {
    return wrap(Binary{op, std::move(lhs), std::move(rhs)});
}

bool is_known_function(std::string_view name) {
    static const std::set<std::string, std::less<>> kKnown{"SUM", "AVERAGE", "MIN", "MAX", "COUNT", "IF"};
    return kKnown.count(name) > 0;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

constexpr int kMaxDepth = 200;

struct ParseFailure {
    SyntaxError error;
};

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    ExprPtr run() {
        if (src_.empty() || src_[0] != '=')
            fail(0, "formula must start with '='");
        pos_ = 1;
        ExprPtr e = additive();
        skip_ws();
        if (pos_ < src_.size()) {
            if (src_[pos_] == ')')
                fail(pos_, "unmatched ')'");
            fail(pos_, std::string("unexpected character '") + src_[pos_] + "'");
        }
        return e;
    }

private:
    [[noreturn]] void fail(std::size_t at, std::string msg) {
        throw ParseFailure{SyntaxError{std::min(at, src_.size()), std::move(msg)}};
    }

    void skip_ws() {
        while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t'))
            ++pos_;
    }

    bool peek(char c) {
        skip_ws();
        return pos_ < src_.size() && src_[pos_] == c;
    }

    ExprPtr additive() {
        ExprPtr lhs = multiplicative();
        while (true) {
            skip_ws();
            if (pos_ >= src_.size() || (src_[pos_] != '+' && src_[pos_] != '-'))
                return lhs;
            BinaryOp op = src_[pos_] == '+' ? BinaryOp::Add : BinaryOp::Sub;
            ++pos_;
            lhs = make_binary(op, lhs, multiplicative());
        }
    }

    ExprPtr multiplicative() {
        ExprPtr lhs = power();
        while (true) {
            skip_ws();
            if (pos_ >= src_.size() || (src_[pos_] != '*' && src_[pos_] != '/'))
                return lhs;
            BinaryOp op = src_[pos_] == '*' ? BinaryOp::Mul : BinaryOp::Div;
            ++pos_;
            lhs = make_binary(op, lhs, power());
        }
    }

    // Right-associative: a^b^c == a^(b^c).
    ExprPtr power() {
        ExprPtr base = unary();
        if (peek('^')) {
            ++pos_;
            DepthGuard guard(*this);
            return make_binary(BinaryOp::Pow, base, power());
        }
        return base;
    }

    ExprPtr unary() {
        if (peek('-')) {
            ++pos_;
            DepthGuard guard(*this);
            return make_neg(unary());
        }
        return primary();
    }

    struct DepthGuard {
        Parser& p;
        explicit DepthGuard(Parser& parser) : p(parser) {
            if (++p.depth_ > kMaxDepth)
                p.fail(p.pos_, "formula nested too deeply");
        }
        ~DepthGuard() { --p.depth_; }
    };

    ExprPtr primary() {
        skip_ws();
        if (pos_ >= src_.size())
            fail(pos_, "unexpected end of formula");
        char c = src_[pos_];
        if (c == '(') {
            std::size_t open = pos_++;
            DepthGuard guard(*this);
            ExprPtr inner = additive();
            if (!peek(')'))
                fail(pos_ < src_.size() ? pos_ : src_.size(),
                     "missing ')' for '(' at offset " + std::to_string(open));
            ++pos_;
            return wrap(inner->node, true);
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
            return number();
        if (c == '"')
            return text();
        if (c == '#')
            return hash_literal();
        if (c == '\'')
            return quoted_sheet_ref();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '$' || c == '_')
            return name_or_ref();
        if (c == ')')
            fail(pos_, "unexpected ')'");
        if (c == '+' || c == '*' || c == '/' || c == '^')
            fail(pos_, std::string("operator '") + c + "' is missing its left operand");
        fail(pos_, std::string("unrecognised character '") + c + "'");
    }

    ExprPtr number() {
        std::size_t start = pos_;
        auto digits = [&] {
            std::size_t n = 0;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                ++pos_;
                ++n;
            }
            return n;
        };
        std::size_t n = digits();
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            n += digits();
        }
        if (n == 0)
            fail(start, "malformed number");
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t save = pos_++;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-'))
                ++pos_;
            if (digits() == 0)
                pos_ = save;
        }
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, value);
        if (ec != std::errc() || ptr != src_.data() + pos_)
            fail(start, "malformed number");
        if (pos_ < src_.size() && (std::isalpha(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '$'))
            fail(start, "malformed number or reference");
        return make_number(value);
    }

    ExprPtr text() {
        std::size_t start = pos_++;
        std::string out;
        while (true) {
            if (pos_ >= src_.size())
                fail(start, "unterminated text literal");
            char c = src_[pos_++];
            if (c == '"') {
                if (pos_ < src_.size() && src_[pos_] == '"') {
                    out += '"';
                    ++pos_;
                    continue;
                }
                break;
            }
            out += c;
        }
        return make_text(std::move(out));
    }

    ExprPtr hash_literal() {
        std::size_t start = pos_;
        std::string_view rest = src_.substr(pos_);
        auto upper_prefix = [&](std::string_view p) {
            if (rest.size() < p.size())
                return false;
            for (std::size_t i = 0; i < p.size(); ++i)
                if (std::toupper(static_cast<unsigned char>(rest[i])) != p[i])
                    return false;
            return true;
        };
        if (upper_prefix("#REF!")) {
            pos_ += 5;
            return make_broken();
        }
        auto close = rest.find('#', 1);
        if (close != std::string_view::npos) {
            std::string_view body = rest.substr(1, close - 1);
            if (looks_like_date(body) && !has_two_digit_year(body)) {
                try {
                    Date d = parse_date(body);
                    pos_ += close + 1;
                    return make_date(d);
                } catch (const DateError&) {
                    fail(start, "invalid date literal");
                }
            }
        }
        fail(start, "unrecognised '#' literal");
    }

    static bool is_name_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '$';
    }

    std::string_view name_run() {
        std::size_t start = pos_;
        while (pos_ < src_.size() && is_name_char(src_[pos_]))
            ++pos_;
        return src_.substr(start, pos_ - start);
    }

    ExprPtr quoted_sheet_ref() {
        std::size_t start = pos_++;
        auto close = src_.find('\'', pos_);
        if (close == std::string_view::npos)
            fail(start, "unterminated sheet name");
        std::string sheet(src_.substr(pos_, close - pos_));
        pos_ = close + 1;
        if (sheet.empty() || pos_ >= src_.size() || src_[pos_] != '!')
            fail(start, "expected '!' after sheet name");
        ++pos_;
        return reference(sheet, pos_);
    }

    ExprPtr name_or_ref() {
        std::size_t start = pos_;
        std::string_view run = name_run();
        if (pos_ < src_.size() && src_[pos_] == '!') {
            if (run.find('$') != std::string_view::npos)
                fail(start, "bad sheet name");
            ++pos_;
            return reference(std::string(run), start);
        }
        std::size_t after = pos_;
        if (peek('(')) {
            bool plain = std::isalpha(static_cast<unsigned char>(run[0])) &&
                         run.find('$') == std::string_view::npos;
            if (!plain)
                fail(start, "bad function name");
            ++pos_;
            return call(std::string(run));
        }
        pos_ = after;
        CellAddress first = cell_address(run, start, "");
        return maybe_range(std::move(first));
    }

    ExprPtr reference(const std::string& sheet, std::size_t start) {
        std::size_t ref_start = pos_;
        std::string_view run = name_run();
        if (run.empty())
            fail(ref_start, "missing cell reference after sheet name");
        (void)start;
        CellAddress first = cell_address(run, ref_start, sheet);
        return maybe_range(std::move(first));
    }

    CellAddress cell_address(std::string_view run, std::size_t at, const std::string& sheet) {
        try {
            CellAddress a = parse_a1(run);
            a.sheet = sheet;
            return a;
        } catch (const AddressError&) {
            bool looks_like_ref = !run.empty() && (run[0] == '$' || std::isdigit(static_cast<unsigned char>(run.back())));
            fail(at, looks_like_ref ? "bad reference '" + std::string(run) + "'"
                                    : "unrecognised name '" + std::string(run) + "'");
        }
    }

    ExprPtr maybe_range(CellAddress first) {
        std::size_t save = pos_;
        if (peek(':')) {
            ++pos_;
            skip_ws();
            std::size_t at = pos_;
            std::string_view run = name_run();
            if (run.empty())
                fail(at, "missing end of range");
            CellAddress last = cell_address(run, at, first.sheet);
            return make_range(std::move(first), std::move(last));
        }
        pos_ = save;
        return make_ref(std::move(first));
    }

    ExprPtr call(std::string name) {
        std::vector<ExprPtr> args;
        DepthGuard guard(*this);
        if (peek(')')) {
            ++pos_;
            return make_call(std::move(name), std::move(args));
        }
        while (true) {
            if (peek(',') || peek(')'))
                fail(pos_, "empty function argument");
            args.push_back(additive());
            if (peek(',')) {
                ++pos_;
                continue;
            }
            if (peek(')')) {
                ++pos_;
                return make_call(std::move(name), std::move(args));
            }
            skip_ws();
            if (pos_ >= src_.size())
                fail(pos_, "missing ')' to close " + name + "(");
            fail(pos_, std::string("unexpected character '") + src_[pos_] + "' in argument list");
        }
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int depth_ = 0;
};

}  // namespace

ParseResult parse_formula(std::string_view src) {
    try {
        return Parser(src).run();
    } catch (ParseFailure& f) {
        return std::move(f.error);
    }
}

// ---------------------------------------------------------------------------
// Serializer

std::string format_number(double v) {
    if (v == 0.0)
        return "0";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

namespace {

int precedence(const Expr& e) {
    if (const auto* b = std::get_if<Binary>(&e.node)) {
        switch (b->op) {
        case BinaryOp::Add:
        case BinaryOp::Sub:
            return 1;
        case BinaryOp::Mul:
        case BinaryOp::Div:
            return 2;
        case BinaryOp::Pow:
            return 3;
        }
    }
    if (std::holds_alternative<Unary>(e.node))
        return 4;
    if (const auto* n = std::get_if<NumberLit>(&e.node); n && n->value < 0)
        return 4;
    return 5;
}

char op_char(BinaryOp op) {
    switch (op) {
    case BinaryOp::Add: return '+';
    case BinaryOp::Sub: return '-';
    case BinaryOp::Mul: return '*';
    case BinaryOp::Div: return '/';
    case BinaryOp::Pow: return '^';
    }
    return '?';
}

void write(const Expr& e, std::string& out);

void write_child(const Expr& e, bool parens, std::string& out) {
    if (parens)
        out += '(';
    write(e, out);
    if (parens)
        out += ')';
}

void write(const Expr& e, std::string& out) {
    std::visit(overloaded{
                   [&](const NumberLit& x) { out += format_number(x.value); },
                   [&](const TextLit& x) {
                       out += '"';
                       for (char c : x.value) {
                           if (c == '"')
                               out += '"';
                           out += c;
                       }
                       out += '"';
                   },
                   [&](const DateLit& x) { out += "#" + to_dmy(x.value) + "#"; },
                   [&](const CellRef& x) { out += to_a1_qualified(x.addr); },
                   [&](const RangeRef& x) { out += to_a1_qualified(x.first) + ":" + to_a1(x.last); },
                   [&](const BrokenRef&) { out += "#REF!"; },
                   [&](const Call& x) {
                       out += x.name;
                       out += '(';
                       for (std::size_t i = 0; i < x.args.size(); ++i) {
                           if (i)
                               out += ',';
                           write(*x.args[i], out);
                       }
                       out += ')';
                   },
                   [&](const Unary& x) {
                       out += '-';
                       write_child(*x.operand, precedence(*x.operand) < 4, out);
                   },
                   [&](const Binary& x) {
                       int p = precedence(e);
                       int lp = precedence(*x.lhs);
                       int rp = precedence(*x.rhs);
                       bool right_assoc = x.op == BinaryOp::Pow;
                       write_child(*x.lhs, lp < p || (right_assoc && lp == p), out);
                       out += op_char(x.op);
                       write_child(*x.rhs, rp < p || (!right_assoc && rp == p), out);
                   },
               },
               e.node);
}

}  // namespace

std::string serialize(const Expr& ast) {
    std::string out = "=";
    write(ast, out);
    return out;
}

std::string serialize(const ExprPtr& ast) { return serialize(*ast); }

// ---------------------------------------------------------------------------
// Traversal

void visit(const Expr& ast, const std::function<void(const Expr&)>& fn) {
    fn(ast);
    std::visit(overloaded{
                   [&](const Call& x) {
                       for (const auto& a : x.args)
                           visit(*a, fn);
                   },
                   [&](const Unary& x) { visit(*x.operand, fn); },
                   [&](const Binary& x) {
                       visit(*x.lhs, fn);
                       visit(*x.rhs, fn);
                   },
                   [](const auto&) {},
               },
               ast.node);
}

ExprPtr transform(const ExprPtr& ast, const std::function<ExprPtr(const ExprPtr&)>& fn) {
    ExprPtr rebuilt = std::visit(
        overloaded{
            [&](const Call& x) -> ExprPtr {
                std::vector<ExprPtr> args;
                bool changed = false;
                for (const auto& a : x.args) {
                    args.push_back(transform(a, fn));
                    changed |= args.back() != a;
                }
                return changed ? wrap(Call{x.name, std::move(args)}, ast->parenthesized) : ast;
            },
            [&](const Unary& x) -> ExprPtr {
                ExprPtr o = transform(x.operand, fn);
                return o != x.operand ? wrap(Unary{x.op, o}, ast->parenthesized) : ast;
            },
            [&](const Binary& x) -> ExprPtr {
                ExprPtr l = transform(x.lhs, fn);
                ExprPtr r = transform(x.rhs, fn);
                return (l != x.lhs || r != x.rhs) ? wrap(Binary{x.op, l, r}, ast->parenthesized) : ast;
            },
            [&](const auto&) -> ExprPtr { return ast; },
        },
        ast->node);
    ExprPtr replaced = fn(rebuilt);
    return replaced ? replaced : rebuilt;
}

ExprPtr map_children(const ExprPtr& ast, const std::function<ExprPtr(const ExprPtr&)>& fn) {
    return std::visit(
        overloaded{
            [&](const Call& x) -> ExprPtr {
                std::vector<ExprPtr> args;
                for (const auto& a : x.args)
                    args.push_back(fn(a));
                return wrap(Call{x.name, std::move(args)}, ast->parenthesized);
            },
            [&](const Unary& x) -> ExprPtr { return wrap(Unary{x.op, fn(x.operand)}, ast->parenthesized); },
            [&](const Binary& x) -> ExprPtr {
                return wrap(Binary{x.op, fn(x.lhs), fn(x.rhs)}, ast->parenthesized);
            },
            [&](const auto&) -> ExprPtr { return ast; },
        },
        ast->node);
}

ExprPtr replace_node(const ExprPtr& ast, const Expr* target, const ExprPtr& with) {
    if (ast.get() == target)
        return with;
    return map_children(ast, [&](const ExprPtr& child) { return replace_node(child, target, with); });
}

std::vector<Reference> extract_refs(const Expr& ast) {
    std::vector<Reference> out;
    visit(ast, [&](const Expr& e) {
        if (const auto* r = std::get_if<CellRef>(&e.node))
            out.push_back({r->addr, r->addr, false});
        else if (const auto* g = std::get_if<RangeRef>(&e.node))
            out.push_back({g->first, g->last, true});
    });
    return out;
}

ExprPtr rebase(const ExprPtr& ast, const CellAddress& from, const CellAddress& to) {
    int dc = to.col - from.col;
    int dr = to.row - from.row;
    auto shift = [&](CellAddress a, bool& ok) {
        if (!a.col_absolute)
            a.col += dc;
        if (!a.row_absolute)
            a.row += dr;
        ok = ok && is_valid_position(a.col, a.row);
        return a;
    };
    return transform(ast, [&](const ExprPtr& e) -> ExprPtr {
        if (const auto* r = std::get_if<CellRef>(&e->node)) {
            bool ok = true;
            CellAddress a = shift(r->addr, ok);
            return ok ? wrap(CellRef{a}, e->parenthesized) : make_broken();
        }
        if (const auto* g = std::get_if<RangeRef>(&e->node)) {
            bool ok = true;
            CellAddress a = shift(g->first, ok);
            CellAddress b = shift(g->last, ok);
            return ok ? wrap(RangeRef{a, b}, e->parenthesized) : make_broken();
        }
        return nullptr;
    });
}

}  // namespace sheetaudit
