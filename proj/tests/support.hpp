#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "sheetaudit/dependency_graph.hpp"
#include "sheetaudit/detectors.hpp"
#include "sheetaudit/evaluator.hpp"
#include "sheetaudit/formula.hpp"
#include "sheetaudit/workbook.hpp"

namespace testing {

using namespace sheetaudit;

inline const Date kPinnedDate{2026, 10, 15};

inline std::string corpus_path(const std::string& name) { return std::string(SHEETAUDIT_CORPUS_DIR) + "/" + name; }

inline Workbook fixture(const std::string& name) { return load_workbook_file(corpus_path(name)); }

inline std::vector<std::string> corpus_files() {
    return {"blank_source.grid",     "century_dates.grid",       "clean_payroll.json",
            "empty.grid",            "fig2_percentage.grid",     "fig3_wages.grid",
            "fig4a_overdraft_circular.grid", "fig4b_overdraft_fixed.grid", "fig5_exchange_rate.json",
            "fig6_corrected.grid",   "fig6_hardcoded.grid",      "formatting_rounding.json",
            "growth_constant.grid",  "leap_year.grid",           "multi_sheet.json",
            "range_fringe.grid",     "sum_wrapper.grid",         "syntax_errors.grid"};
}

inline DetectorConfig pinned_config() {
    DetectorConfig c;
    c.analysis_date = kPinnedDate;
    return c;
}

inline Workbook grid(const std::string& text) { return load_workbook(text, WorkbookFormat::Grid); }

inline CellAddress at(const std::string& a1, const std::string& sheet = "Sheet1") {
    CellAddress a = parse_a1(a1);
    return {a.sheet.empty() ? sheet : a.sheet, a.col, a.row};
}

inline std::vector<Diagnostic> only(const std::vector<Diagnostic>& ds, std::string_view detector) {
    std::vector<Diagnostic> out;
    for (const auto& d : ds)
        if (d.detector == detector)
            out.push_back(d);
    return out;
}

// ---------------------------------------------------------------------------
// Cycle oracle: enumerate every simple cycle by DFS, each rooted at its
// smallest vertex, then merge cycles that share a vertex.

struct SimpleCycles {
    std::vector<std::vector<int>> cycles;
};

inline SimpleCycles enumerate_simple_cycles(int n, const std::vector<std::vector<int>>& adj) {
    SimpleCycles out;
    std::vector<int> path;
    std::vector<bool> on_path(static_cast<std::size_t>(n), false);
    std::function<void(int, int)> dfs = [&](int start, int v) {
        for (int w : adj[static_cast<std::size_t>(v)]) {
            if (w == start) {
                out.cycles.push_back(path);
            } else if (w > start && !on_path[static_cast<std::size_t>(w)]) {
                on_path[static_cast<std::size_t>(w)] = true;
                path.push_back(w);
                dfs(start, w);
                path.pop_back();
                on_path[static_cast<std::size_t>(w)] = false;
            }
        }
    };
    for (int s = 0; s < n; ++s) {
        path = {s};
        on_path[static_cast<std::size_t>(s)] = true;
        dfs(s, s);
        on_path[static_cast<std::size_t>(s)] = false;
    }
    return out;
}

/// Groups of vertices joined by shared simple cycles, each sorted, plus the
/// vertex order of the groups that consist of exactly one simple cycle.
struct CycleGroups {
    std::set<std::vector<int>> groups;
    std::map<std::vector<int>, std::vector<int>> single_cycle_order;
};

inline CycleGroups group_cycles(int n, const SimpleCycles& sc) {
    std::vector<int> parent(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        parent[static_cast<std::size_t>(i)] = i;
    std::function<int(int)> find = [&](int x) {
        while (parent[static_cast<std::size_t>(x)] != x)
            x = parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
        return x;
    };
    std::set<int> on_cycle;
    for (const auto& c : sc.cycles) {
        for (int v : c) {
            on_cycle.insert(v);
            parent[static_cast<std::size_t>(find(v))] = find(c.front());
        }
    }
    std::map<int, std::vector<int>> members;
    for (int v : on_cycle)
        members[find(v)].push_back(v);
    std::map<int, int> cycles_per_group;
    std::map<int, std::vector<int>> last_cycle;
    for (const auto& c : sc.cycles) {
        ++cycles_per_group[find(c.front())];
        last_cycle[find(c.front())] = c;
    }
    CycleGroups out;
    for (auto& [root, vs] : members) {
        out.groups.insert(vs);
        if (cycles_per_group[root] == 1)
            out.single_cycle_order[vs] = last_cycle[root];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Evaluation oracle: computes a cell by recursing into its references.

class NaiveInterpreter {
public:
    explicit NaiveInterpreter(const Workbook& wb) : wb_(wb) {}

    CellValue cell(const CellAddress& a) {
        CellAddress key = a.location();
        if (auto it = memo_.find(key); it != memo_.end())
            return it->second;
        const Cell* c = wb_.cell(key);
        CellValue v;
        if (!c || c->content.empty()) {
            v = CellValue::blank();
        } else if (c->content.kind() == CellKind::Number) {
            v = CellValue::number(c->content.as_number());
        } else if (c->content.kind() == CellKind::Text) {
            v = CellValue::text(c->content.as_text());
        } else if (c->content.kind() == CellKind::Date) {
            v = CellValue::date(c->content.as_date().date);
        } else if (!c->content.ast()) {
            v = CellValue::error(ErrorKind::Type);
        } else {
            host_.push_back(key.sheet);
            v = expr(*c->content.ast());
            host_.pop_back();
            if (v.kind() == ValueKind::Blank)
                v = CellValue::number(0.0);
        }
        memo_[key] = v;
        return v;
    }

private:
    static bool is_err(const CellValue& v) { return v.kind() == ValueKind::Error; }

    static CellValue checked(double r) {
        return std::isfinite(r) ? CellValue::number(r) : CellValue::error(ErrorKind::Type);
    }

    // Scalar coercion: blank is 0, text is a type error.
    static CellValue scalar(const CellValue& v) {
        switch (v.kind()) {
        case ValueKind::Blank: return CellValue::number(0);
        case ValueKind::Text: return CellValue::error(ErrorKind::Type);
        case ValueKind::Date: return CellValue::number(to_serial(v.as_date()));
        default: return v;
        }
    }

    CellAddress absolute(const CellAddress& ref) const {
        return {ref.sheet.empty() ? host_.back() : ref.sheet, ref.col, ref.row};
    }

    CellValue expr(const Expr& e) {
        if (auto* n = std::get_if<NumberLit>(&e.node))
            return CellValue::number(n->value);
        if (auto* t = std::get_if<TextLit>(&e.node))
            return CellValue::text(t->value);
        if (auto* d = std::get_if<DateLit>(&e.node))
            return CellValue::date(d->value);
        if (auto* r = std::get_if<CellRef>(&e.node)) {
            CellAddress a = absolute(r->addr);
            if (!wb_.find_sheet(a.sheet))
                return CellValue::error(ErrorKind::BrokenRef);
            return cell(a);
        }
        if (std::holds_alternative<RangeRef>(e.node))
            return CellValue::error(ErrorKind::Type);
        if (std::holds_alternative<BrokenRef>(e.node))
            return CellValue::error(ErrorKind::BrokenRef);
        if (auto* u = std::get_if<Unary>(&e.node)) {
            CellValue v = scalar(expr(*u->operand));
            return is_err(v) ? v : CellValue::number(-v.as_number());
        }
        if (auto* b = std::get_if<Binary>(&e.node)) {
            CellValue l = scalar(expr(*b->lhs));
            CellValue r = scalar(expr(*b->rhs));
            if (is_err(l))
                return l;
            if (is_err(r))
                return r;
            double x = l.as_number(), y = r.as_number();
            switch (b->op) {
            case BinaryOp::Add: return checked(x + y);
            case BinaryOp::Sub: return checked(x - y);
            case BinaryOp::Mul: return checked(x * y);
            case BinaryOp::Div: return y == 0 ? CellValue::error(ErrorKind::Div0) : checked(x / y);
            case BinaryOp::Pow:
                return x == 0 && y < 0 ? CellValue::error(ErrorKind::Div0) : checked(std::pow(x, y));
            }
        }
        return call(std::get<Call>(e.node));
    }

    CellValue call(const Call& c) {
        if (c.name == "IF") {
            if (c.args.size() < 2 || c.args.size() > 3)
                return CellValue::error(ErrorKind::Type);
            CellValue cond = expr(*c.args[0]);
            if (is_err(cond))
                return cond;
            if (cond.kind() == ValueKind::Text)
                return CellValue::error(ErrorKind::Type);
            double truth = cond.kind() == ValueKind::Blank ? 0.0 : scalar(cond).as_number();
            if (truth != 0)
                return expr(*c.args[1]);
            return c.args.size() == 3 ? expr(*c.args[2]) : CellValue::number(0);
        }
        bool known = c.name == "SUM" || c.name == "AVERAGE" || c.name == "MIN" || c.name == "MAX" || c.name == "COUNT";
        if (!known)
            return CellValue::error(ErrorKind::UnknownFunction);

        // Gather (value, came-from-a-cell) pairs in argument order.
        std::vector<std::pair<CellValue, bool>> items;
        for (const auto& arg : c.args) {
            if (auto* r = std::get_if<RangeRef>(&arg->node)) {
                CellAddress a = absolute(r->first), b = absolute(r->last);
                if (!wb_.find_sheet(a.sheet))
                    return CellValue::error(ErrorKind::BrokenRef);
                for (int row = std::min(a.row, b.row); row <= std::max(a.row, b.row); ++row)
                    for (int col = std::min(a.col, b.col); col <= std::max(a.col, b.col); ++col)
                        items.push_back({cell({a.sheet, col, row}), true});
            } else if (auto* ref = std::get_if<CellRef>(&arg->node)) {
                CellAddress a = absolute(ref->addr);
                if (!wb_.find_sheet(a.sheet))
                    return CellValue::error(ErrorKind::BrokenRef);
                items.push_back({cell(a), true});
            } else {
                items.push_back({expr(*arg), false});
            }
        }
        auto numeric = [](const CellValue& v) { return v.kind() == ValueKind::Number || v.kind() == ValueKind::Date; };
        if (c.name == "COUNT") {
            int n = 0;
            for (const auto& [v, _] : items)
                n += numeric(v) ? 1 : 0;
            return CellValue::number(n);
        }
        std::vector<double> xs;
        for (const auto& [v, from_cell] : items) {
            if (is_err(v))
                return v;
            if (numeric(v))
                xs.push_back(scalar(v).as_number());
            else if (!from_cell && v.kind() == ValueKind::Text)
                return CellValue::error(ErrorKind::Type);
            else if (!from_cell)
                xs.push_back(0);
        }
        if (c.name == "SUM" || c.name == "AVERAGE") {
            double s = 0;
            for (double x : xs)
                s += x;
            if (c.name == "SUM")
                return checked(s);
            return xs.empty() ? CellValue::error(ErrorKind::Div0) : checked(s / static_cast<double>(xs.size()));
        }
        if (xs.empty())
            return CellValue::number(0);
        return CellValue::number(c.name == "MIN" ? *std::min_element(xs.begin(), xs.end())
                                                 : *std::max_element(xs.begin(), xs.end()));
    }

    const Workbook& wb_;
    std::map<CellAddress, CellValue> memo_;
    std::vector<std::string> host_;
};

// ---------------------------------------------------------------------------
// Precedence oracle: shunting-yard over a token list, rendered fully
// parenthesized.

struct Token {
    enum Kind { Operand, Op, Neg, LParen, RParen } kind;
    std::string text;
};

inline int op_prec(const std::string& op) {
    if (op == "+" || op == "-")
        return 1;
    if (op == "*" || op == "/")
        return 2;
    if (op == "^")
        return 3;
    return 4;  // unary minus
}

inline std::string shunting_yard(const std::vector<Token>& tokens) {
    std::vector<std::string> out;
    std::vector<Token> ops;
    auto reduce = [&] {
        Token t = ops.back();
        ops.pop_back();
        if (t.kind == Token::Neg) {
            std::string a = out.back();
            out.back() = "(-" + a + ")";
            return;
        }
        std::string b = out.back();
        out.pop_back();
        std::string a = out.back();
        out.back() = "(" + a + t.text + b + ")";
    };
    for (const auto& t : tokens) {
        switch (t.kind) {
        case Token::Operand: out.push_back(t.text); break;
        case Token::Neg:
        case Token::LParen: ops.push_back(t); break;
        case Token::RParen:
            while (ops.back().kind != Token::LParen)
                reduce();
            ops.pop_back();
            break;
        case Token::Op: {
            int p = op_prec(t.text);
            bool right = t.text == "^";
            while (!ops.empty() && ops.back().kind != Token::LParen) {
                int q = ops.back().kind == Token::Neg ? 4 : op_prec(ops.back().text);
                if (q > p || (q == p && !right))
                    reduce();
                else
                    break;
            }
            ops.push_back(t);
            break;
        }
        }
    }
    while (!ops.empty())
        reduce();
    return out.back();
}

/// The same fully parenthesized rendering of a parsed AST.
inline std::string render_parenthesized(const Expr& e) {
    if (auto* n = std::get_if<NumberLit>(&e.node))
        return format_number(n->value);
    if (auto* r = std::get_if<CellRef>(&e.node))
        return to_a1(r->addr);
    if (auto* u = std::get_if<Unary>(&e.node))
        return "(-" + render_parenthesized(*u->operand) + ")";
    if (auto* b = std::get_if<Binary>(&e.node)) {
        static const char* kOps[] = {"+", "-", "*", "/", "^"};
        return "(" + render_parenthesized(*b->lhs) + kOps[static_cast<int>(b->op)] + render_parenthesized(*b->rhs) +
               ")";
    }
    return "?";
}

}  // namespace testing
