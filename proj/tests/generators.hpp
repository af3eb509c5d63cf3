#pragma once

#include <sstream>

#include "support.hpp"

namespace testing::gen {

using Rng = std::mt19937_64;

inline int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
inline bool chance(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

template <class T>
inline const T& pick(Rng& rng, const std::vector<T>& xs) {
    return xs[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(xs.size()) - 1))];
}

inline CellAddress random_address(Rng& rng, int max_col, int max_row, bool flags) {
    CellAddress a{"", uniform(rng, 1, max_col), uniform(rng, 1, max_row)};
    if (flags) {
        a.col_absolute = chance(rng, 0.3);
        a.row_absolute = chance(rng, 0.3);
    }
    return a;
}

inline double random_literal(Rng& rng) {
    switch (uniform(rng, 0, 3)) {
    case 0: return uniform(rng, 0, 20);
    case 1: return uniform(rng, 0, 100000) / 100.0;
    case 2: return std::ldexp(uniform(rng, 1, 1000), -uniform(rng, 0, 12));
    default: return uniform(rng, 0, 5) * 0.1;
    }
}

// Arbitrary well-formed AST; used for syntax round trips and rebasing.
inline ExprPtr random_ast(Rng& rng, int depth) {
    static const std::vector<std::string> kSheets{"", "", "", "Data", "Tax rates"};
    static const std::vector<std::string> kFns{"SUM", "AVERAGE", "MIN", "MAX", "COUNT", "IF", "FOO"};
    int choice = depth <= 0 ? uniform(rng, 0, 4) : uniform(rng, 0, 8);
    switch (choice) {
    case 0: return make_number(random_literal(rng));
    case 1: {
        CellAddress a = random_address(rng, 60, 200, true);
        a.sheet = pick(rng, kSheets);
        return make_ref(a);
    }
    case 2: {
        CellAddress a = random_address(rng, 60, 200, true);
        CellAddress b = random_address(rng, 60, 200, true);
        a.sheet = b.sheet = pick(rng, kSheets);
        return make_range(a, b);
    }
    case 3: {
        std::string s;
        for (int i = uniform(rng, 0, 4); i > 0; --i)
            s += pick(rng, std::vector<std::string>{"a", "B", " ", "\"", "7"});
        return make_text(s);
    }
    case 4: return make_date({uniform(rng, 1900, 2100), uniform(rng, 1, 12), uniform(rng, 1, 28)});
    case 5: return make_neg(random_ast(rng, depth - 1));
    case 6: {
        std::vector<ExprPtr> args;
        for (int i = uniform(rng, 0, 3); i > 0; --i)
            args.push_back(random_ast(rng, depth - 1));
        return make_call(pick(rng, kFns), std::move(args));
    }
    default:
        return make_binary(static_cast<BinaryOp>(uniform(rng, 0, 4)), random_ast(rng, depth - 1),
                           random_ast(rng, depth - 1));
    }
}

inline bool has_broken(const Expr& ast) {
    bool broken = false;
    visit(ast, [&](const Expr& e) { broken = broken || std::holds_alternative<BrokenRef>(e.node); });
    return broken;
}

// Evaluable formula over cells that precede `host` in row-major order.
inline std::string random_formula_body(Rng& rng, const std::vector<CellAddress>& earlier, int depth) {
    auto ref = [&] { return to_a1(pick(rng, earlier)); };
    auto range = [&] {
        CellAddress a = pick(rng, earlier);
        CellAddress b = pick(rng, earlier);
        // Keep only rectangles whose every cell is earlier: use the row span
        // strictly above the last earlier row, or a span inside one row.
        int last_row = earlier.back().row;
        if (a.row == b.row || (std::max(a.row, b.row) < last_row))
            return to_a1(a) + ":" + to_a1(b);
        return to_a1(a) + ":" + to_a1(a);
    };
    int c = earlier.empty() ? 0 : uniform(rng, 0, depth <= 0 ? 2 : 9);
    switch (c) {
    case 0: return format_number(random_literal(rng));
    case 1:
    case 2: return ref();
    case 3: return "-" + random_formula_body(rng, earlier, depth - 1);
    case 4:
    case 5: {
        static const std::vector<std::string> kOps{"+", "-", "*", "/", "^"};
        std::string op = pick(rng, kOps);
        std::string rhs = op == "^" ? std::to_string(uniform(rng, 0, 3)) : random_formula_body(rng, earlier, depth - 1);
        return "(" + random_formula_body(rng, earlier, depth - 1) + op + rhs + ")";
    }
    case 6:
    case 7: {
        static const std::vector<std::string> kAgg{"SUM", "AVERAGE", "MIN", "MAX", "COUNT"};
        std::string out = pick(rng, kAgg) + "(";
        for (int i = uniform(rng, 1, 3); i > 0; --i) {
            int k = uniform(rng, 0, 4);
            out += k <= 1 ? range() : k == 2 ? ref() : k == 3 ? "\"t\"" : random_formula_body(rng, earlier, depth - 1);
            if (i > 1)
                out += ",";
        }
        return out + ")";
    }
    case 8:
        return "IF(" + random_formula_body(rng, earlier, depth - 1) + "," + random_formula_body(rng, earlier, depth - 1) +
               (chance(rng, 0.7) ? "," + random_formula_body(rng, earlier, depth - 1) : "") + ")";
    default: return chance(rng, 0.5) ? "NOPE(1)" : "#REF!";
    }
}

inline Workbook random_acyclic_workbook(Rng& rng, int max_cells = 100) {
    Workbook wb;
    wb.add_sheet("S");
    int cols = uniform(rng, 1, 10);
    int rows = std::max(1, std::min(10, max_cells / cols));
    std::vector<CellAddress> earlier;
    for (int r = 1; r <= rows; ++r) {
        for (int c = 1; c <= cols; ++c) {
            CellAddress here{"S", c, r};
            int kind = uniform(rng, 0, 99);
            Cell cell;
            if (kind < 35)
                cell.content = CellContent::number(chance(rng, 0.1) ? 0.0 : (chance(rng, 0.2) ? -1 : 1) * random_literal(rng));
            else if (kind < 42)
                cell.content = CellContent::text(pick(rng, std::vector<std::string>{"x", "Total", "n/a"}));
            else if (kind < 47)
                cell.content = CellContent::date({uniform(rng, 1950, 2030), uniform(rng, 1, 12), uniform(rng, 1, 28)},
                                                 "01/01/2000");
            else if (kind < 62)
                cell.content = CellContent{};
            else
                cell.content = CellContent::formula("=" + random_formula_body(rng, earlier, 3));
            if (!cell.content.empty())
                wb.set_cell(here, cell);
            earlier.push_back(here);
        }
    }
    return wb;
}

inline bool same_value(const CellValue& a, const CellValue& b) {
    if (a.kind() != b.kind())
        return false;
    if (a.kind() == ValueKind::Number) {
        double x = a.as_number(), y = b.as_number();
        return x == y || std::fabs(x - y) <= 1e-12 * std::max(std::fabs(x), std::fabs(y));
    }
    return a == b;
}

// Spreadsheet-shaped workbooks for the detector invariants: fill runs with
// occasional slips, totals, stray numbers, stamped inputs and two-digit years.
inline Workbook random_sheetlike_workbook(Rng& rng) {
    Workbook wb;
    wb.add_sheet("S");
    int rows = uniform(rng, 3, 12);
    int inputs = uniform(rng, 1, 3);
    for (int r = 2; r <= rows + 1; ++r)
        for (int c = 1; c <= inputs; ++c) {
            double v = chance(rng, 0.2) ? uniform(rng, 2, 9) : random_literal(rng);
            CellMeta meta;
            if (chance(rng, 0.2))
                meta.display_decimals = uniform(rng, 0, 3);
            if (chance(rng, 0.15))
                meta.last_updated = add_days(testing::kPinnedDate, -uniform(rng, 0, 800));
            if (!chance(rng, 0.08))
                wb.set_cell({"S", c, r}, Cell{CellContent::number(v), meta});
        }
    static const std::vector<std::string> kTemplates{"=A2*{k}", "=A2+B2", "=SUM(A2:B2)", "=A2/{k}", "=AVERAGE(A2:C2)",
                                                     "=SUM(A2*{k})", "=A2-$A$2", "=A2*365", "=B2^2"};
    int runs = uniform(rng, 1, 3);
    for (int i = 0; i < runs; ++i) {
        int col = inputs + 1 + i;
        std::string tpl = pick(rng, kTemplates);
        std::string k = format_number(chance(rng, 0.5) ? 1.04 : uniform(rng, 2, 9));
        auto pos = tpl.find("{k}");
        if (pos != std::string::npos)
            tpl.replace(pos, 3, k);
        auto model = std::get<ExprPtr>(parse_formula(tpl));
        CellMeta meta;
        if (chance(rng, 0.3))
            meta.display_decimals = uniform(rng, 0, 2);
        for (int r = 2; r <= rows + 1; ++r) {
            ExprPtr ast = rebase(model, {"S", col, 2}, {"S", col, r});
            std::string src = serialize(ast);
            if (chance(rng, 0.1))
                src = serialize(model);  // unadjusted copy
            else if (chance(rng, 0.05))
                src = src.substr(0, src.size() - 1);
            wb.set_cell({"S", col, r}, Cell{CellContent::formula(src), meta});
        }
        CellMeta total_meta;
        if (chance(rng, 0.4))
            total_meta.display_decimals = uniform(rng, 0, 2);
        if (chance(rng, 0.8)) {
            CellAddress top{"S", col, 2}, bottom{"S", col, rows + (chance(rng, 0.3) ? 0 : 1)};
            wb.set_cell({"S", col, rows + 2},
                        Cell{CellContent::formula("=SUM(" + to_a1(top) + ":" + to_a1(bottom) + ")"), total_meta});
        }
    }
    if (chance(rng, 0.5))
        wb.set_cell({"S", 1, rows + 2}, Cell{CellContent::number(uniform(rng, 2, 50)), {}});
    if (chance(rng, 0.3))
        wb.set_cell({"S", 1, 1}, Cell{CellContent::from_entry(pick(rng, std::vector<std::string>{"09/02/15", "01/01/30", "3/12/1960"})), {}});
    if (chance(rng, 0.2))
        wb.set_cell({"S", 8, 1}, Cell{CellContent::formula("=H1+1"), {}});
    if (chance(rng, 0.2))
        wb.set_cell({"S", 9, 1}, Cell{CellContent::formula("=J5+Z9"), {}});
    return wb;
}

inline std::vector<Workbook> detector_workbooks(int n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Workbook> out;
    for (int i = 0; i < n; ++i)
        out.push_back(i % 3 == 0 ? random_acyclic_workbook(rng, 40) : random_sheetlike_workbook(rng));
    for (const auto& name : testing::corpus_files())
        out.push_back(testing::fixture(name));
    return out;
}


// Oracle comparisons shared by the property suite and the acceptance run.
struct OracleReport {
    int cases = 0;
    int mismatches = 0;
    std::string first;

    void fail(const std::string& what) {
        if (mismatches++ == 0)
            first = what;
    }
};

struct RandomGraph {
    int n = 0;
    std::vector<std::vector<int>> adj;
    DepGraph graph;

    static CellAddress addr(int v) { return CellAddress{"S", 1, v + 1}; }
};

inline RandomGraph random_graph(Rng& rng, int max_nodes) {
    RandomGraph g;
    g.n = uniform(rng, 1, max_nodes);
    double p = std::uniform_real_distribution<double>(0.02, 0.3)(rng);
    g.adj.resize(static_cast<std::size_t>(g.n));
    for (int v = 0; v < g.n; ++v)
        g.graph.add_node(RandomGraph::addr(v));
    for (int u = 0; u < g.n; ++u)
        for (int v = 0; v < g.n; ++v)
            if (chance(rng, u == v ? p / 4 : p)) {
                g.adj[static_cast<std::size_t>(u)].push_back(v);
                g.graph.add_edge(RandomGraph::addr(u), RandomGraph::addr(v));
            }
    return g;
}

inline OracleReport cycle_oracle(std::uint64_t seed, int graphs) {
    Rng rng(seed);
    OracleReport report;
    for (int i = 0; i < graphs; ++i) {
        RandomGraph g = random_graph(rng, 12);
        auto oracle = group_cycles(g.n, enumerate_simple_cycles(g.n, g.adj));
        auto found = find_cycles(g.graph);
        ++report.cases;
        std::set<std::vector<int>> groups;
        bool ok = true;
        for (const auto& cycle : found) {
            std::vector<int> vs;
            for (const auto& a : cycle)
                vs.push_back(a.row - 1);
            std::vector<int> sorted = vs;
            std::sort(sorted.begin(), sorted.end());
            groups.insert(sorted);
            auto it = oracle.single_cycle_order.find(sorted);
            ok = ok && vs == (it != oracle.single_cycle_order.end() ? it->second : sorted);
        }
        ok = ok && found.size() == groups.size() && groups == oracle.groups;
        if (!ok)
            report.fail("graph " + std::to_string(i) + " with " + std::to_string(g.n) + " nodes");
    }
    return report;
}

inline OracleReport evaluator_oracle(std::uint64_t seed, int workbooks) {
    Rng rng(seed);
    OracleReport report;
    for (int i = 0; i < workbooks; ++i) {
        Workbook wb = random_acyclic_workbook(rng);
        EvalResult values = evaluate(wb);
        NaiveInterpreter oracle(wb);
        ++report.cases;
        for (const auto& sheet : wb.sheets())
            for (const auto& [pos, cell] : sheet.cells()) {
                CellAddress a = sheet.address(pos);
                if (!same_value(values.at(a), oracle.cell(a)))
                    report.fail(to_a1(a) + " " + cell.content.entry_text() + " -> " + display(values.at(a), {}) +
                                " vs " + display(oracle.cell(a), {}));
            }
    }
    return report;
}

inline OracleReport precedence_oracle(std::uint64_t seed, int expressions) {
    Rng rng(seed);
    OracleReport report;
    static const std::vector<std::string> kOps{"+", "-", "*", "/", "^"};
    std::function<void(int, std::vector<Token>&, std::string&)> expr;
    std::function<void(int, std::vector<Token>&, std::string&)> term = [&](int depth, std::vector<Token>& toks,
                                                                           std::string& text) {
        int c = depth <= 0 ? 0 : uniform(rng, 0, 5);
        if (c <= 3) {
            std::string operand = chance(rng, 0.5) ? std::to_string(uniform(rng, 0, 9))
                                                   : column_letters(uniform(rng, 1, 5)) + std::to_string(uniform(rng, 1, 9));
            toks.push_back({Token::Operand, operand});
            text += operand;
        } else if (c == 4) {
            toks.push_back({Token::LParen, "("});
            text += "(";
            expr(depth - 1, toks, text);
            toks.push_back({Token::RParen, ")"});
            text += ")";
        } else {
            toks.push_back({Token::Neg, "-"});
            text += "-";
            term(depth - 1, toks, text);
        }
    };
    expr = [&](int depth, std::vector<Token>& toks, std::string& text) {
        term(depth, toks, text);
        for (int i = uniform(rng, 0, 4); i > 0; --i) {
            std::string op = pick(rng, kOps);
            toks.push_back({Token::Op, op});
            text += op;
            term(depth, toks, text);
        }
    };
    for (int i = 0; i < expressions; ++i) {
        std::vector<Token> toks;
        std::string text;
        expr(3, toks, text);
        ++report.cases;
        auto parsed = parse_formula("=" + text);
        if (!parsed_ok(parsed))
            report.fail(text + " did not parse");
        else if (render_parenthesized(*std::get<ExprPtr>(parsed)) != shunting_yard(toks))
            report.fail(text + ": " + render_parenthesized(*std::get<ExprPtr>(parsed)) + " vs " + shunting_yard(toks));
    }
    return report;
}

}  // namespace testing::gen
