#include "sheetaudit/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>
#include <tuple>

#include <json.hpp>

namespace sheetaudit {

std::string_view severity_name(Severity s) {
    switch (s) {
    case Severity::Info: return "info";
    case Severity::Warning: return "warning";
    case Severity::Error: return "error";
    }
    return "info";
}

std::optional<Severity> parse_severity(std::string_view s) {
    if (s == "info")
        return Severity::Info;
    if (s == "warning")
        return Severity::Warning;
    if (s == "error")
        return Severity::Error;
    return std::nullopt;
}

const std::vector<std::string>& all_detector_ids() {
    static const std::vector<std::string> kIds{
        std::string(detector::kSyntax),     std::string(detector::kCirc),       std::string(detector::kHard),
        std::string(detector::kDupConst),   std::string(detector::kRangeFringe), std::string(detector::kBlankRef),
        std::string(detector::kInconsist),  std::string(detector::kSumWrap),    std::string(detector::kFormat),
        std::string(detector::kCentury),    std::string(detector::kStale),      std::string(detector::kAvgParts),
    };
    return kIds;
}

bool is_detector_id(std::string_view id) {
    const auto& ids = all_detector_ids();
    return std::find(ids.begin(), ids.end(), id) != ids.end();
}

bool DetectorConfig::is_enabled(std::string_view id) const { return enabled.empty() || enabled.count(id) > 0; }

std::string cell_label(const Workbook& wb, const CellAddress& a) {
    return wb.sheets().size() > 1 ? to_a1_qualified(a.location()) : to_a1(a.location());
}

namespace {

struct FormulaSite {
    CellAddress addr;
    const Cell* cell;
    ExprPtr ast;
};

std::vector<FormulaSite> parsed_formulas(const Workbook& wb) {
    std::vector<FormulaSite> out;
    for (const auto& sheet : wb.sheets())
        for (const auto& [pos, cell] : sheet.cells())
            if (ExprPtr ast = cell.content.ast())
                out.push_back({sheet.address(pos), &cell, ast});
    return out;
}

Diagnostic make_diag(const AnalysisContext& ctx, std::string_view det, std::string_view leaf_id, Severity sev,
                     std::vector<CellAddress> cells, std::string message,
                     std::optional<std::string> fix = std::nullopt) {
    Diagnostic d;
    d.detector = std::string(det);
    d.taxonomy_leaf = std::string(leaf_id);
    d.taxonomy_path = ctx.taxonomy.path_labels(leaf_id);
    d.severity = sev;
    for (auto& c : cells)
        d.cells.push_back(c.location());
    d.message = std::move(message);
    d.fix = std::move(fix);
    return d;
}

bool is_blank(const Workbook& wb, const CellAddress& a) {
    const Cell* c = wb.cell(a);
    return !c || c->content.empty();
}

std::string join_labels(const Workbook& wb, const std::vector<CellAddress>& cells) {
    std::string out;
    for (const auto& c : cells) {
        if (!out.empty())
            out += ", ";
        out += cell_label(wb, c);
    }
    return out;
}

std::string range_text(const CellAddress& a, const CellAddress& b) { return to_a1(a.location()) + ":" + to_a1(b.location()); }

// Numeric literals with a directly applied unary minus folded in.
void collect_literals(const Expr& e, std::vector<double>& out) {
    if (const auto* u = std::get_if<Unary>(&e.node)) {
        if (const auto* n = std::get_if<NumberLit>(&u->operand->node)) {
            out.push_back(-n->value);
            return;
        }
        collect_literals(*u->operand, out);
        return;
    }
    if (const auto* n = std::get_if<NumberLit>(&e.node)) {
        out.push_back(n->value);
        return;
    }
    if (const auto* c = std::get_if<Call>(&e.node)) {
        for (const auto& a : c->args)
            collect_literals(*a, out);
    } else if (const auto* b = std::get_if<Binary>(&e.node)) {
        collect_literals(*b->lhs, out);
        collect_literals(*b->rhs, out);
    }
}

std::vector<double> distinct_literals(const Expr& e, const std::set<double>& allowed) {
    std::vector<double> all, out;
    collect_literals(e, all);
    for (double v : all)
        if (!allowed.count(v) && std::find(out.begin(), out.end(), v) == out.end())
            out.push_back(v);
    return out;
}

ExprPtr replace_literal(const ExprPtr& e, double value, const ExprPtr& with) {
    if (const auto* u = std::get_if<Unary>(&e->node)) {
        if (const auto* n = std::get_if<NumberLit>(&u->operand->node))
            return -n->value == value ? with : e;
    }
    if (const auto* n = std::get_if<NumberLit>(&e->node))
        return n->value == value ? with : e;
    return map_children(e, [&](const ExprPtr& c) { return replace_literal(c, value, with); });
}

bool has_broken_ref(const Expr& ast) {
    bool broken = false;
    visit(ast, [&](const Expr& e) { broken = broken || std::holds_alternative<BrokenRef>(e.node); });
    return broken;
}

bool is_aggregate(std::string_view name) {
    return name == "SUM" || name == "AVERAGE" || name == "MIN" || name == "MAX" || name == "COUNT";
}

std::vector<const Expr*> calls_in(const Expr& ast) {
    std::vector<const Expr*> out;
    visit(ast, [&](const Expr& e) {
        if (std::holds_alternative<Call>(e.node))
            out.push_back(&e);
    });
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<Diagnostic> detect_syntax(const AnalysisContext& ctx) {
    std::vector<Diagnostic> out;
    for (const auto& sheet : ctx.workbook.sheets()) {
        for (const auto& [pos, cell] : sheet.cells()) {
            const SyntaxError* err = cell.content.syntax_error();
            if (!err)
                continue;
            out.push_back(make_diag(ctx, detector::kSyntax, leaf::kSyntax, Severity::Error, {sheet.address(pos)},
                                    "formula " + cell.content.as_formula().source + " does not parse at offset " +
                                        std::to_string(err->position) + ": " + err->message));
        }
    }
    return out;
}

std::vector<Diagnostic> detect_circular(const AnalysisContext& ctx) {
    std::vector<Diagnostic> out;
    for (const auto& cycle : find_cycles(ctx.graph)) {
        std::string chain;
        for (const auto& c : cycle)
            chain += cell_label(ctx.workbook, c) + " -> ";
        chain += cell_label(ctx.workbook, cycle.front());
        std::string msg = cycle.size() == 1
                              ? "formula uses its own value: " + chain
                              : "circular reference: " + chain;
        msg += "; compute the dependent quantity from an intermediate total that excludes it "
               "(e.g. interest on the balance before interest)";
        out.push_back(make_diag(ctx, detector::kCirc, leaf::kLogic, Severity::Error, cycle, std::move(msg)));
    }
    return out;
}

std::vector<Diagnostic> detect_hard_coded(const AnalysisContext& ctx) {
    std::vector<Diagnostic> out;
    for (const auto& site : parsed_formulas(ctx.workbook)) {
        for (double v : distinct_literals(*site.ast, ctx.config.allowed_constants)) {
            std::string lit = format_number(v);
            if (v == 365.0 || v == 366.0) {
                out.push_back(make_diag(
                    ctx, detector::kHard, leaf::kRealWorld, Severity::Warning, {site.addr},
                    "literal " + lit + " assumes a fixed year length; leap years such as 2000 have 366 days, "
                                       "derive day counts from the dates involved"));
                continue;
            }
            const Sheet* sheet = ctx.workbook.find_sheet(site.addr.sheet);
            std::optional<CellAddress> source;
            long best = 0;
            for (const auto& [pos, cell] : sheet->cells()) {
                if (cell.content.kind() != CellKind::Number || cell.content.as_number() != v)
                    continue;
                long dist = std::labs(pos.row - site.addr.row) + std::labs(pos.col - site.addr.col);
                if (!source || dist < best) {
                    source = sheet->address(pos);
                    best = dist;
                }
            }
            std::string msg = "hard-coded constant " + lit + " in " + site.cell->content.as_formula().source;
            std::optional<std::string> fix;
            if (source) {
                CellAddress ref{"", source->col, source->row};
                fix = serialize(replace_literal(site.ast, v, make_ref(ref)));
                msg += "; " + to_a1(ref) + " holds the same value, reference it instead";
            } else {
                msg += "; move it to a labelled input cell and reference that";
            }
            out.push_back(make_diag(ctx, detector::kHard, leaf::kMaintainability, Severity::Warning, {site.addr},
                                    std::move(msg), std::move(fix)));
        }
    }
    return out;
}

std::vector<Diagnostic> detect_duplicated_constants(const AnalysisContext& ctx) {
    std::map<double, std::vector<CellAddress>> uses;
    std::vector<double> order;
    for (const auto& site : parsed_formulas(ctx.workbook)) {
        for (double v : distinct_literals(*site.ast, ctx.config.allowed_constants)) {
            if (!uses.count(v))
                order.push_back(v);
            uses[v].push_back(site.addr);
        }
    }
    std::vector<Diagnostic> out;
    for (double v : order) {
        const auto& cells = uses[v];
        if (cells.size() < 2)
            continue;
        out.push_back(make_diag(ctx, detector::kDupConst, leaf::kDeveloperDuplication, Severity::Info, cells,
                                "constant " + format_number(v) + " is written into " + std::to_string(cells.size()) +
                                    " formulas (" + join_labels(ctx.workbook, cells) +
                                    "); define it once in an input cell so the copies cannot drift apart"));
    }
    return out;
}

std::vector<Diagnostic> detect_range_fringe(const AnalysisContext& ctx) {
    std::vector<Diagnostic> out;
    for (const auto& site : parsed_formulas(ctx.workbook)) {
        for (const Expr* e : calls_in(*site.ast)) {
            const auto& call = std::get<Call>(e->node);
            if (!is_aggregate(call.name))
                continue;
            for (const auto& arg : call.args) {
                const auto* range = std::get_if<RangeRef>(&arg->node);
                if (!range)
                    continue;
                CellAddress a = resolve(range->first, site.addr.sheet);
                CellAddress b = resolve(range->last, site.addr.sheet);
                if (!ctx.workbook.find_sheet(a.sheet))
                    continue;
                int c0 = std::min(a.col, b.col), c1 = std::max(a.col, b.col);
                int r0 = std::min(a.row, b.row), r1 = std::max(a.row, b.row);
                bool column = c0 == c1;
                if (!column && r0 != r1)
                    continue;

                struct Candidate {
                    CellAddress cell;
                    bool after;
                };
                std::vector<Candidate> candidates;
                if (column) {
                    candidates.push_back({{a.sheet, c0, r0 - 1}, false});
                    candidates.push_back({{a.sheet, c0, r1 + 1}, true});
                } else {
                    candidates.push_back({{a.sheet, c0 - 1, r0}, false});
                    candidates.push_back({{a.sheet, c1 + 1, r0}, true});
                }
                for (const auto& cand : candidates) {
                    if (!is_valid_position(cand.cell.col, cand.cell.row) || cand.cell.same_cell(site.addr))
                        continue;
                    const Cell* c = ctx.workbook.cell(cand.cell);
                    if (!c || c->content.kind() != CellKind::Number)
                        continue;
                    if (!ctx.graph.dependents(cand.cell).empty())
                        continue;

                    // Move whichever written endpoint sits on the extended side.
                    RangeRef extended = *range;
                    auto grow = [&](CellAddress& end) {
                        if (column)
                            end.row = cand.cell.row;
                        else
                            end.col = cand.cell.col;
                    };
                    int first_key = column ? range->first.row : range->first.col;
                    int last_key = column ? range->last.row : range->last.col;
                    bool first_is_max = first_key > last_key;
                    if (cand.after == first_is_max)
                        grow(extended.first);
                    else
                        grow(extended.last);
                    std::string fix = serialize(
                        replace_node(site.ast, arg.get(), make_range(extended.first, extended.last)));

                    out.push_back(make_diag(
                        ctx, detector::kRangeFringe, leaf::kInputterAlteration, Severity::Warning,
                        {site.addr, cand.cell},
                        cell_label(ctx.workbook, cand.cell) + " holds a number just " +
                            (cand.after ? "past" : "before") + " the range " + range_text(a, b) + " aggregated by " +
                            call.name + " and is not included in it",
                        fix));
                }
            }
        }
    }
    return out;
}

std::vector<Diagnostic> detect_blank_refs(const AnalysisContext& ctx) {
    std::vector<Diagnostic> out;
    for (const auto& site : parsed_formulas(ctx.workbook)) {
        std::vector<CellAddress> blanks;
        std::vector<std::string> notes;
        auto add = [&](const CellAddress& c) {
            if (std::find(blanks.begin(), blanks.end(), c) == blanks.end())
                blanks.push_back(c);
        };
        for (const auto& ref : extract_refs(*site.ast)) {
            CellAddress a = resolve(ref.first, site.addr.sheet);
            if (!ctx.workbook.find_sheet(a.sheet))
                continue;
            if (!ref.is_range) {
                if (is_blank(ctx.workbook, a)) {
                    add(a);
                    notes.push_back(cell_label(ctx.workbook, a));
                }
                continue;
            }
            CellAddress b = resolve(ref.last, site.addr.sheet);
            auto cells = expand_range(a, b);
            bool all_blank = std::all_of(cells.begin(), cells.end(),
                                         [&](const CellAddress& c) { return is_blank(ctx.workbook, c); });
            if (all_blank) {
                add(cells.front());
                add(cells.back());
                notes.push_back("range " + range_text(a, b) + " (entirely empty)");
            }
        }
        if (blanks.empty())
            continue;
        std::string msg = "formula reads empty input: ";
        for (std::size_t i = 0; i < notes.size(); ++i)
            msg += (i ? ", " : "") + notes[i];
        std::vector<CellAddress> cells{site.addr};
        cells.insert(cells.end(), blanks.begin(), blanks.end());
        out.push_back(make_diag(ctx, detector::kBlankRef, leaf::kDeveloperOmission, Severity::Warning,
                                std::move(cells), std::move(msg)));
    }
    return out;
}

std::vector<Diagnostic> detect_inconsistent(const AnalysisContext& ctx) {
    std::vector<Diagnostic> out;
    std::set<CellAddress> flagged;
    for (const auto& sheet : ctx.workbook.sheets()) {
        std::map<GridPos, ExprPtr> formulas;
        for (const auto& [pos, cell] : sheet.cells())
            if (ExprPtr ast = cell.content.ast())
                formulas[pos] = ast;

        auto check_run = [&](const std::vector<GridPos>& run, bool column) {
            const std::size_t n = run.size();
            if (n < static_cast<std::size_t>(kMinFillRun))
                return;
            CellAddress origin = shape_origin(sheet.name());
            std::vector<std::string> shapes;
            std::map<std::string, std::size_t> counts;
            for (const auto& p : run) {
                shapes.push_back(serialize(rebase(formulas.at(p), sheet.address(p), origin)));
                ++counts[shapes.back()];
            }
            auto best = std::max_element(counts.begin(), counts.end(),
                                         [](const auto& x, const auto& y) { return x.second < y.second; });
            std::size_t majority = best->second;
            if (majority == n || majority * kMajorityDenominator < n * kMajorityNumerator)
                return;
            std::string extent = range_text(sheet.address(run.front()), sheet.address(run.back()));
            for (std::size_t i = 1; i + 1 < n; ++i) {
                if (shapes[i] == best->first)
                    continue;
                CellAddress victim = sheet.address(run[i]);
                if (!flagged.insert(victim).second)
                    continue;
                std::optional<std::string> fix;
                for (std::size_t j = 0; j < n && !fix; ++j) {
                    if (shapes[j] != best->first)
                        continue;
                    ExprPtr moved = rebase(formulas.at(run[j]), sheet.address(run[j]), victim);
                    if (!has_broken_ref(*moved))
                        fix = serialize(moved);
                }
                std::string msg = "formula breaks the pattern shared by " + std::to_string(majority) + " of " +
                                  std::to_string(n) + " cells in " + (column ? "column" : "row") + " run " + extent;
                if (fix)
                    msg += "; the pattern here would be " + *fix;
                out.push_back(make_diag(ctx, detector::kInconsist, leaf::kLogic, Severity::Warning, {victim},
                                        std::move(msg), std::move(fix)));
            }
        };

        // Column runs.
        std::map<int, std::vector<int>> by_col;
        std::map<int, std::vector<int>> by_row;
        for (const auto& [pos, _] : formulas) {
            by_col[pos.col].push_back(pos.row);
            by_row[pos.row].push_back(pos.col);
        }
        for (auto& [col, rows] : by_col) {
            std::sort(rows.begin(), rows.end());
            std::vector<GridPos> run;
            for (int r : rows) {
                if (!run.empty() && run.back().row + 1 != r) {
                    check_run(run, true);
                    run.clear();
                }
                run.push_back({r, col});
            }
            check_run(run, true);
        }
        for (auto& [row, cols] : by_row) {
            std::vector<GridPos> run;
            for (int c : cols) {
                if (!run.empty() && run.back().col + 1 != c) {
                    check_run(run, false);
                    run.clear();
                }
                run.push_back({row, c});
            }
            check_run(run, false);
        }
    }
    return out;
}

std::vector<Diagnostic> detect_sum_wrap(const AnalysisContext& ctx) {
    std::vector<Diagnostic> out;
    for (const auto& site : parsed_formulas(ctx.workbook)) {
        for (const Expr* e : calls_in(*site.ast)) {
            const auto& call = std::get<Call>(e->node);
            if ((call.name != "SUM" && call.name != "AVERAGE") || call.args.size() != 1)
                continue;
            const ExprPtr& arg = call.args.front();
            if (std::holds_alternative<RangeRef>(arg->node))
                continue;
            bool bare = std::holds_alternative<CellRef>(arg->node);
            std::string inner = serialize(arg).substr(1);
            std::string msg = bare ? call.name + "(" + inner + ") aggregates a single cell; the wrapper is redundant"
                                   : call.name + " wraps the single expression " + inner +
                                         "; the result is the expression itself and the wrapper misleads readers";
            std::string fix = serialize(replace_node(site.ast, e, arg));
            out.push_back(make_diag(ctx, detector::kSumWrap, leaf::kStructural, Severity::Info, {site.addr},
                                    std::move(msg), fix));
        }
    }
    return out;
}

std::optional<std::vector<FormatOperand>> format_operands(const Expr& ast, const std::string& host_sheet,
                                                          const Workbook& wb) {
    std::vector<FormatOperand> ops;
    if (const auto* call = std::get_if<Call>(&ast.node)) {
        if (call->name != "SUM" || call->args.empty())
            return std::nullopt;
        for (const auto& arg : call->args) {
            if (const auto* r = std::get_if<RangeRef>(&arg->node)) {
                CellAddress a = resolve(r->first, host_sheet), b = resolve(r->last, host_sheet);
                if (!wb.find_sheet(a.sheet))
                    return std::nullopt;
                for (const auto& c : expand_range(a, b))
                    if (!is_blank(wb, c))
                        ops.push_back({c, 1.0});
            } else if (const auto* c = std::get_if<CellRef>(&arg->node)) {
                ops.push_back({resolve(c->addr, host_sheet), 1.0});
            } else {
                return std::nullopt;
            }
        }
        return ops;
    }
    bool ok = true;
    std::function<void(const Expr&, double)> chain = [&](const Expr& e, double sign) {
        if (!ok)
            return;
        if (const auto* b = std::get_if<Binary>(&e.node)) {
            if (b->op != BinaryOp::Add && b->op != BinaryOp::Sub) {
                ok = false;
                return;
            }
            chain(*b->lhs, sign);
            chain(*b->rhs, b->op == BinaryOp::Sub ? -sign : sign);
        } else if (const auto* c = std::get_if<CellRef>(&e.node)) {
            ops.push_back({resolve(c->addr, host_sheet), sign});
        } else {
            ok = false;
        }
    };
    if (!std::holds_alternative<Binary>(ast.node))
        return std::nullopt;
    chain(ast, 1.0);
    if (!ok)
        return std::nullopt;
    return ops;
}

bool displayed_sum_mismatch(const Workbook& wb, const EvalResult& values, const CellAddress& aggregate,
                            const std::vector<FormatOperand>& operands) {
    const Cell* agg = wb.cell(aggregate);
    if (!agg || !agg->meta.display_decimals)
        return false;
    const CellValue& total = values.at(aggregate);
    if (total.kind() != ValueKind::Number)
        return false;
    double sum = 0.0;
    for (const auto& op : operands) {
        const CellValue& v = values.at(op.cell);
        double shown = 0.0;
        switch (v.kind()) {
        case ValueKind::Blank: break;
        case ValueKind::Text: continue;
        case ValueKind::Error: return false;
        case ValueKind::Date: shown = v.numeric(); break;
        case ValueKind::Number: {
            const Cell* c = wb.cell(op.cell);
            shown = std::strtod(display(v, c ? c->meta : CellMeta{}).c_str(), nullptr);
            break;
        }
        }
        sum += op.sign * shown;
    }
    int decimals = *agg->meta.display_decimals;
    return format_fixed(sum, decimals) != display(total, agg->meta);
}

std::vector<Diagnostic> detect_format(const AnalysisContext& ctx) {
    std::vector<Diagnostic> out;
    for (const auto& site : parsed_formulas(ctx.workbook)) {
        if (!site.cell->meta.display_decimals)
            continue;
        auto ops = format_operands(*site.ast, site.addr.sheet, ctx.workbook);
        if (!ops || ops->empty())
            continue;
        if (!displayed_sum_mismatch(ctx.workbook, ctx.values, site.addr, *ops))
            continue;
        std::string shown;
        double sum = 0.0;
        std::vector<CellAddress> cells{site.addr};
        for (const auto& op : *ops) {
            const CellValue& v = ctx.values.at(op.cell);
            if (v.kind() == ValueKind::Text)
                continue;
            const Cell* c = ctx.workbook.cell(op.cell);
            std::string d = v.kind() == ValueKind::Blank ? "0" : display(v, c ? c->meta : CellMeta{});
            if (v.kind() == ValueKind::Date)
                d = format_number(v.numeric());
            sum += op.sign * std::strtod(d.c_str(), nullptr);
            shown += shown.empty() ? (op.sign < 0 ? "-" : "") : (op.sign < 0 ? " - " : " + ");
            shown += d;
            if (std::find(cells.begin(), cells.end(), op.cell.location()) == cells.end())
                cells.push_back(op.cell);
        }
        int decimals = *site.cell->meta.display_decimals;
        out.push_back(make_diag(ctx, detector::kFormat, leaf::kStructural, Severity::Info, std::move(cells),
                                "displayed operands " + shown + " = " + format_fixed(sum, decimals) +
                                    " but the total displays " + display(ctx.values.at(site.addr), site.cell->meta) +
                                    "; values are rounded for display only"));
    }
    return out;
}

std::vector<Diagnostic> detect_century(const AnalysisContext& ctx) {
    std::vector<Diagnostic> out;
    for (const auto& sheet : ctx.workbook.sheets()) {
        for (const auto& [pos, cell] : sheet.cells()) {
            if (cell.content.kind() != CellKind::Date)
                continue;
            const std::string& src = cell.content.as_date().source;
            if (!has_two_digit_year(src))
                continue;
            Date d;
            try {
                d = parse_date(src, ctx.config.pivot_year);
            } catch (const DateError&) {
                continue;
            }
            int yy = d.year % 100;
            std::string msg = "two-digit year in " + src + " interpreted as " + std::to_string(d.year);
            if (yy == ctx.config.pivot_year)
                msg += "; pivot boundary (" + std::to_string(ctx.config.pivot_year) + ") maps to the 1900s";
            else
                msg += yy < ctx.config.pivot_year
                           ? " (years below " + std::to_string(ctx.config.pivot_year) + " are taken as 20xx)"
                           : " (years from " + std::to_string(ctx.config.pivot_year) + " up are taken as 19xx)";
            msg += "; enter the year with its century";
            std::string fix = src.substr(0, src.rfind('/') + 1) + std::to_string(d.year);
            out.push_back(make_diag(ctx, detector::kCentury, leaf::kSystem, Severity::Info, {sheet.address(pos)},
                                    std::move(msg), fix));
        }
    }
    return out;
}

std::vector<Diagnostic> detect_stale(const AnalysisContext& ctx) {
    std::vector<Diagnostic> out;
    long today = days_from_civil(ctx.analysis_date);
    for (const auto& sheet : ctx.workbook.sheets()) {
        for (const auto& [pos, cell] : sheet.cells()) {
            if (cell.content.empty() || cell.content.kind() == CellKind::Formula || !cell.meta.last_updated)
                continue;
            long age = today - days_from_civil(*cell.meta.last_updated);
            if (age <= ctx.config.stale_days)
                continue;
            CellAddress addr = sheet.address(pos);
            const auto& deps = ctx.graph.dependents(addr);
            if (deps.empty())
                continue;
            std::vector<CellAddress> cells{addr};
            cells.insert(cells.end(), deps.begin(), deps.end());
            out.push_back(make_diag(ctx, detector::kStale, leaf::kTemporal, Severity::Warning, cells,
                                    cell_label(ctx.workbook, addr) + " was last updated " +
                                        to_iso(*cell.meta.last_updated) + ", " + std::to_string(age) +
                                        " days before " + to_iso(ctx.analysis_date) + " (threshold " +
                                        std::to_string(ctx.config.stale_days) + "), and feeds " +
                                        join_labels(ctx.workbook, deps)));
        }
    }
    return out;
}

std::vector<Diagnostic> detect_average_parts(const AnalysisContext& ctx) {
    std::vector<Diagnostic> out;
    auto single_range = [](const Call& call) -> const RangeRef* {
        return call.args.size() == 1 ? std::get_if<RangeRef>(&call.args.front()->node) : nullptr;
    };
    auto rect = [](const RangeRef& r, const std::string& host) {
        CellAddress a = resolve(r.first, host), b = resolve(r.last, host);
        return std::make_tuple(a.sheet, std::min(a.col, b.col), std::max(a.col, b.col), std::min(a.row, b.row),
                               std::max(a.row, b.row));
    };
    auto sites = parsed_formulas(ctx.workbook);
    for (const auto& site : sites) {
        for (const Expr* e : calls_in(*site.ast)) {
            const auto& call = std::get<Call>(e->node);
            const RangeRef* r = call.name == "AVERAGE" ? single_range(call) : nullptr;
            if (!r)
                continue;
            auto target = rect(*r, site.addr.sheet);
            auto [sheet, c0, c1, r0, r1] = target;
            if (r0 != r1 || c0 == c1)
                continue;
            for (const auto& other : sites) {
                if (other.addr.same_cell(site.addr) || other.addr.sheet != site.addr.sheet ||
                    other.addr.row != site.addr.row)
                    continue;
                bool totals = false;
                for (const Expr* oe : calls_in(*other.ast)) {
                    const auto& oc = std::get<Call>(oe->node);
                    const RangeRef* orr = oc.name == "SUM" ? single_range(oc) : nullptr;
                    totals = totals || (orr && rect(*orr, other.addr.sheet) == target);
                }
                if (!totals)
                    continue;
                out.push_back(make_diag(
                    ctx, detector::kAvgParts, leaf::kLogic, Severity::Info, {site.addr, other.addr},
                    "AVERAGE(" + range_text(r->first, r->last) + ") averages the components that " +
                        cell_label(ctx.workbook, other.addr) +
                        " already totals; if a per-unit average is meant, divide that total by the unit count"));
                break;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

std::vector<Diagnostic> run_all(const Workbook& wb, const DetectorConfig& config) {
    DepGraph graph = DepGraph::build(wb);
    EvalResult values = evaluate(wb, graph);
    AnalysisContext ctx{wb, graph, values, config, TaxonomyTree::default_tree(),
                        config.analysis_date.value_or(today_utc())};

    using Detector = std::vector<Diagnostic> (*)(const AnalysisContext&);
    static const std::vector<std::pair<std::string_view, Detector>> kDetectors{
        {detector::kSyntax, detect_syntax},
        {detector::kCirc, detect_circular},
        {detector::kHard, detect_hard_coded},
        {detector::kDupConst, detect_duplicated_constants},
        {detector::kRangeFringe, detect_range_fringe},
        {detector::kBlankRef, detect_blank_refs},
        {detector::kInconsist, detect_inconsistent},
        {detector::kSumWrap, detect_sum_wrap},
        {detector::kFormat, detect_format},
        {detector::kCentury, detect_century},
        {detector::kStale, detect_stale},
        {detector::kAvgParts, detect_average_parts},
    };

    std::vector<Diagnostic> all;
    for (const auto& [id, fn] : kDetectors) {
        if (!config.is_enabled(id))
            continue;
        auto found = fn(ctx);
        all.insert(all.end(), std::make_move_iterator(found.begin()), std::make_move_iterator(found.end()));
    }
    auto key = [&](const Diagnostic& d) {
        const CellAddress& c = d.cells.front();
        return std::make_tuple(wb.sheet_index(c.sheet), c.row, c.col, std::cref(d.detector), std::cref(d.message),
                               std::cref(d.cells));
    };
    std::sort(all.begin(), all.end(), [&](const Diagnostic& a, const Diagnostic& b) { return key(a) < key(b); });
    return all;
}

std::optional<Workbook> apply_fix(const Workbook& wb, const Diagnostic& d, int pivot) {
    if (!d.fix || d.cells.empty())
        return std::nullopt;
    Workbook out = wb;
    const Cell* existing = wb.cell(d.cells.front());
    Cell cell{CellContent::from_entry(*d.fix, pivot), existing ? existing->meta : CellMeta{}};
    out.set_cell(d.cells.front(), std::move(cell));
    return out;
}

std::string diagnostics_to_json(const Workbook& wb, const std::vector<Diagnostic>& ds) {
    using nlohmann::ordered_json;
    ordered_json arr = ordered_json::array();
    for (const auto& d : ds) {
        ordered_json j;
        j["detector"] = d.detector;
        j["leaf"] = d.taxonomy_leaf;
        j["path"] = d.taxonomy_path;
        j["severity"] = std::string(severity_name(d.severity));
        j["cells"] = ordered_json::array();
        for (const auto& c : d.cells)
            j["cells"].push_back(cell_label(wb, c));
        j["message"] = d.message;
        if (d.fix)
            j["fix"] = *d.fix;
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

std::string diagnostics_to_text(const Workbook& wb, const std::vector<Diagnostic>& ds) {
    if (ds.empty())
        return "no issues\n";
    std::string out;
    for (const auto& d : ds) {
        std::string path;
        for (const auto& p : d.taxonomy_path)
            path += (path.empty() ? "" : " > ") + p;
        out += cell_label(wb, d.cells.front()) + " [" + std::string(severity_name(d.severity)) + "] " + d.detector +
               ": " + d.message;
        out += " (taxonomy: " + path + ")\n";
    }
    return out;
}

}  // namespace sheetaudit
