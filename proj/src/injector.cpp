#include "sheetaudit/injector.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <random>
#include <set>

#include <json.hpp>

#include "sheetaudit/dependency_graph.hpp"
#include "sheetaudit/detectors.hpp"
#include "sheetaudit/evaluator.hpp"
#include "sheetaudit/taxonomy.hpp"

namespace sheetaudit {

const std::vector<std::string>& supported_injection_leaves() {
    static const std::vector<std::string> kLeaves{
        std::string(leaf::kSystem),
        std::string(leaf::kDeveloperOmission),
        std::string(leaf::kDeveloperDuplication),
        std::string(leaf::kInputterAlteration),
        std::string(leaf::kSyntax),
        std::string(leaf::kLogic),
        std::string(leaf::kStructural),
        std::string(leaf::kTemporal),
        std::string(leaf::kMaintainability),
    };
    return kLeaves;
}

std::string describe_cell(const Cell* cell) {
    if (!cell)
        return "";
    std::string out = cell->content.entry_text();
    if (cell->meta.display_decimals)
        out += " fmt=" + std::to_string(*cell->meta.display_decimals);
    if (cell->meta.last_updated)
        out += " updated=" + to_iso(*cell->meta.last_updated);
    return out;
}

std::string manifest_to_json(const Workbook& wb, const std::vector<InjectionRecord>& records) {
    using nlohmann::ordered_json;
    ordered_json arr = ordered_json::array();
    for (const auto& r : records) {
        ordered_json j;
        j["category"] = r.category;
        j["detector_expected"] = r.detector_expected;
        j["cells"] = ordered_json::array();
        for (const auto& c : r.cells)
            j["cells"].push_back(cell_label(wb, c));
        j["original"] = r.original;
        j["mutated"] = r.mutated;
        j["seed"] = r.seed;
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

namespace {

using Rng = std::mt19937_64;

struct Edit {
    CellAddress at;
    std::optional<Cell> cell;  // nullopt: erase
};

struct Mutation {
    std::string detector;
    std::vector<Edit> edits;
};

using Plan = std::function<Mutation(Rng&)>;

struct Site {
    CellAddress addr;
    const Cell* cell;
    ExprPtr ast;
};

struct Inputs {
    const Workbook& wb;
    const InjectOptions& opts;
    DepGraph graph;
    EvalResult values;
    std::vector<Site> formulas;
    std::set<double> allowed = DetectorConfig{}.allowed_constants;

    Inputs(const Workbook& w, const InjectOptions& o) : wb(w), opts(o), graph(DepGraph::build(w)), values(evaluate(w, graph)) {
        for (const auto& sheet : wb.sheets())
            for (const auto& [pos, cell] : sheet.cells())
                if (ExprPtr ast = cell.content.ast())
                    formulas.push_back({sheet.address(pos), &cell, ast});
    }
};

Cell with_formula(const Cell& old, const ExprPtr& ast) { return {CellContent::formula(serialize(ast)), old.meta}; }

ExprPtr literal(double v) { return v < 0 ? make_neg(make_number(-v)) : make_number(v); }

std::vector<const Expr*> nodes_of(const Expr& ast, bool (*pred)(const Expr&)) {
    std::vector<const Expr*> out;
    visit(ast, [&](const Expr& e) {
        if (pred(e))
            out.push_back(&e);
    });
    return out;
}

bool is_cell_ref(const Expr& e) { return std::holds_alternative<CellRef>(e.node); }
bool is_call(const Expr& e) { return std::holds_alternative<Call>(e.node); }

bool is_input(const Cell* c) { return c && !c->content.empty() && c->content.kind() != CellKind::Formula; }

// Direct (non-range) references from formulas to input cells.
std::map<CellAddress, std::vector<CellAddress>> direct_input_refs(const Inputs& in) {
    std::map<CellAddress, std::vector<CellAddress>> out;
    for (const auto& f : in.formulas) {
        for (const Expr* e : nodes_of(*f.ast, is_cell_ref)) {
            CellAddress target = resolve(std::get<CellRef>(e->node).addr, f.addr.sheet);
            if (!is_input(in.wb.cell(target)))
                continue;
            auto& users = out[target];
            if (std::find(users.begin(), users.end(), f.addr) == users.end())
                users.push_back(f.addr);
        }
    }
    return out;
}

std::vector<Plan> plan_maintainability(const Inputs& in) {
    std::vector<Plan> plans;
    for (const auto& f : in.formulas) {
        for (const Expr* e : nodes_of(*f.ast, is_cell_ref)) {
            CellAddress target = resolve(std::get<CellRef>(e->node).addr, f.addr.sheet);
            const CellValue& v = in.values.at(target);
            if (v.kind() != ValueKind::Number)
                continue;
            double x = v.as_number();
            if (in.allowed.count(x) || std::abs(x) == 365.0 || std::abs(x) == 366.0)
                continue;
            plans.push_back([&f, e, x](Rng&) {
                return Mutation{std::string(detector::kHard),
                                {{f.addr, with_formula(*f.cell, replace_node(f.ast, e, literal(x)))}}};
            });
        }
    }
    return plans;
}

std::vector<Plan> plan_duplication(const Inputs& in) {
    std::vector<Plan> plans;
    for (const auto& [target, users] : direct_input_refs(in)) {
        const Cell* c = in.wb.cell(target);
        if (users.size() < 2 || c->content.kind() != CellKind::Number || in.allowed.count(c->content.as_number()))
            continue;
        plans.push_back([&in, target = target, users = users, x = c->content.as_number()](Rng& rng) {
            std::size_t i = rng() % users.size();
            std::size_t j = rng() % (users.size() - 1);
            if (j >= i)
                ++j;
            std::vector<CellAddress> chosen{users[i], users[j]};
            std::sort(chosen.begin(), chosen.end());
            Mutation m{std::string(detector::kDupConst), {}};
            for (const auto& addr : chosen) {
                const Cell* host = in.wb.cell(addr);
                ExprPtr ast = transform(host->content.ast(), [&](const ExprPtr& n) {
                    const auto* r = std::get_if<CellRef>(&n->node);
                    return r && resolve(r->addr, addr.sheet).same_cell(target) ? literal(x) : n;
                });
                m.edits.push_back({addr, with_formula(*host, ast)});
            }
            return m;
        });
    }
    return plans;
}

std::vector<Plan> plan_omission(const Inputs& in) {
    std::vector<Plan> plans;
    for (const auto& [target, users] : direct_input_refs(in)) {
        plans.push_back([target = target](Rng&) {
            return Mutation{std::string(detector::kBlankRef), {{target, std::nullopt}}};
        });
    }
    return plans;
}

bool is_aggregate_call(const Call& c) {
    return c.name == "SUM" || c.name == "AVERAGE" || c.name == "MIN" || c.name == "MAX" || c.name == "COUNT";
}

std::vector<Plan> plan_alteration(const Inputs& in) {
    std::set<CellAddress> fringes;
    for (const auto& f : in.formulas) {
        for (const Expr* e : nodes_of(*f.ast, is_call)) {
            const auto& call = std::get<Call>(e->node);
            if (!is_aggregate_call(call))
                continue;
            for (const auto& arg : call.args) {
                const auto* r = std::get_if<RangeRef>(&arg->node);
                if (!r)
                    continue;
                CellAddress a = resolve(r->first, f.addr.sheet), b = resolve(r->last, f.addr.sheet);
                if (!in.wb.find_sheet(a.sheet))
                    continue;
                int c0 = std::min(a.col, b.col), c1 = std::max(a.col, b.col);
                int r0 = std::min(a.row, b.row), r1 = std::max(a.row, b.row);
                CellAddress past;
                if (c0 == c1)
                    past = {a.sheet, c0, r1 + 1};
                else if (r0 == r1)
                    past = {a.sheet, c1 + 1, r0};
                else
                    continue;
                const Cell* existing = in.wb.cell(past);
                if (!is_valid_position(past.col, past.row) || past.same_cell(f.addr) ||
                    (existing && !existing->content.empty()) || in.graph.contains(past))
                    continue;
                fringes.insert(past);
            }
        }
    }
    std::vector<Plan> plans;
    for (const auto& past : fringes) {
        plans.push_back([past](Rng& rng) {
            double v = static_cast<double>(2 + rng() % 998);
            return Mutation{std::string(detector::kRangeFringe), {{past, Cell{CellContent::number(v), {}}}}};
        });
    }
    return plans;
}

std::vector<Plan> plan_syntax(const Inputs& in) {
    std::vector<Plan> plans;
    for (const auto& f : in.formulas) {
        const std::string& src = f.cell->content.as_formula().source;
        for (std::size_t i = 0; i < src.size(); ++i) {
            if (src[i] != ')')
                continue;
            std::string broken = src.substr(0, i) + src.substr(i + 1);
            plans.push_back([&f, broken](Rng&) {
                return Mutation{std::string(detector::kSyntax),
                                {{f.addr, Cell{CellContent::formula(broken), f.cell->meta}}}};
            });
        }
    }
    return plans;
}

struct Run {
    std::vector<CellAddress> cells;
};

std::vector<Run> fill_runs(const Inputs& in) {
    std::vector<Run> runs;
    for (const auto& sheet : in.wb.sheets()) {
        std::map<int, std::vector<int>> by_col, by_row;
        for (const auto& [pos, cell] : sheet.cells()) {
            if (!cell.content.ast())
                continue;
            by_col[pos.col].push_back(pos.row);
            by_row[pos.row].push_back(pos.col);
        }
        auto flush = [&](Run& run) {
            if (run.cells.size() >= static_cast<std::size_t>(kMinFillRun))
                runs.push_back(run);
            run.cells.clear();
        };
        for (auto& [col, rows] : by_col) {
            std::sort(rows.begin(), rows.end());
            Run run;
            for (int r : rows) {
                if (!run.cells.empty() && run.cells.back().row + 1 != r)
                    flush(run);
                run.cells.push_back(sheet.address({r, col}));
            }
            flush(run);
        }
        for (auto& [row, cols] : by_row) {
            Run run;
            for (int c : cols) {
                if (!run.cells.empty() && run.cells.back().col + 1 != c)
                    flush(run);
                run.cells.push_back(sheet.address({row, c}));
            }
            flush(run);
        }
    }
    return runs;
}

std::vector<Plan> plan_logic(const Inputs& in) {
    std::vector<Plan> plans;

    // A total that reads its own cell.
    for (const auto& f : in.formulas) {
        auto calls = nodes_of(*f.ast, is_call);
        bool is_total = std::any_of(calls.begin(), calls.end(),
                                    [](const Expr* e) { return std::get<Call>(e->node).name == "SUM"; });
        if (!is_total)
            continue;
        const Expr* adjacent = nullptr;
        CellAddress first, last;
        for (const Expr* e : calls) {
            const auto& call = std::get<Call>(e->node);
            if (call.name != "SUM")
                continue;
            for (const auto& arg : call.args) {
                const auto* r = std::get_if<RangeRef>(&arg->node);
                if (!r || adjacent)
                    continue;
                CellAddress a = resolve(r->first, f.addr.sheet), b = resolve(r->last, f.addr.sheet);
                if (a.sheet != f.addr.sheet)
                    continue;
                bool below = a.col == b.col && a.col == f.addr.col && std::max(a.row, b.row) + 1 == f.addr.row;
                bool right = a.row == b.row && a.row == f.addr.row && std::max(a.col, b.col) + 1 == f.addr.col;
                if (!below && !right)
                    continue;
                adjacent = arg.get();
                first = r->first;
                last = r->last;
                bool first_is_end = below ? a.row > b.row : a.col > b.col;
                CellAddress& end = first_is_end ? first : last;
                end.col = f.addr.col;
                end.row = f.addr.row;
            }
        }
        ExprPtr mutated = adjacent ? replace_node(f.ast, adjacent, make_range(first, last))
                                   : make_binary(BinaryOp::Add, f.ast, make_ref({"", f.addr.col, f.addr.row}));
        plans.push_back([&f, mutated](Rng&) {
            return Mutation{std::string(detector::kCirc), {{f.addr, with_formula(*f.cell, mutated)}}};
        });
    }

    // A fill-run member replaced by an unadjusted copy of its neighbour.
    for (const auto& run : fill_runs(in)) {
        const std::size_t n = run.cells.size();
        const CellAddress origin = shape_origin(run.cells.front().sheet);
        std::vector<std::string> shapes;
        std::map<std::string, std::size_t> counts;
        for (const auto& c : run.cells) {
            shapes.push_back(serialize(rebase(in.wb.cell(c)->content.ast(), c, origin)));
            ++counts[shapes.back()];
        }
        auto best = std::max_element(counts.begin(), counts.end(),
                                     [](const auto& x, const auto& y) { return x.second < y.second; });
        if ((best->second - 1) * kMajorityDenominator < n * kMajorityNumerator)
            continue;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (shapes[i] != best->first)
                continue;
            for (std::size_t j : {i - 1, i + 1}) {
                if (shapes[j] != best->first)
                    continue;
                const Cell* source = in.wb.cell(run.cells[j]);
                ExprPtr ast = source->content.ast();
                if (serialize(rebase(ast, run.cells[i], origin)) == best->first)
                    continue;
                const Cell* victim = in.wb.cell(run.cells[i]);
                Cell cell{CellContent::formula(source->content.as_formula().source), victim->meta};
                plans.push_back([at = run.cells[i], cell](Rng&) {
                    return Mutation{std::string(detector::kInconsist), {{at, cell}}};
                });
            }
        }
    }
    return plans;
}

std::vector<Plan> plan_structural(const Inputs& in) {
    std::vector<Plan> plans;
    for (const auto& f : in.formulas) {
        if (!std::holds_alternative<Binary>(f.ast->node))
            continue;
        plans.push_back([&f](Rng&) {
            return Mutation{std::string(detector::kSumWrap),
                            {{f.addr, with_formula(*f.cell, make_call("SUM", {f.ast}))}}};
        });
    }
    for (const auto& f : in.formulas) {
        auto ops = format_operands(*f.ast, f.addr.sheet, in.wb);
        if (!ops || ops->empty() || in.values.at(f.addr).kind() != ValueKind::Number)
            continue;
        for (int d = 0; d <= 4; ++d) {
            Workbook trial = in.wb;
            std::vector<Edit> edits;
            auto stamp = [&](const CellAddress& at) {
                const Cell* c = in.wb.cell(at);
                if (!c || c->content.empty() || c->meta.display_decimals == d)
                    return;
                for (const auto& e : edits)
                    if (e.at == at)
                        return;
                Cell updated = *c;
                updated.meta.display_decimals = d;
                trial.set_cell(at, updated);
                edits.push_back({at, updated});
            };
            stamp(f.addr);
            for (const auto& op : *ops)
                if (in.values.at(op.cell).kind() == ValueKind::Number)
                    stamp(op.cell);
            if (edits.empty() || !edits.front().at.same_cell(f.addr))
                continue;
            if (!displayed_sum_mismatch(trial, in.values, f.addr, *ops))
                continue;
            plans.push_back([edits](Rng&) { return Mutation{std::string(detector::kFormat), edits}; });
        }
    }
    return plans;
}

std::vector<Plan> plan_temporal(const Inputs& in) {
    std::vector<Plan> plans;
    for (const auto& sheet : in.wb.sheets()) {
        for (const auto& [pos, cell] : sheet.cells()) {
            CellAddress at = sheet.address(pos);
            if (!is_input(&cell) || in.graph.dependents(at).empty())
                continue;
            plans.push_back([&in, at, &cell](Rng& rng) {
                Cell aged = cell;
                long age = in.opts.stale_days + 1 + static_cast<long>(rng() % 60);
                aged.meta.last_updated = add_days(in.opts.analysis_date, -age);
                return Mutation{std::string(detector::kStale), {{at, aged}}};
            });
        }
    }
    return plans;
}

std::vector<Plan> plan_system(const Inputs& in) {
    std::vector<Plan> plans;
    for (const auto& sheet : in.wb.sheets()) {
        for (const auto& [pos, cell] : sheet.cells()) {
            if (cell.content.kind() != CellKind::Date)
                continue;
            const auto& dv = cell.content.as_date();
            if (has_two_digit_year(dv.source))
                continue;
            int yy = dv.date.year % 100;
            std::string src = dv.source.substr(0, dv.source.rfind('/') + 1) + (yy < 10 ? "0" : "") +
                              std::to_string(yy);
            CellContent content = CellContent::from_entry(src, in.opts.pivot_year);
            if (content.kind() != CellKind::Date)
                continue;
            Cell rewritten{content, cell.meta};
            plans.push_back([at = sheet.address(pos), rewritten](Rng&) {
                return Mutation{std::string(detector::kCentury), {{at, rewritten}}};
            });
        }
    }
    return plans;
}

}  // namespace

InjectResult inject(const Workbook& wb, std::string_view category, std::uint64_t seed, const InjectOptions& opts) {
    using Planner = std::vector<Plan> (*)(const Inputs&);
    static const std::map<std::string, Planner, std::less<>> kPlanners{
        {std::string(leaf::kSystem), plan_system},
        {std::string(leaf::kDeveloperOmission), plan_omission},
        {std::string(leaf::kDeveloperDuplication), plan_duplication},
        {std::string(leaf::kInputterAlteration), plan_alteration},
        {std::string(leaf::kSyntax), plan_syntax},
        {std::string(leaf::kLogic), plan_logic},
        {std::string(leaf::kStructural), plan_structural},
        {std::string(leaf::kTemporal), plan_temporal},
        {std::string(leaf::kMaintainability), plan_maintainability},
    };
    auto planner = kPlanners.find(category);
    if (planner == kPlanners.end())
        return Unsupported{"category '" + std::string(category) + "' cannot be injected",
                           supported_injection_leaves()};

    Inputs in(wb, opts);
    std::vector<Plan> plans = planner->second(in);
    if (plans.empty())
        return Unsupported{"no eligible site for '" + std::string(category) + "' in this workbook",
                           supported_injection_leaves()};

    Rng rng(seed);
    Mutation m = plans[rng() % plans.size()](rng);

    Injection out{wb, {}};
    for (const auto& e : m.edits) {
        if (e.cell)
            out.mutant.set_cell(e.at, *e.cell);
        else
            out.mutant.erase_cell(e.at);
        out.record.cells.push_back(e.at);
    }
    out.record.category = std::string(category);
    out.record.detector_expected = m.detector;
    out.record.original = describe_cell(wb.cell(m.edits.front().at));
    out.record.mutated = describe_cell(out.mutant.cell(m.edits.front().at));
    out.record.seed = seed;
    return out;
}

}  // namespace sheetaudit
