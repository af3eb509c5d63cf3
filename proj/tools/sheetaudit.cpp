#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "sheetaudit/detectors.hpp"
#include "sheetaudit/evaluator.hpp"
#include "sheetaudit/injector.hpp"
#include "sheetaudit/taxonomy.hpp"
#include "sheetaudit/workbook.hpp"

namespace fs = std::filesystem;
using namespace sheetaudit;

namespace {

constexpr int kExitClean = 0;
constexpr int kExitFindings = 1;
constexpr int kExitFailure = 2;

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        auto b = item.find_first_not_of(" \t");
        auto e = item.find_last_not_of(" \t");
        if (b != std::string::npos)
            out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out)
        throw std::runtime_error("write failed for " + path.string());
}

std::string eval_grid(const Workbook& wb) {
    EvalResult values = evaluate(wb);
    std::string out;
    for (const auto& sheet : wb.sheets()) {
        if (wb.sheets().size() > 1)
            out += "[" + sheet.name() + "]\n";
        for (int row = 1; row <= sheet.max_row(); ++row) {
            std::string line;
            for (int col = 1; col <= sheet.max_col(); ++col) {
                if (col > 1)
                    line += '\t';
                const Cell* c = sheet.find(col, row);
                if (c)
                    line += display(values.at(sheet.address({row, col})), c->meta);
            }
            out += line + "\n";
        }
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Static analysis for spreadsheet workbooks"};
    app.require_subcommand(1);

    std::string input;
    std::string format = "text";
    std::string detectors;
    int pivot_year = kDefaultPivotYear;
    int stale_days = 365;
    std::string allow_constants;
    std::string analysis_date;
    std::string fail_on = "warning";

    auto* analyze = app.add_subcommand("analyze", "Run detectors and report diagnostics");
    analyze->add_option("file", input, "Workbook (.grid or .json)")->required();
    analyze->add_option("--format", format)->check(CLI::IsMember({"text", "json"}));
    analyze->add_option("--detectors", detectors, "Comma-separated detector ids");
    analyze->add_option("--pivot-year", pivot_year)->check(CLI::Range(0, 99));
    analyze->add_option("--stale-days", stale_days)->check(CLI::NonNegativeNumber);
    analyze->add_option("--allow-constants", allow_constants, "Comma-separated numbers ignored by D-HARD/D-DUPCONST");
    analyze->add_option("--analysis-date", analysis_date, "YYYY-MM-DD");
    analyze->add_option("--fail-on", fail_on)->check(CLI::IsMember({"error", "warning", "info"}));

    auto* eval = app.add_subcommand("eval", "Print the displayed value grid");
    eval->add_option("file", input)->required();
    eval->add_option("--pivot-year", pivot_year)->check(CLI::Range(0, 99));

    std::string tax_format = "text";
    auto* taxonomy = app.add_subcommand("taxonomy", "Print the error taxonomy");
    taxonomy->add_option("--format", tax_format)->check(CLI::IsMember({"text", "json"}));

    std::string category;
    std::uint64_t seed = 0;
    std::string out_dir;
    auto* inject_cmd = app.add_subcommand("inject", "Plant one labelled error");
    inject_cmd->add_option("file", input)->required();
    inject_cmd->add_option("--category", category, "Taxonomy leaf id")->required();
    inject_cmd->add_option("--seed", seed)->required();
    inject_cmd->add_option("--out", out_dir)->required();
    inject_cmd->add_option("--analysis-date", analysis_date, "YYYY-MM-DD");
    inject_cmd->add_option("--stale-days", stale_days)->check(CLI::NonNegativeNumber);
    inject_cmd->add_option("--pivot-year", pivot_year)->check(CLI::Range(0, 99));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitClean : kExitFailure;
    }

    try {
        if (taxonomy->parsed()) {
            const auto& tree = TaxonomyTree::default_tree();
            std::cout << (tax_format == "json" ? tree.to_json() + "\n" : tree.to_text());
            return kExitClean;
        }

        // Validate everything before touching the input file.
        std::optional<Date> pinned;
        if (!analysis_date.empty())
            pinned = parse_iso_date(analysis_date);

        DetectorConfig config;
        config.pivot_year = pivot_year;
        config.stale_days = stale_days;
        config.analysis_date = pinned;
        for (const auto& id : split_list(detectors)) {
            if (!is_detector_id(id)) {
                std::cerr << "unknown detector '" << id << "'\n";
                return kExitFailure;
            }
            config.enabled.insert(id);
        }
        if (!allow_constants.empty()) {
            for (const auto& item : split_list(allow_constants)) {
                std::size_t used = 0;
                double v = std::stod(item, &used);
                if (used != item.size())
                    throw std::invalid_argument("bad constant '" + item + "'");
                config.allowed_constants.insert(v);
            }
        }
        std::string leaf_id;
        if (inject_cmd->parsed())
            leaf_id = TaxonomyTree::default_tree().resolve(category);

        LoadOptions load_opts;
        load_opts.pivot_year = pivot_year;
        Workbook wb = load_workbook_file(input, load_opts);

        if (eval->parsed()) {
            std::cout << eval_grid(wb);
            return kExitClean;
        }

        if (analyze->parsed()) {
            auto diags = run_all(wb, config);
            std::cout << (format == "json" ? diagnostics_to_json(wb, diags) : diagnostics_to_text(wb, diags));
            Severity threshold = *parse_severity(fail_on);
            bool failing = std::any_of(diags.begin(), diags.end(),
                                       [&](const Diagnostic& d) { return d.severity >= threshold; });
            return failing ? kExitFindings : kExitClean;
        }

        InjectOptions opts;
        if (pinned)
            opts.analysis_date = *pinned;
        opts.stale_days = stale_days;
        opts.pivot_year = pivot_year;
        InjectResult result = inject(wb, leaf_id, seed, opts);
        if (const auto* u = std::get_if<Unsupported>(&result)) {
            std::cerr << u->reason << "; supported:";
            for (const auto& s : u->supported)
                std::cerr << ' ' << s;
            std::cerr << '\n';
            return kExitFailure;
        }
        const auto& injection = std::get<Injection>(result);
        fs::path dir(out_dir);
        fs::create_directories(dir);
        std::string stem = fs::path(input).stem().string();
        write_file(dir / (stem + ".mutant.json"), save_workbook_json(injection.mutant));
        write_file(dir / (stem + ".manifest.json"), manifest_to_json(injection.mutant, {injection.record}));
        std::cout << "wrote " << (dir / (stem + ".mutant.json")).string() << " and "
                  << (dir / (stem + ".manifest.json")).string() << '\n';
        return kExitClean;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}
