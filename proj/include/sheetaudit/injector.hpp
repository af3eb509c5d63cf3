#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sheetaudit/workbook.hpp"

namespace sheetaudit {

struct InjectionRecord {
    std::string category;           // taxonomy leaf id
    std::string detector_expected;  // e.g. "D-HARD"
    std::vector<CellAddress> cells;
    std::string original;
    std::string mutated;
    std::uint64_t seed = 0;
};

struct Injection {
    Workbook mutant;
    InjectionRecord record;
};

struct Unsupported {
    std::string reason;
    std::vector<std::string> supported;
};

using InjectResult = std::variant<Injection, Unsupported>;

struct InjectOptions {
    Date analysis_date = today_utc();
    int stale_days = 365;
    int pivot_year = kDefaultPivotYear;
};

/// Leaves the injector can plant.
const std::vector<std::string>& supported_injection_leaves();

/// Plants one instance of `category` (a full leaf id). Deterministic in seed.
InjectResult inject(const Workbook& wb, std::string_view category, std::uint64_t seed,
                    const InjectOptions& opts = {});

/// "<entry> [fmt=N] [updated=YYYY-MM-DD]"
std::string describe_cell(const Cell* cell);

std::string manifest_to_json(const Workbook& wb, const std::vector<InjectionRecord>& records);

}  // namespace sheetaudit
