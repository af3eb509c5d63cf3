#pragma once

#include <compare>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sheetaudit/address.hpp"
#include "sheetaudit/date.hpp"
#include "sheetaudit/formula.hpp"

namespace sheetaudit {

class LoadError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class CellKind { Empty, Number, Text, Date, Formula };

struct TextValue {
    std::string value;
};

struct DateValue {
    Date date;
    std::string source;  // as entered, e.g. "09/02/15"
};

struct FormulaValue {
    std::string source;  // begins with "="
    ParseResult parsed;
};

class CellContent {
public:
    CellContent() = default;

    static CellContent number(double v);
    static CellContent text(std::string v);
    static CellContent date(Date d, std::string source);
    static CellContent formula(std::string source);

    /// Interprets a typed entry: "=..." formula, decimal number, dd/mm/yy(yy)
    /// date, leading apostrophe forces text, anything else is text.
    static CellContent from_entry(std::string_view entry, int pivot = kDefaultPivotYear);

    CellKind kind() const;
    bool empty() const { return kind() == CellKind::Empty; }

    double as_number() const { return std::get<double>(data_); }
    const std::string& as_text() const { return std::get<TextValue>(data_).value; }
    const DateValue& as_date() const { return std::get<DateValue>(data_); }
    const FormulaValue& as_formula() const { return std::get<FormulaValue>(data_); }

    /// The parsed AST, or nullptr for non-formulas and syntax errors.
    ExprPtr ast() const;
    const SyntaxError* syntax_error() const;

    /// Text that from_entry maps back to this content.
    std::string entry_text() const;

    bool operator==(const CellContent& other) const;

private:
    std::variant<std::monostate, double, TextValue, DateValue, FormulaValue> data_;
};

struct CellMeta {
    std::optional<int> display_decimals;  // [0, 15]
    std::optional<Date> last_updated;

    bool operator==(const CellMeta&) const = default;
};

struct Cell {
    CellContent content;
    CellMeta meta;

    bool operator==(const Cell&) const = default;
};

/// Row-major key.
struct GridPos {
    int row = 1;
    int col = 1;

    auto operator<=>(const GridPos&) const = default;
};

class Sheet {
public:
    explicit Sheet(std::string name) : name_(std::move(name)) {}

    const std::string& name() const { return name_; }
    const std::map<GridPos, Cell>& cells() const { return cells_; }

    const Cell* find(int col, int row) const;
    void set(int col, int row, Cell cell);
    void erase(int col, int row);

    int max_row() const;
    int max_col() const;

    CellAddress address(const GridPos& pos) const { return {name_, pos.col, pos.row}; }

    bool operator==(const Sheet&) const = default;

private:
    std::string name_;
    std::map<GridPos, Cell> cells_;
};

class Workbook {
public:
    const std::vector<Sheet>& sheets() const { return sheets_; }

    /// Throws LoadError on empty or duplicate names.
    Sheet& add_sheet(std::string name);

    const Sheet* find_sheet(std::string_view name) const;
    Sheet* find_sheet(std::string_view name);
    int sheet_index(std::string_view name) const;  // -1 when absent

    /// nullptr for absent cells and unknown sheets.
    const Cell* cell(const CellAddress& addr) const;

    /// Creates the sheet when missing.
    void set_cell(const CellAddress& addr, Cell cell);
    void erase_cell(const CellAddress& addr);

    bool operator==(const Workbook&) const = default;

private:
    std::vector<Sheet> sheets_;
};

enum class WorkbookFormat { Grid, Json };

struct LoadOptions {
    int pivot_year = kDefaultPivotYear;
    std::string grid_sheet_name = "Sheet1";
};

Workbook load_workbook(std::string_view bytes, WorkbookFormat format, const LoadOptions& opts = {});
Workbook load_workbook_file(const std::string& path, const LoadOptions& opts = {});

/// JSON workbook text; load(save(wb)) == wb.
std::string save_workbook_json(const Workbook& wb);

}  // namespace sheetaudit
