#pragma once

#include <compare>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sheetaudit {

inline constexpr int kMaxColumn = 16384;   // XFD
inline constexpr int kMaxRow = 1048576;

class AddressError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class RangeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A cell coordinate in A1 terms. An empty sheet name means "the sheet of the
/// formula that holds the reference" and is resolved by the consumer.
struct CellAddress {
    std::string sheet;
    int col = 1;
    int row = 1;
    bool col_absolute = false;
    bool row_absolute = false;

    auto operator<=>(const CellAddress&) const = default;

    /// Same cell with both absolute flags cleared; used as a map key.
    CellAddress location() const { return {sheet, col, row, false, false}; }
    CellAddress on_sheet(std::string name) const {
        return {std::move(name), col, row, col_absolute, row_absolute};
    }
    bool same_cell(const CellAddress& other) const {
        return sheet == other.sheet && col == other.col && row == other.row;
    }
};

bool is_valid_position(int col, int row);

std::string column_letters(int col);

/// Parses "A1", "$B$2", "Sheet2!AA10". Throws AddressError.
CellAddress parse_a1(std::string_view text);

/// Canonical A1 text without the sheet prefix.
std::string to_a1(const CellAddress& addr);

/// A1 text with a "Sheet!" prefix when the address carries a sheet name.
std::string to_a1_qualified(const CellAddress& addr);

/// Row-major enumeration of the rectangle spanned by two corners. Corners are
/// normalized; the result carries the start's sheet and relative flags.
std::vector<CellAddress> expand_range(const CellAddress& start, const CellAddress& end);

}  // namespace sheetaudit
