#include "sheetaudit/address.hpp"

#include <algorithm>
#include <cctype>

namespace sheetaudit {

bool is_valid_position(int col, int row) {
    return col >= 1 && col <= kMaxColumn && row >= 1 && row <= kMaxRow;
}

std::string column_letters(int col) {
    std::string out;
    while (col > 0) {
        int rem = (col - 1) % 26;
        out.insert(out.begin(), static_cast<char>('A' + rem));
        col = (col - 1) / 26;
    }
    return out;
}

CellAddress parse_a1(std::string_view text) {
    CellAddress addr;
    auto fail = [&](const char* why) {
        return AddressError("bad cell address '" + std::string(text) + "': " + why);
    };

    if (auto bang = text.rfind('!'); bang != std::string_view::npos) {
        std::string_view sheet = text.substr(0, bang);
        if (sheet.size() >= 2 && sheet.front() == '\'' && sheet.back() == '\'')
            sheet = sheet.substr(1, sheet.size() - 2);
        if (sheet.empty())
            throw fail("empty sheet name");
        addr.sheet = std::string(sheet);
        text = text.substr(bang + 1);
    }

    std::size_t i = 0;
    if (i < text.size() && text[i] == '$') {
        addr.col_absolute = true;
        ++i;
    }
    long col = 0;
    std::size_t letters = 0;
    while (i < text.size() && std::isalpha(static_cast<unsigned char>(text[i]))) {
        col = col * 26 + (std::toupper(static_cast<unsigned char>(text[i])) - 'A' + 1);
        ++letters;
        ++i;
    }
    if (letters == 0)
        throw fail("missing column letters");
    if (letters > 3 || col > kMaxColumn)
        throw fail("column beyond XFD");
    if (i < text.size() && text[i] == '$') {
        addr.row_absolute = true;
        ++i;
    }
    long row = 0;
    std::size_t digits = 0;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
        row = row * 10 + (text[i] - '0');
        ++digits;
        ++i;
        if (row > kMaxRow)
            throw fail("row out of range");
    }
    if (digits == 0)
        throw fail("missing row number");
    if (i != text.size())
        throw fail("trailing characters");
    if (row < 1)
        throw fail("row 0");
    addr.col = static_cast<int>(col);
    addr.row = static_cast<int>(row);
    return addr;
}

std::string to_a1(const CellAddress& addr) {
    std::string out;
    if (addr.col_absolute)
        out += '$';
    out += column_letters(addr.col);
    if (addr.row_absolute)
        out += '$';
    out += std::to_string(addr.row);
    return out;
}

std::string to_a1_qualified(const CellAddress& addr) {
    if (addr.sheet.empty())
        return to_a1(addr);
    bool plain = std::all_of(addr.sheet.begin(), addr.sheet.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
    });
    std::string prefix = plain ? addr.sheet : "'" + addr.sheet + "'";
    return prefix + "!" + to_a1(addr);
}

std::vector<CellAddress> expand_range(const CellAddress& start, const CellAddress& end) {
    if (start.sheet != end.sheet)
        throw RangeError("range spans sheets: " + to_a1_qualified(start) + ":" + to_a1_qualified(end));
    int c0 = std::min(start.col, end.col), c1 = std::max(start.col, end.col);
    int r0 = std::min(start.row, end.row), r1 = std::max(start.row, end.row);
    std::vector<CellAddress> out;
    out.reserve(static_cast<std::size_t>(c1 - c0 + 1) * static_cast<std::size_t>(r1 - r0 + 1));
    for (int r = r0; r <= r1; ++r)
        for (int c = c0; c <= c1; ++c)
            out.push_back({start.sheet, c, r, start.col_absolute, start.row_absolute});
    return out;
}

}  // namespace sheetaudit
