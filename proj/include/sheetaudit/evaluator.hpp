#pragma once

#include <map>
#include <string>
#include <variant>

#include "sheetaudit/dependency_graph.hpp"
#include "sheetaudit/workbook.hpp"

namespace sheetaudit {

enum class ErrorKind { Div0, Cycle, UnknownFunction, BrokenRef, Type };

enum class ValueKind { Blank, Number, Text, Date, Error };

class CellValue {
public:
    CellValue() = default;

    static CellValue blank() { return {}; }
    static CellValue number(double v);
    static CellValue text(std::string v);
    static CellValue date(Date d);
    static CellValue error(ErrorKind e);

    ValueKind kind() const;
    bool is_error() const { return kind() == ValueKind::Error; }
    /// Numbers and dates (as serials).
    bool is_numeric() const;

    double as_number() const { return std::get<double>(data_); }
    const std::string& as_text() const { return std::get<std::string>(data_); }
    const Date& as_date() const { return std::get<Date>(data_); }
    ErrorKind as_error() const { return std::get<ErrorKind>(data_); }

    /// Number, or the serial of a date.
    double numeric() const;

    bool operator==(const CellValue&) const = default;

private:
    std::variant<std::monostate, double, std::string, Date, ErrorKind> data_;
};

std::string error_code(ErrorKind e);

class EvalResult {
public:
    /// Blank for cells never stored.
    const CellValue& at(const CellAddress& addr) const;
    void set(const CellAddress& addr, CellValue v);
    const std::map<CellAddress, CellValue>& values() const { return values_; }

private:
    std::map<CellAddress, CellValue> values_;
};

EvalResult evaluate(const Workbook& wb);
EvalResult evaluate(const Workbook& wb, const DepGraph& graph);

/// Rounds half away from zero on the 15-significant-digit decimal expansion.
std::string format_fixed(double v, int decimals);

std::string display(const CellValue& v, const CellMeta& meta);

}  // namespace sheetaudit
