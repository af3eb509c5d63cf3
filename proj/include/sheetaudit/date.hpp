#pragma once

#include <compare>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sheetaudit {

inline constexpr int kDefaultPivotYear = 30;

class DateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Date {
    int year = 1970;
    int month = 1;
    int day = 1;

    auto operator<=>(const Date&) const = default;
};

bool is_leap_year(int year);
int days_in_year(int year);
int days_in_month(int year, int month);
bool is_valid_date(int year, int month, int day);

/// Days since 1970-01-01 (proleptic Gregorian).
long days_from_civil(const Date& d);
Date civil_from_days(long days);

/// Spreadsheet day serial: days since 1899-12-30.
double to_serial(const Date& d);

Date add_days(const Date& d, long days);

/// Shape check for dd/mm/yy or dd/mm/yyyy (one or two digit day and month).
/// Does not validate the calendar.
bool looks_like_date(std::string_view text);

/// True when the year field of a date-shaped text has two digits.
bool has_two_digit_year(std::string_view text);

/// Parses dd/mm/yy or dd/mm/yyyy. Two-digit years below the pivot map to the
/// 2000s, the rest to the 1900s. Throws DateError.
Date parse_date(std::string_view text, int pivot = kDefaultPivotYear);

/// Parses "YYYY-MM-DD". Throws DateError.
Date parse_iso_date(std::string_view text);

std::string to_iso(const Date& d);
std::string to_dmy(const Date& d);  // dd/mm/yyyy

Date today_utc();

}  // namespace sheetaudit
