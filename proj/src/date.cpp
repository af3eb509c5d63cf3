#include "sheetaudit/date.hpp"

#include <chrono>
#include <cstdio>

namespace sheetaudit {

bool is_leap_year(int year) {
    return year % 4 == 0 && (year % 100 != 0 || year % 400 == 0);
}

int days_in_year(int year) { return is_leap_year(year) ? 366 : 365; }

int days_in_month(int year, int month) {
    static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month < 1 || month > 12)
        return 0;
    return month == 2 && is_leap_year(year) ? 29 : kDays[month - 1];
}

bool is_valid_date(int year, int month, int day) {
    return month >= 1 && month <= 12 && day >= 1 && day <= days_in_month(year, month);
}

// Howard Hinnant's days_from_civil / civil_from_days.
long days_from_civil(const Date& d) {
    long y = d.year - (d.month <= 2 ? 1 : 0);
    long era = (y >= 0 ? y : y - 399) / 400;
    long yoe = y - era * 400;
    long m = d.month;
    long doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d.day - 1;
    long doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + doe - 719468;
}

Date civil_from_days(long z) {
    z += 719468;
    long era = (z >= 0 ? z : z - 146096) / 146097;
    long doe = z - era * 146097;
    long yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    long y = yoe + era * 400;
    long doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    long mp = (5 * doy + 2) / 153;
    long d = doy - (153 * mp + 2) / 5 + 1;
    long m = mp + (mp < 10 ? 3 : -9);
    return {static_cast<int>(y + (m <= 2 ? 1 : 0)), static_cast<int>(m), static_cast<int>(d)};
}

double to_serial(const Date& d) {
    static const long kEpoch = days_from_civil({1899, 12, 30});
    return static_cast<double>(days_from_civil(d) - kEpoch);
}

Date add_days(const Date& d, long days) { return civil_from_days(days_from_civil(d) + days); }

namespace {

struct DateFields {
    int day = 0;
    int month = 0;
    int year = 0;
    int year_digits = 0;
};

bool split_date(std::string_view text, DateFields& out) {
    int field[3] = {0, 0, 0};
    int digits[3] = {0, 0, 0};
    int k = 0;
    for (char c : text) {
        if (c == '/') {
            if (++k > 2)
                return false;
        } else if (c >= '0' && c <= '9') {
            field[k] = field[k] * 10 + (c - '0');
            ++digits[k];
        } else {
            return false;
        }
    }
    if (k != 2 || digits[0] < 1 || digits[0] > 2 || digits[1] < 1 || digits[1] > 2)
        return false;
    if (digits[2] != 2 && digits[2] != 4)
        return false;
    out = {field[0], field[1], field[2], digits[2]};
    return true;
}

}  // namespace

bool looks_like_date(std::string_view text) {
    DateFields f;
    return split_date(text, f);
}

bool has_two_digit_year(std::string_view text) {
    DateFields f;
    return split_date(text, f) && f.year_digits == 2;
}

Date parse_date(std::string_view text, int pivot) {
    DateFields f;
    if (!split_date(text, f))
        throw DateError("not a dd/mm/yy or dd/mm/yyyy date: '" + std::string(text) + "'");
    int year = f.year;
    if (f.year_digits == 2)
        year += f.year < pivot ? 2000 : 1900;
    if (!is_valid_date(year, f.month, f.day))
        throw DateError("invalid day or month in '" + std::string(text) + "'");
    return {year, f.month, f.day};
}

Date parse_iso_date(std::string_view text) {
    auto digits = [&](std::size_t pos, std::size_t n, int& out) {
        out = 0;
        for (std::size_t i = pos; i < pos + n; ++i) {
            if (i >= text.size() || text[i] < '0' || text[i] > '9')
                return false;
            out = out * 10 + (text[i] - '0');
        }
        return true;
    };
    int y, m, d;
    if (text.size() != 10 || text[4] != '-' || text[7] != '-' || !digits(0, 4, y) || !digits(5, 2, m) ||
        !digits(8, 2, d))
        throw DateError("expected YYYY-MM-DD, got '" + std::string(text) + "'");
    if (!is_valid_date(y, m, d))
        throw DateError("invalid date '" + std::string(text) + "'");
    return {y, m, d};
}

std::string to_iso(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", d.year, d.month, d.day);
    return buf;
}

std::string to_dmy(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02d/%02d/%04d", d.day, d.month, d.year);
    return buf;
}

Date today_utc() {
    using namespace std::chrono;
    auto days = duration_cast<duration<long, std::ratio<86400>>>(system_clock::now().time_since_epoch());
    return civil_from_days(days.count());
}

}  // namespace sheetaudit
