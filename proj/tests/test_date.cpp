#include <doctest.h>

#include "sheetaudit/date.hpp"

using namespace sheetaudit;

TEST_CASE("two-digit years follow the pivot rule") {
    CHECK(parse_date("09/02/15") == Date{2015, 2, 9});
    CHECK(parse_date("03/12/60") == Date{1960, 12, 3});
    CHECK(parse_date("01/01/30") == Date{1930, 1, 1});
    CHECK(parse_date("31/12/29") == Date{2029, 12, 31});
    CHECK(parse_date("09/02/1915") == Date{1915, 2, 9});
    CHECK(parse_date("01/01/30", 50) == Date{2030, 1, 1});
    CHECK(parse_date("01/01/30", 0) == Date{1930, 1, 1});
}

TEST_CASE("parse_date rejects invalid calendar dates") {
    for (const char* bad : {"32/01/2000", "29/02/1900", "00/01/2000", "01/13/2000", "1/1", "aa/bb/cc", "01/01/195"})
        CHECK_THROWS_AS(parse_date(bad), DateError);
    CHECK(parse_date("29/02/2000") == Date{2000, 2, 29});
}

TEST_CASE("leap years") {
    CHECK(is_leap_year(2000));
    CHECK(days_in_year(2000) == 366);
    CHECK_FALSE(is_leap_year(1900));
    CHECK(days_in_year(1900) == 365);
    CHECK(is_leap_year(1996));
    CHECK_FALSE(is_leap_year(2015));
    CHECK(days_in_month(2000, 2) == 29);
    CHECK(days_in_month(2001, 2) == 28);
}

TEST_CASE("serial numbers count days from 30 Dec 1899") {
    CHECK(to_serial({1899, 12, 30}) == 0);
    CHECK(to_serial({1900, 1, 1}) == 2);
    CHECK(to_serial({2000, 1, 1}) == 36526);
    CHECK(to_serial({1996, 3, 31}) - to_serial({1995, 4, 1}) == 365);
}

TEST_CASE("ISO and day-first rendering") {
    CHECK(parse_iso_date("2026-10-15") == Date{2026, 10, 15});
    CHECK_THROWS_AS(parse_iso_date("2026-13-01"), DateError);
    CHECK_THROWS_AS(parse_iso_date("15/10/2026"), DateError);
    CHECK(to_iso({2026, 1, 5}) == "2026-01-05");
    CHECK(to_dmy({1915, 2, 9}) == "09/02/1915");
    CHECK(add_days({2026, 10, 15}, -409) == Date{2025, 9, 1});
}

TEST_CASE("looks_like_date and has_two_digit_year") {
    CHECK(looks_like_date("09/02/15"));
    CHECK(looks_like_date("9/2/1915"));
    CHECK_FALSE(looks_like_date("09/02/915"));
    CHECK_FALSE(looks_like_date("1400"));
    CHECK(has_two_digit_year("09/02/15"));
    CHECK_FALSE(has_two_digit_year("09/02/1915"));
}
