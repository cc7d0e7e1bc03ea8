#include "shortfall/date.hpp"

#include <charconv>
#include <cstdio>

#include "shortfall/errors.hpp"

namespace shortfall {

using namespace std::chrono;

namespace {

template <typename T>
bool parse_digits(std::string_view text, T& out) {
    for (char c : text) {
        if (c < '0' || c > '9') return false;
    }
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc{} && ptr == text.data() + text.size();
}

}  // namespace

Date::Date(int year, unsigned month, unsigned day) {
    year_month_day ymd{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
    if (!ymd.ok()) {
        throw ParseError("invalid calendar date " + std::to_string(year) + "-" +
                         std::to_string(month) + "-" + std::to_string(day));
    }
    days_ = sys_days{ymd};
}

Date Date::parse(std::string_view text) {
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    if (text.size() != 10 || text[4] != '-' || text[7] != '-' ||
        !parse_digits(text.substr(0, 4), y) || !parse_digits(text.substr(5, 2), m) ||
        !parse_digits(text.substr(8, 2), d)) {
        throw ParseError("expected ISO date YYYY-MM-DD, got '" + std::string(text) + "'");
    }
    return Date(y, m, d);
}

std::string Date::to_string() const {
    const auto v = ymd();
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(v.year()),
                  static_cast<unsigned>(v.month()), static_cast<unsigned>(v.day()));
    return buf;
}

int Date::year() const { return static_cast<int>(ymd().year()); }

unsigned Date::month() const { return static_cast<unsigned>(ymd().month()); }

int Date::iso_week_key() const {
    // The ISO year is the year of the Thursday in the same Monday-based week.
    const weekday wd{days_};
    const int offset_from_monday = static_cast<int>(wd.iso_encoding()) - 1;
    const sys_days thursday = days_ - std::chrono::days{offset_from_monday} + std::chrono::days{3};
    const int iso_year = static_cast<int>(year_month_day{thursday}.year());
    const sys_days jan1{std::chrono::year{iso_year} / January / 1};
    const int week = static_cast<int>((thursday - jan1).count() / 7) + 1;
    return iso_year * 100 + week;
}

}  // namespace shortfall
