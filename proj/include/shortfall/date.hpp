#pragma once

#include <chrono>
#include <compare>
#include <string>
#include <string_view>

namespace shortfall {

/// Calendar date without time zone. Thin wrapper over `sys_days` so that
/// ordering and day arithmetic are exact integers.
class Date {
public:
    constexpr Date() = default;
    constexpr explicit Date(std::chrono::sys_days days) : days_(days) {}
    Date(int year, unsigned month, unsigned day);

    /// Parses `YYYY-MM-DD`. Throws ParseError on malformed or invalid dates.
    static Date parse(std::string_view text);

    std::string to_string() const;

    std::chrono::sys_days days() const { return days_; }
    std::chrono::year_month_day ymd() const { return std::chrono::year_month_day{days_}; }
    int year() const;
    unsigned month() const;

    /// ISO-8601 week key (iso_year * 100 + iso_week).
    int iso_week_key() const;

    friend constexpr auto operator<=>(const Date&, const Date&) = default;
    friend constexpr bool operator==(const Date&, const Date&) = default;

private:
    std::chrono::sys_days days_{};
};

}  // namespace shortfall
