#pragma once

#include <charconv>
#include <chrono>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

#include "courage/error.hpp"

namespace courage {

using Date = std::chrono::sys_days;

namespace detail {

inline std::optional<int> parse_int(std::string_view s) {
    int v = 0;
    if (s.empty()) return std::nullopt;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

inline std::optional<Date> make_date(int y, int m, int d) {
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                          std::chrono::day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return std::nullopt;
    return Date{ymd};
}

} // namespace detail

/// Parses YYYY-MM-DD.
inline std::optional<Date> try_parse_iso_date(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    auto y = detail::parse_int(s.substr(0, 4));
    auto m = detail::parse_int(s.substr(5, 2));
    auto d = detail::parse_int(s.substr(8, 2));
    if (!y || !m || !d) return std::nullopt;
    return detail::make_date(*y, *m, *d);
}

inline Date parse_iso_date(std::string_view s) {
    if (auto d = try_parse_iso_date(s)) return *d;
    throw FormatError("invalid date '" + std::string(s) + "' (expected YYYY-MM-DD)");
}

/// Parses the M/D/YY column headers of the JHU time-series files.
inline std::optional<Date> try_parse_us_date(std::string_view s) {
    const auto a = s.find('/');
    if (a == std::string_view::npos) return std::nullopt;
    const auto b = s.find('/', a + 1);
    if (b == std::string_view::npos) return std::nullopt;
    auto m = detail::parse_int(s.substr(0, a));
    auto d = detail::parse_int(s.substr(a + 1, b - a - 1));
    auto y = detail::parse_int(s.substr(b + 1));
    if (!m || !d || !y) return std::nullopt;
    int year = *y;
    if (s.size() - b - 1 == 2) year += 2000;
    return detail::make_date(year, *m, *d);
}

inline std::string format_iso(Date d) {
    const std::chrono::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()));
    return buf;
}

inline std::string format_us(Date d) {
    const std::chrono::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%u/%u/%02d", static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(ymd.year()) % 100);
    return buf;
}

inline Date add_days(Date d, long n) { return d + std::chrono::days{n}; }

inline long days_between(Date from, Date to) { return (to - from).count(); }

} // namespace courage
