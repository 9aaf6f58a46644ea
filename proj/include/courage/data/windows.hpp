#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "courage/data/series.hpp"
#include "courage/error.hpp"
#include "courage/numerics/matrix.hpp"

namespace courage::data {

/// Feature rows of a window, in order. Population enters as a constant row (log10).
enum Feature : std::size_t {
    NewCases = 0,
    NewDeaths,
    SmoothedCases,
    SmoothedDeaths,
    Retail,
    Grocery,
    Parks,
    Transit,
    Workplaces,
    Residential,
    LogPopulation,
    FeatureCount
};

inline constexpr std::size_t kFeatureCount = FeatureCount;
inline constexpr std::size_t kHorizonDays = 14;

/// One sample: L consecutive days of K features ending at `anchor`, plus the two
/// weekly targets. Targets sum smoothed daily deaths; `truth_*` sum raw daily
/// deaths over the same weeks and `week0_deaths` over the input week.
struct SampleWindow {
    std::string location_id;
    std::string location_name;
    std::string state_code;
    Level level = Level::County;
    Date anchor{};
    Matrix features; // K x L, column j is day anchor - (L - 1) + j
    double target1 = 0.0;
    double target2 = 0.0;
    double truth1 = 0.0;
    double truth2 = 0.0;
    double smoothed_truth1 = 0.0;
    double smoothed_truth2 = 0.0;
    double week0_deaths = 0.0;
    std::uint64_t standardizer_hash = 0; // 0 while unstandardized

    friend bool operator==(const SampleWindow&, const SampleWindow&) = default;
};

struct WindowSpec {
    std::size_t length = 7;
    std::size_t stride = 1;
    /// When set, anchors are first_anchor + k * stride (k >= 0); otherwise the
    /// earliest anchor with a full input week.
    std::optional<Date> first_anchor;
    /// Anchors earlier than this are skipped (the stride lattice is unchanged).
    std::optional<Date> min_anchor;
    /// Anchors later than this are skipped.
    std::optional<Date> max_anchor;
};

/// K x L feature matrix for the L days ending at day index `anchor`.
inline Matrix window_features(const LocationSeries& s, std::size_t anchor, std::size_t length) {
    Matrix f(kFeatureCount, length);
    const double log_pop = std::log10(std::max(s.population, 1.0));
    for (std::size_t j = 0; j < length; ++j) {
        const std::size_t t = anchor + 1 - length + j;
        f(NewCases, j) = s.new_cases[t];
        f(NewDeaths, j) = s.new_deaths[t];
        f(SmoothedCases, j) = s.smoothed_cases[t];
        f(SmoothedDeaths, j) = s.smoothed_deaths[t];
        for (std::size_t k = 0; k < kMobilityCategories; ++k) f(Retail + k, j) = s.mobility[k][t];
        f(LogPopulation, j) = log_pop;
    }
    return f;
}

inline double sum_range(const std::vector<double>& v, std::size_t from, std::size_t to_inclusive) {
    double s = 0.0;
    for (std::size_t t = from; t <= to_inclusive; ++t) s += v[t];
    return s;
}

/// Builds the window anchored at day index `a`. Requires a >= L-1 and a + 14 < days.
inline SampleWindow make_window(const LocationSeries& s, std::size_t a, std::size_t length) {
    SampleWindow w;
    w.location_id = s.id;
    w.location_name = s.name;
    w.state_code = s.state_code;
    w.level = s.level;
    w.anchor = s.date_at(a);
    w.features = window_features(s, a, length);
    w.target1 = sum_range(s.smoothed_deaths, a + 1, a + 7);
    w.target2 = sum_range(s.smoothed_deaths, a + 8, a + 14);
    w.smoothed_truth1 = w.target1;
    w.smoothed_truth2 = w.target2;
    w.truth1 = sum_range(s.new_deaths, a + 1, a + 7);
    w.truth2 = sum_range(s.new_deaths, a + 8, a + 14);
    w.week0_deaths = sum_range(s.new_deaths, a + 1 - 7, a);
    return w;
}

/// Sliding windows over one location. Locations with fewer than L + 14 days
/// contribute nothing.
inline std::vector<SampleWindow> build_windows(const LocationSeries& s, const WindowSpec& spec) {
    if (spec.length == 0 || spec.stride == 0) throw ConfigError("build_windows: length and stride must be positive");
    std::vector<SampleWindow> out;
    const std::size_t n = s.days();
    const std::size_t lookback = std::max<std::size_t>(spec.length, 7);
    if (n < lookback + kHorizonDays) return out;
    const long earliest = static_cast<long>(lookback - 1);
    const long latest = static_cast<long>(n - 1 - kHorizonDays);

    long first = earliest;
    if (spec.first_anchor) {
        first = days_between(s.start, *spec.first_anchor);
        const long stride = static_cast<long>(spec.stride);
        if (first < earliest) first += ((earliest - first + stride - 1) / stride) * stride;
    }
    for (long a = first; a <= latest; a += static_cast<long>(spec.stride)) {
        const Date d = s.date_at(static_cast<std::size_t>(a));
        if (spec.min_anchor && d < *spec.min_anchor) continue;
        if (spec.max_anchor && d > *spec.max_anchor) break;
        out.push_back(make_window(s, static_cast<std::size_t>(a), spec.length));
    }
    return out;
}

inline std::vector<SampleWindow> build_windows(const std::vector<LocationSeries>& all, const WindowSpec& spec) {
    std::vector<SampleWindow> out;
    for (const auto& s : all) {
        auto w = build_windows(s, spec);
        out.insert(out.end(), std::make_move_iterator(w.begin()), std::make_move_iterator(w.end()));
    }
    return out;
}

} // namespace courage::data
