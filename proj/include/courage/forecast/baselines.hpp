#pragma once

#include <algorithm>
#include <iterator>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "courage/data/series.hpp"
#include "courage/data/windows.hpp"
#include "courage/error.hpp"
#include "courage/forecast/forecast_set.hpp"

namespace courage::forecast {

/// Bottom-up state forecasts. Each state value is 0.0 + c1 + c2 + ... over its
/// counties in ascending FIPS order, so reruns are bit-identical.
inline ForecastSet aggregate_to_state(const ForecastSet& counties) {
    if (counties.level != data::Level::County) throw ConfigError("aggregate_to_state: input must be county-level");
    std::map<std::pair<Date, std::string>, std::vector<const ForecastEntry*>> groups;
    for (const auto& e : counties.entries) groups[{e.anchor, owning_state(e)}].push_back(&e);

    ForecastSet out{counties.model, data::Level::State, {}};
    out.entries.reserve(groups.size());
    for (auto& [key, members] : groups) {
        std::sort(members.begin(), members.end(),
                  [](const ForecastEntry* a, const ForecastEntry* b) { return a->location_id < b->location_id; });
        ForecastEntry s;
        s.anchor = key.first;
        s.location_id = key.second;
        s.state_code = key.second;
        s.location_name = std::string(data::state_by_code(key.second)->name);
        for (const auto* c : members) {
            s.week1 += c->week1;
            s.week2 += c->week2;
        }
        out.entries.push_back(std::move(s));
    }
    out.sort();
    return out;
}

/// Sum of raw daily deaths over the 7 days ending at `anchor`, or nothing when
/// the series does not cover that week.
inline std::optional<double> week0_deaths(const data::LocationSeries& s, Date anchor) {
    const auto a = s.index_of(anchor);
    if (!a || *a < 6) return std::nullopt;
    return data::sum_range(s.new_deaths, *a - 6, *a);
}

/// Persistence baseline: the Week-0 reported total copied to both horizons.
inline ForecastSet naive_forecast(const std::vector<data::LocationSeries>& series, const std::vector<Date>& anchors,
                                  data::Level level = data::Level::County, std::string model = "Naive") {
    ForecastSet out{std::move(model), level, {}};
    for (const auto& s : series) {
        if (s.level != level) continue;
        for (const Date anchor : anchors) {
            const auto w0 = week0_deaths(s, anchor);
            if (!w0) continue;
            out.entries.push_back({anchor, s.id, s.name, s.state_code, *w0, *w0});
        }
    }
    out.sort();
    return out;
}

inline ForecastSet naive_forecast(const std::vector<data::LocationSeries>& series, Date anchor,
                                  data::Level level = data::Level::County) {
    return naive_forecast(series, std::vector<Date>{anchor}, level);
}

namespace detail {

inline std::string describe_keys(const std::vector<ForecastKey>& keys, std::size_t limit = 5) {
    std::string out;
    for (std::size_t i = 0; i < keys.size() && i < limit; ++i) {
        if (i) out += ", ";
        out += keys[i].second + "@" + format_iso(keys[i].first);
    }
    if (keys.size() > limit) out += ", ... (" + std::to_string(keys.size()) + " total)";
    return out;
}

} // namespace detail

/// Throws MismatchError naming the keys present in only one of the two sets.
inline void require_same_keys(const ForecastSet& a, const ForecastSet& b) {
    const auto ka = a.keys();
    const auto kb = b.keys();
    if (ka == kb) return;
    std::vector<ForecastKey> only_a;
    std::vector<ForecastKey> only_b;
    std::set_difference(ka.begin(), ka.end(), kb.begin(), kb.end(), std::back_inserter(only_a));
    std::set_difference(kb.begin(), kb.end(), ka.begin(), ka.end(), std::back_inserter(only_b));
    std::string msg = "forecast sets '" + a.model + "' and '" + b.model + "' cover different keys";
    if (!only_a.empty()) msg += "; only in " + a.model + ": " + detail::describe_keys(only_a);
    if (!only_b.empty()) msg += "; only in " + b.model + ": " + detail::describe_keys(only_b);
    throw MismatchError(msg);
}

/// Elementwise mean of two forecast sets over identical keys.
inline ForecastSet ensemble_average(const ForecastSet& a, const ForecastSet& b, std::string model = "COURAGE") {
    if (a.level != b.level) throw MismatchError("ensemble_average: level mismatch");
    require_same_keys(a, b);
    ForecastSet out{std::move(model), a.level, a.entries};
    for (std::size_t i = 0; i < out.entries.size(); ++i) {
        out.entries[i].week1 = 0.5 * (a.entries[i].week1 + b.entries[i].week1);
        out.entries[i].week2 = 0.5 * (a.entries[i].week2 + b.entries[i].week2);
    }
    return out;
}

} // namespace courage::forecast
