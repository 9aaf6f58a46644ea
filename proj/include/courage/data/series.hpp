#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "courage/data/jhu.hpp"
#include "courage/data/records.hpp"
#include "courage/error.hpp"

namespace courage::data {

/// Trailing 7-day mean; the window is shorter at the start of the series.
inline std::vector<double> smooth7(std::span<const double> series) {
    std::vector<double> out(series.size());
    for (std::size_t t = 0; t < series.size(); ++t) {
        const std::size_t from = t >= 6 ? t - 6 : 0;
        double s = 0.0;
        for (std::size_t k = from; k <= t; ++k) s += series[k];
        out[t] = s / static_cast<double>(t - from + 1);
    }
    return out;
}

/// First difference of a cumulative series. Day 0 has no predecessor and gets 0.
/// Negative differences (upstream revisions) are clamped to 0.
inline std::vector<double> daily_from_cumulative(std::span<const double> cumulative) {
    std::vector<double> out(cumulative.size(), 0.0);
    for (std::size_t t = 1; t < cumulative.size(); ++t) out[t] = std::max(0.0, cumulative[t] - cumulative[t - 1]);
    return out;
}

/// Forward-fills each missing cell from the last observation up to `max_gap`
/// days later; anything else becomes 0 (no change from baseline).
inline std::vector<double> impute_forward(const std::vector<std::optional<double>>& cells, std::size_t max_gap = 14) {
    std::vector<double> out(cells.size(), 0.0);
    std::optional<double> last;
    std::size_t since = 0;
    for (std::size_t t = 0; t < cells.size(); ++t) {
        if (cells[t]) {
            last = cells[t];
            since = 0;
            out[t] = *cells[t];
        } else {
            ++since;
            out[t] = (last && since <= max_gap) ? *last : 0.0;
        }
    }
    return out;
}

/// Per-location daily series after cleaning, ready for window construction.
struct LocationSeries {
    std::string id;         // FIPS or state postal code
    std::string name;       // county or state name
    std::string state_code; // owning state (itself for states)
    Level level = Level::County;
    Date start{};
    double population = 0.0;
    std::vector<double> cumulative_cases;
    std::vector<double> cumulative_deaths;
    std::vector<double> new_cases;
    std::vector<double> new_deaths;
    std::vector<double> smoothed_cases;
    std::vector<double> smoothed_deaths;
    std::array<std::vector<double>, kMobilityCategories> mobility;

    [[nodiscard]] std::size_t days() const noexcept { return new_deaths.size(); }
    [[nodiscard]] Date date_at(std::size_t t) const { return add_days(start, static_cast<long>(t)); }
    [[nodiscard]] std::optional<std::size_t> index_of(Date d) const {
        const long i = days_between(start, d);
        if (i < 0 || static_cast<std::size_t>(i) >= days()) return std::nullopt;
        return static_cast<std::size_t>(i);
    }

    friend bool operator==(const LocationSeries&, const LocationSeries&) = default;
};

/// Fills the derived arrays from cumulative counts.
inline void derive_counts(LocationSeries& s) {
    s.new_cases = daily_from_cumulative(s.cumulative_cases);
    s.new_deaths = daily_from_cumulative(s.cumulative_deaths);
    s.smoothed_cases = smooth7(s.new_cases);
    s.smoothed_deaths = smooth7(s.new_deaths);
}

/// Groups county records into cleaned series (ascending FIPS). Every county must
/// cover the same consecutive date range.
inline std::vector<LocationSeries> build_county_series(const std::vector<DailyRecord>& records,
                                                       const std::map<std::string, CountyInfo>& counties) {
    std::map<std::string, std::vector<const DailyRecord*>> grouped;
    for (const auto& r : records) grouped[r.location_id].push_back(&r);

    std::vector<LocationSeries> out;
    for (auto& [fips, recs] : grouped) {
        std::sort(recs.begin(), recs.end(), [](const auto* a, const auto* b) { return a->date < b->date; });
        for (std::size_t i = 1; i < recs.size(); ++i) {
            if (recs[i]->date != add_days(recs[i - 1]->date, 1)) {
                throw FormatError("county " + fips + ": records are not consecutive days at " +
                                  format_iso(recs[i]->date));
            }
        }
        const auto info = counties.find(fips);
        if (info == counties.end()) throw MismatchError("county " + fips + " has no metadata");
        const auto* state = state_by_name(info->second.state_name);
        if (!state) throw MismatchError("county " + fips + " has unknown state '" + info->second.state_name + "'");

        LocationSeries s;
        s.id = fips;
        s.name = info->second.name;
        s.state_code = std::string(state->code);
        s.level = Level::County;
        s.start = recs.front()->date;
        s.population = recs.front()->population;
        std::array<std::vector<std::optional<double>>, kMobilityCategories> cells;
        for (const auto* r : recs) {
            s.cumulative_cases.push_back(r->cumulative_cases);
            s.cumulative_deaths.push_back(r->cumulative_deaths);
            for (std::size_t k = 0; k < kMobilityCategories; ++k) cells[k].push_back(r->mobility[k]);
        }
        derive_counts(s);
        for (std::size_t k = 0; k < kMobilityCategories; ++k) s.mobility[k] = impute_forward(cells[k]);
        out.push_back(std::move(s));
    }
    return out;
}

/// State series: summed cumulative counts and population, population-weighted
/// mean of (imputed) county mobility. Counties are summed in ascending FIPS order.
inline std::vector<LocationSeries> aggregate_states(const std::vector<LocationSeries>& counties) {
    std::map<std::string, std::vector<const LocationSeries*>> by_state;
    for (const auto& c : counties) {
        if (c.level != Level::County) continue;
        by_state[c.state_code].push_back(&c);
    }
    std::vector<LocationSeries> out;
    for (auto& [code, members] : by_state) {
        std::sort(members.begin(), members.end(), [](const auto* a, const auto* b) { return a->id < b->id; });
        const auto* first = members.front();
        const auto* info = state_by_code(code);
        LocationSeries s;
        s.id = code;
        s.name = info ? std::string(info->name) : code;
        s.state_code = code;
        s.level = Level::State;
        s.start = first->start;
        const std::size_t n = first->days();
        s.cumulative_cases.assign(n, 0.0);
        s.cumulative_deaths.assign(n, 0.0);
        for (auto& m : s.mobility) m.assign(n, 0.0);
        for (const auto* c : members) {
            if (c->start != first->start || c->days() != n) {
                throw MismatchError("aggregate_states: county " + c->id + " covers a different date range");
            }
            s.population += c->population;
            for (std::size_t t = 0; t < n; ++t) {
                s.cumulative_cases[t] += c->cumulative_cases[t];
                s.cumulative_deaths[t] += c->cumulative_deaths[t];
                for (std::size_t k = 0; k < kMobilityCategories; ++k) s.mobility[k][t] += c->population * c->mobility[k][t];
            }
        }
        for (auto& m : s.mobility)
            for (auto& v : m) v /= s.population;
        derive_counts(s);
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace courage::data
