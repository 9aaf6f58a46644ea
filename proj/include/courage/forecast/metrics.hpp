#pragma once

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "courage/data/series.hpp"
#include "courage/data/windows.hpp"
#include "courage/error.hpp"
#include "courage/forecast/forecast_set.hpp"

namespace courage::forecast {

enum class TruthKind { Raw, Smoothed };

/// Observed Week-1 / Week-2 totals keyed by (anchor, location).
using Truth = std::map<ForecastKey, std::array<double, 2>>;

/// Weekly totals following each anchor. Anchors without two full weeks of data
/// after them are left out.
inline Truth build_truth(const std::vector<data::LocationSeries>& series, const std::vector<Date>& anchors,
                         TruthKind kind = TruthKind::Raw) {
    Truth out;
    for (const auto& s : series) {
        const auto& daily = kind == TruthKind::Raw ? s.new_deaths : s.smoothed_deaths;
        for (const Date anchor : anchors) {
            const auto a = s.index_of(anchor);
            if (!a || *a + data::kHorizonDays >= s.days()) continue;
            out[{anchor, s.id}] = {data::sum_range(daily, *a + 1, *a + 7), data::sum_range(daily, *a + 8, *a + 14)};
        }
    }
    return out;
}

/// first, first + stride, ... up to and including last.
inline std::vector<Date> anchor_range(Date first, Date last, std::size_t stride = 1) {
    if (stride == 0) throw ConfigError("anchor_range: stride must be positive");
    std::vector<Date> out;
    for (Date d = first; d <= last; d = add_days(d, static_cast<long>(stride))) out.push_back(d);
    return out;
}

struct MaeResult {
    std::array<double, 2> mae{};
    std::size_t n_pairs = 0;
    std::size_t n_anchors = 0;
    std::size_t n_locations = 0;
};

namespace detail {

template <class Pred>
MaeResult mae_where(const ForecastSet& f, const Truth& truth, Pred keep) {
    MaeResult r;
    std::array<double, 2> total{};
    std::set<Date> anchors;
    std::set<std::string> locations;
    for (const auto& e : f.entries) {
        if (!keep(e)) continue;
        const auto it = truth.find({e.anchor, e.location_id});
        if (it == truth.end()) {
            throw MismatchError("mae: no truth for " + e.location_id + "@" + format_iso(e.anchor) + " (" + f.model + ")");
        }
        total[0] += std::abs(e.week1 - it->second[0]);
        total[1] += std::abs(e.week2 - it->second[1]);
        ++r.n_pairs;
        anchors.insert(e.anchor);
        locations.insert(e.location_id);
    }
    if (r.n_pairs > 0) {
        r.mae[0] = total[0] / static_cast<double>(r.n_pairs);
        r.mae[1] = total[1] / static_cast<double>(r.n_pairs);
    }
    r.n_anchors = anchors.size();
    r.n_locations = locations.size();
    return r;
}

} // namespace detail

/// Mean absolute error per horizon over every entry of `f`.
inline MaeResult mae(const ForecastSet& f, const Truth& truth) {
    return detail::mae_where(f, truth, [](const ForecastEntry&) { return true; });
}

struct Period {
    Date start{};
    Date end{}; // inclusive

    [[nodiscard]] bool contains(Date d) const { return start <= d && d <= end; }
    friend bool operator==(const Period&, const Period&) = default;
};

inline std::vector<Period> default_periods() {
    const auto p = [](const char* a, const char* b) { return Period{parse_iso_date(a), parse_iso_date(b)}; };
    return {p("2020-08-23", "2020-09-24"), p("2020-09-25", "2020-10-28"), p("2020-10-29", "2020-12-01"),
            p("2020-12-02", "2021-01-17"), p("2021-01-18", "2021-03-14")};
}

inline void validate_periods(const std::vector<Period>& periods) {
    for (std::size_t i = 0; i < periods.size(); ++i) {
        if (periods[i].end < periods[i].start) {
            throw ConfigError("period " + format_iso(periods[i].start) + ".." + format_iso(periods[i].end) + " is reversed");
        }
        if (i > 0 && periods[i].start <= periods[i - 1].end) {
            throw ConfigError("periods must be sorted and non-overlapping (at " + format_iso(periods[i].start) + ")");
        }
    }
}

struct ReportRow {
    std::string model;
    std::string split;
    data::Level level = data::Level::County;
    int horizon = 1;
    Period period;
    std::optional<double> mae; // empty when the period holds no anchors
    std::size_t n_anchors = 0;
    std::size_t n_locations = 0;
};

struct EvalReport {
    std::vector<ReportRow> rows;
    /// Per model: entries whose anchor fell outside every period.
    std::map<std::string, std::size_t> excluded;
};

/// MAE per (model, horizon, period). Rows are ordered by model (input order),
/// then period, then horizon.
inline EvalReport evaluate_periods(const std::vector<ForecastSet>& sets, const Truth& truth,
                                   const std::vector<Period>& periods, const std::string& split = "") {
    validate_periods(periods);
    EvalReport report;
    for (const auto& f : sets) {
        std::size_t outside = 0;
        for (const auto& e : f.entries) {
            bool hit = false;
            for (const auto& p : periods) hit = hit || p.contains(e.anchor);
            if (!hit) ++outside;
        }
        report.excluded[f.model] += outside;
        for (const auto& p : periods) {
            const auto r = detail::mae_where(f, truth, [&](const ForecastEntry& e) { return p.contains(e.anchor); });
            for (int h = 1; h <= 2; ++h) {
                ReportRow row{f.model, split, f.level, h, p, std::nullopt, r.n_anchors, r.n_locations};
                if (r.n_pairs > 0) row.mae = r.mae[static_cast<std::size_t>(h - 1)];
                report.rows.push_back(std::move(row));
            }
        }
    }
    return report;
}

} // namespace courage::forecast
