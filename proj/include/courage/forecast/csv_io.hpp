#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "courage/data/csv.hpp"
#include "courage/error.hpp"
#include "courage/forecast/forecast_set.hpp"
#include "courage/forecast/metrics.hpp"

namespace courage::forecast {

/// Shortest text that parses back to the same double.
inline std::string format_number(double v) {
    char buf[32];
    for (int precision = 15; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

inline constexpr const char* kForecastHeader = "model,anchor_date,location_id,location_name,week1_pred,week2_pred";
inline constexpr const char* kReportHeader =
    "model,split,level,horizon,period_start,period_end,mae,n_anchors,n_locations";
inline constexpr const char* kPlotHeader = "date,horizon,target,naive,county,mixup,courage";

inline void write_forecast_csv(std::ostream& os, const std::vector<const ForecastSet*>& sets) {
    os << kForecastHeader << '\n';
    for (const auto* f : sets) {
        for (const auto& e : f->entries) {
            os << csv::join({f->model, format_iso(e.anchor), e.location_id, e.location_name, format_number(e.week1),
                             format_number(e.week2)})
               << '\n';
        }
    }
}

inline void write_forecast_csv(std::ostream& os, const ForecastSet& f) { write_forecast_csv(os, {&f}); }

/// A two-letter location id is a state; anything else is a county FIPS.
inline data::Level level_of_id(const std::string& id) {
    return id.size() == 2 && std::isalpha(static_cast<unsigned char>(id[0])) ? data::Level::State
                                                                               : data::Level::County;
}

/// Reads a forecast CSV back into one set per model, in order of first appearance.
inline std::vector<ForecastSet> read_forecast_csv(std::istream& in, const std::string& source) {
    csv::Reader r(in, source);
    std::vector<std::string> header;
    if (!r.next(header)) r.fail("empty forecast file");
    const auto c_model = csv::require_column(header, "model", r);
    const auto c_anchor = csv::require_column(header, "anchor_date", r);
    const auto c_id = csv::require_column(header, "location_id", r);
    const auto c_name = csv::require_column(header, "location_name", r);
    const auto c_w1 = csv::require_column(header, "week1_pred", r);
    const auto c_w2 = csv::require_column(header, "week2_pred", r);

    std::vector<ForecastSet> out;
    std::map<std::string, std::size_t> index;
    std::vector<std::string> row;
    while (r.next(row)) {
        if (row.size() != header.size()) r.fail("expected " + std::to_string(header.size()) + " fields");
        const auto anchor = try_parse_iso_date(row[c_anchor]);
        if (!anchor) r.fail("bad anchor_date '" + row[c_anchor] + "'");
        const auto number = [&](std::size_t c) {
            char* end = nullptr;
            const double v = std::strtod(row[c].c_str(), &end);
            if (row[c].empty() || end != row[c].c_str() + row[c].size() || !std::isfinite(v)) {
                r.fail("bad number '" + row[c] + "' in column " + header[c]);
            }
            return v;
        };
        ForecastEntry e{*anchor, row[c_id], row[c_name], "", number(c_w1), number(c_w2)};
        const auto level = level_of_id(e.location_id);
        if (level == data::Level::State) {
            e.state_code = e.location_id;
        } else if (const auto* s = data::state_by_fips_prefix(e.location_id)) {
            e.state_code = std::string(s->code);
        }
        auto [it, fresh] = index.try_emplace(row[c_model], out.size());
        if (fresh) out.push_back({row[c_model], level, {}});
        auto& set = out[it->second];
        if (set.level != level) r.fail("model " + set.model + " mixes county and state rows");
        set.entries.push_back(std::move(e));
    }
    for (auto& f : out) {
        f.sort();
        for (std::size_t i = 1; i < f.entries.size(); ++i) {
            const auto& a = f.entries[i - 1];
            const auto& b = f.entries[i];
            if (a.anchor == b.anchor && a.location_id == b.location_id) {
                throw FormatError(source + ": duplicate row for " + f.model + " " + b.location_id + "@" +
                                  format_iso(b.anchor));
            }
        }
    }
    return out;
}

inline std::vector<ForecastSet> read_forecast_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_forecast_csv(in, path);
}

inline void write_report_csv(std::ostream& os, const EvalReport& report) {
    os << kReportHeader << '\n';
    for (const auto& row : report.rows) {
        os << csv::join({row.model, row.split, data::to_string(row.level), std::to_string(row.horizon),
                         format_iso(row.period.start), format_iso(row.period.end),
                         row.mae ? format_number(*row.mae) : std::string(), std::to_string(row.n_anchors),
                         std::to_string(row.n_locations)})
           << '\n';
    }
}

/// Forecasts for one location from up to four models; null pointers leave their column empty.
struct PlotSources {
    const ForecastSet* naive = nullptr;
    const ForecastSet* county = nullptr;
    const ForecastSet* mixup = nullptr;
    const ForecastSet* courage = nullptr;
};

/// One row per (anchor, horizon) for `location_id`, over anchors that have truth.
inline void write_plot_csv(std::ostream& os, const std::string& location_id, const Truth& truth,
                           const PlotSources& src) {
    os << kPlotHeader << '\n';
    const auto cell = [](const ForecastSet* f, Date anchor, const std::string& id, int h) -> std::string {
        if (!f) return {};
        const auto* e = f->find(anchor, id);
        if (!e) return {};
        return format_number(h == 1 ? e->week1 : e->week2);
    };
    for (const auto& [key, values] : truth) {
        if (key.second != location_id) continue;
        for (int h = 1; h <= 2; ++h) {
            os << csv::join({format_iso(key.first), std::to_string(h), format_number(values[static_cast<std::size_t>(h - 1)]),
                             cell(src.naive, key.first, location_id, h), cell(src.county, key.first, location_id, h),
                             cell(src.mixup, key.first, location_id, h), cell(src.courage, key.first, location_id, h)})
               << '\n';
        }
    }
}

} // namespace courage::forecast
