#pragma once

// Google Community Mobility Report reader (long format, one row per region-day).

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "courage/data/csv.hpp"
#include "courage/data/date.hpp"
#include "courage/data/jhu.hpp"
#include "courage/data/records.hpp"

namespace courage::data {

struct MobilityTable {
    std::map<std::string, std::map<Date, MobilityRow>> by_fips;
    std::vector<std::string> warnings;
    std::size_t dropped_rows = 0;
};

namespace detail {

inline std::string strip_county_suffix(std::string name) {
    for (const char* suffix : {" County", " Parish", " Borough", " Census Area", " City and Borough", " Municipality"}) {
        const std::string s(suffix);
        if (name.size() > s.size() && name.compare(name.size() - s.size(), s.size(), s) == 0) {
            return name.substr(0, name.size() - s.size());
        }
    }
    return name;
}

inline std::optional<double> parse_cell(const std::string& s, const csv::Reader& r) {
    if (s.empty()) return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0' || !std::isfinite(v)) r.fail("non-numeric mobility value '" + s + "'");
    return v;
}

} // namespace detail

/// Parses US county rows. Rows are joined to FIPS through census_fips_code when
/// present, otherwise through (state, county name) against `counties`.
/// Values are stored as published (percent change, negative = decrease).
inline MobilityTable parse_mobility(std::istream& in, const std::string& source,
                                    const std::map<std::string, CountyInfo>& counties) {
    csv::Reader reader(in, source);
    std::vector<std::string> header;
    if (!reader.next(header)) reader.fail("empty file");
    if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);

    const auto country_col = csv::require_column(header, "country_region_code", reader);
    const auto sub1_col = csv::require_column(header, "sub_region_1", reader);
    const auto sub2_col = csv::require_column(header, "sub_region_2", reader);
    const auto date_col = csv::require_column(header, "date", reader);
    const auto fips_col = csv::find_column(header, "census_fips_code");
    const auto metro_col = csv::find_column(header, "metro_area");
    std::array<std::size_t, kMobilityCategories> value_cols{};
    for (std::size_t k = 0; k < kMobilityCategories; ++k) {
        value_cols[k] = csv::require_column(header, kMobilityColumns[k], reader);
    }

    std::map<std::pair<std::string, std::string>, std::string> by_name;
    for (const auto& [fips, info] : counties) by_name[{info.state_name, detail::strip_county_suffix(info.name)}] = fips;

    MobilityTable out;
    std::vector<std::string> f;
    while (reader.next(f)) {
        if (f.size() != header.size()) {
            reader.fail("expected " + std::to_string(header.size()) + " fields, found " + std::to_string(f.size()));
        }
        if (f[country_col] != "US") continue;
        if (f[sub2_col].empty()) continue; // state or national aggregate
        if (metro_col >= 0 && !f[static_cast<std::size_t>(metro_col)].empty()) continue;
        if (!is_mainland(f[sub1_col])) continue;

        std::string fips;
        if (fips_col >= 0) fips = detail::normalise_fips(f[static_cast<std::size_t>(fips_col)]);
        if (fips.empty()) {
            const auto it = by_name.find({f[sub1_col], detail::strip_county_suffix(f[sub2_col])});
            if (it != by_name.end()) fips = it->second;
        }
        if (fips.empty() || (!counties.empty() && !counties.count(fips))) {
            ++out.dropped_rows;
            out.warnings.push_back(source + ":" + std::to_string(reader.line()) + ": unmatched region '" +
                                   f[sub2_col] + ", " + f[sub1_col] + "', dropped");
            spdlog::debug("{}", out.warnings.back());
            continue;
        }
        const auto date = try_parse_iso_date(f[date_col]);
        if (!date) reader.fail("invalid date '" + f[date_col] + "'");

        MobilityRow row;
        for (std::size_t k = 0; k < kMobilityCategories; ++k) row[k] = detail::parse_cell(f[value_cols[k]], reader);
        auto& slot = out.by_fips[fips];
        if (slot.count(*date)) {
            out.warnings.push_back(source + ":" + std::to_string(reader.line()) + ": duplicate row for " + fips + " on " +
                                   format_iso(*date) + ", last wins");
            spdlog::warn("{}", out.warnings.back());
        }
        slot[*date] = row;
    }
    if (out.dropped_rows > 0) spdlog::info("{}: {} unmatched mobility rows dropped", source, out.dropped_rows);
    return out;
}

inline MobilityTable parse_mobility_file(const std::string& path, const std::map<std::string, CountyInfo>& counties) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return parse_mobility(in, path, counties);
}

/// Copies mobility cells onto matching records (FIPS + date).
inline void attach_mobility(std::vector<DailyRecord>& records, const MobilityTable& table) {
    for (auto& r : records) {
        const auto loc = table.by_fips.find(r.location_id);
        if (loc == table.by_fips.end()) continue;
        const auto day = loc->second.find(r.date);
        if (day != loc->second.end()) r.mobility = day->second;
    }
}

/// Minimal long-format writer (the columns parse_mobility reads).
inline void write_mobility(const MobilityTable& table, const std::map<std::string, CountyInfo>& counties,
                           std::ostream& out) {
    std::vector<std::string> head = {"country_region_code", "country_region", "sub_region_1", "sub_region_2",
                                     "metro_area",          "iso_3166_2_code", "census_fips_code", "place_id", "date"};
    for (auto c : kMobilityColumns) head.emplace_back(c);
    out << csv::join(head) << "\n";
    for (const auto& [fips, days] : table.by_fips) {
        const auto it = counties.find(fips);
        const std::string county = it == counties.end() ? "" : it->second.name + " County";
        const std::string state = it == counties.end() ? "" : it->second.state_name;
        for (const auto& [date, row] : days) {
            std::vector<std::string> f = {"US", "United States", state, county, "", "", fips, "", format_iso(date)};
            for (const auto& v : row) {
                if (!v) {
                    f.emplace_back();
                    continue;
                }
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.17g", *v);
                f.emplace_back(buf);
            }
            out << csv::join(f) << "\n";
        }
    }
}

} // namespace courage::data
