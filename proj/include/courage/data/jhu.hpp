#pragma once

// Reader and writer for the JHU CSSE US time-series CSVs (wide format: one row
// per county, one column per date, cumulative counts).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "courage/data/csv.hpp"
#include "courage/data/date.hpp"
#include "courage/data/records.hpp"
#include "courage/error.hpp"

namespace courage::data {

struct CountyInfo {
    std::string fips;
    std::string name;       // Admin2
    std::string state_name; // Province_State
    double population = 0.0;

    friend bool operator==(const CountyInfo&, const CountyInfo&) = default;
};

struct JhuData {
    std::vector<Date> dates;
    std::map<std::string, CountyInfo> counties; // by FIPS
    std::vector<DailyRecord> records;            // sorted by (FIPS, date)
    std::vector<std::string> warnings;
};

namespace detail {

inline const std::set<std::string>& jhu_metadata_columns() {
    static const std::set<std::string> cols = {"UID",   "iso2",          "iso3", "code3",        "FIPS", "Admin2",
                                               "Province_State", "Country_Region", "Lat", "Long_", "Combined_Key",
                                               "Population"};
    return cols;
}

/// Normalises "1001", "1001.0" or "01001" to "01001". Empty or non-numeric yields "".
inline std::string normalise_fips(const std::string& raw) {
    if (raw.empty()) return {};
    char* end = nullptr;
    const double v = std::strtod(raw.c_str(), &end);
    if (end == raw.c_str() || *end != '\0' || !std::isfinite(v) || v <= 0 || v != std::floor(v) || v >= 100000) {
        return {};
    }
    char buf[8];
    std::snprintf(buf, sizeof buf, "%05d", static_cast<int>(v));
    return buf;
}

inline double parse_count(const std::string& s, const csv::Reader& r) {
    if (s.empty()) return 0.0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0' || !std::isfinite(v)) r.fail("non-numeric value '" + s + "'");
    return v;
}

struct WideTable {
    std::vector<Date> dates;
    struct Row {
        CountyInfo info;
        std::vector<double> values;
    };
    std::map<std::string, Row> rows;
};

inline WideTable read_wide(std::istream& in, const std::string& source, bool need_population,
                           std::vector<std::string>& warnings) {
    csv::Reader reader(in, source);
    std::vector<std::string> header;
    if (!reader.next(header)) reader.fail("empty file");
    if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);

    const auto fips_col = csv::require_column(header, "FIPS", reader);
    const auto admin_col = csv::require_column(header, "Admin2", reader);
    const auto state_col = csv::require_column(header, "Province_State", reader);
    const auto pop_col = csv::find_column(header, "Population");
    if (need_population && pop_col < 0) reader.fail("missing column 'Population'");

    WideTable table;
    std::vector<std::size_t> date_cols;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (detail::jhu_metadata_columns().count(header[i])) continue;
        auto d = try_parse_us_date(header[i]);
        if (!d) reader.fail("unparseable date header '" + header[i] + "'");
        if (!table.dates.empty() && *d != add_days(table.dates.back(), 1)) {
            reader.fail("date columns are not consecutive at '" + header[i] + "'");
        }
        table.dates.push_back(*d);
        date_cols.push_back(i);
    }
    if (table.dates.empty()) reader.fail("no date columns");

    std::vector<std::string> f;
    while (reader.next(f)) {
        if (f.size() != header.size()) {
            reader.fail("expected " + std::to_string(header.size()) + " fields, found " + std::to_string(f.size()));
        }
        const std::string& state = f[state_col];
        if (!is_mainland(state)) continue;
        const std::string fips = normalise_fips(f[fips_col]);
        if (fips.empty()) {
            warnings.push_back(source + ":" + std::to_string(reader.line()) + ": missing FIPS for '" + f[admin_col] +
                               ", " + state + "', row skipped");
            spdlog::warn("{}", warnings.back());
            continue;
        }
        // 800xx ("Out of <state>") and 900xx ("Unassigned") are bookkeeping rows, not counties.
        if (fips[0] == '8' || fips[0] == '9') continue;

        WideTable::Row row;
        row.info.fips = fips;
        row.info.name = f[admin_col];
        row.info.state_name = state;
        if (pop_col >= 0) row.info.population = parse_count(f[static_cast<std::size_t>(pop_col)], reader);
        row.values.reserve(date_cols.size());
        for (auto c : date_cols) row.values.push_back(parse_count(f[c], reader));
        if (table.rows.count(fips)) {
            warnings.push_back(source + ":" + std::to_string(reader.line()) + ": duplicate FIPS " + fips +
                               ", last row wins");
            spdlog::warn("{}", warnings.back());
        }
        table.rows[fips] = std::move(row);
    }
    return table;
}

} // namespace detail

/// Joins the confirmed-cases and deaths files into per-county daily records for
/// the mainland states. Population comes from the deaths file.
inline JhuData parse_jhu(std::istream& cases, const std::string& cases_source, std::istream& deaths,
                         const std::string& deaths_source) {
    JhuData out;
    auto c = detail::read_wide(cases, cases_source, false, out.warnings);
    auto d = detail::read_wide(deaths, deaths_source, true, out.warnings);
    if (c.dates != d.dates) {
        throw FormatError(cases_source + " and " + deaths_source + " cover different date columns");
    }
    out.dates = c.dates;
    for (auto& [fips, drow] : d.rows) {
        auto it = c.rows.find(fips);
        if (it == c.rows.end()) {
            out.warnings.push_back("FIPS " + fips + " present in deaths but not in cases, skipped");
            spdlog::warn("{}", out.warnings.back());
            continue;
        }
        if (!(drow.info.population > 0)) {
            out.warnings.push_back("FIPS " + fips + " (" + drow.info.name + ") has no population, skipped");
            spdlog::warn("{}", out.warnings.back());
            continue;
        }
        out.counties[fips] = drow.info;
        for (std::size_t t = 0; t < out.dates.size(); ++t) {
            DailyRecord r;
            r.location_id = fips;
            r.date = out.dates[t];
            r.cumulative_cases = it->second.values[t];
            r.cumulative_deaths = drow.values[t];
            r.population = drow.info.population;
            out.records.push_back(std::move(r));
        }
    }
    for (const auto& [fips, row] : c.rows) {
        if (!d.rows.count(fips)) {
            out.warnings.push_back("FIPS " + fips + " present in cases but not in deaths, skipped");
            spdlog::warn("{}", out.warnings.back());
        }
    }
    return out;
}

inline JhuData parse_jhu_files(const std::string& cases_path, const std::string& deaths_path) {
    std::ifstream c(cases_path), d(deaths_path);
    if (!c) throw std::runtime_error("cannot open " + cases_path);
    if (!d) throw std::runtime_error("cannot open " + deaths_path);
    return parse_jhu(c, cases_path, d, deaths_path);
}

/// Writes records back to the two wide CSVs. Inverse of parse_jhu for the columns it reads.
inline void write_jhu(const std::vector<DailyRecord>& records, const std::map<std::string, CountyInfo>& counties,
                      std::ostream& cases, std::ostream& deaths) {
    std::map<std::string, std::map<Date, const DailyRecord*>> by_loc;
    std::set<Date> all_dates;
    for (const auto& r : records) {
        by_loc[r.location_id][r.date] = &r;
        all_dates.insert(r.date);
    }
    std::vector<std::string> head = {"UID", "iso2", "iso3", "code3", "FIPS", "Admin2", "Province_State",
                                     "Country_Region", "Lat", "Long_", "Combined_Key"};
    std::vector<std::string> case_head = head, death_head = head;
    death_head.push_back("Population");
    for (const auto& d : all_dates) {
        case_head.push_back(format_us(d));
        death_head.push_back(format_us(d));
    }
    cases << csv::join(case_head) << "\n";
    deaths << csv::join(death_head) << "\n";

    auto fmt = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    for (const auto& [fips, days] : by_loc) {
        const auto it = counties.find(fips);
        if (it == counties.end()) throw MismatchError("write_jhu: no county info for " + fips);
        const auto& info = it->second;
        std::vector<std::string> base = {"840" + fips, "US", "USA", "840", fips + ".0", info.name, info.state_name, "US",
                                         "0",          "0",  info.name + ", " + info.state_name + ", US"};
        auto crow = base, drow = base;
        drow.push_back(fmt(info.population));
        for (const auto& d : all_dates) {
            const auto rit = days.find(d);
            if (rit == days.end()) throw MismatchError("write_jhu: " + fips + " missing " + format_iso(d));
            crow.push_back(fmt(rit->second->cumulative_cases));
            drow.push_back(fmt(rit->second->cumulative_deaths));
        }
        cases << csv::join(crow) << "\n";
        deaths << csv::join(drow) << "\n";
    }
}

} // namespace courage::data
