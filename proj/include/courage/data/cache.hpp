#pragma once

// Binary cache of cleaned location series. Windows are rebuilt from it
// deterministically, so ingest runs once per data snapshot.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "courage/data/series.hpp"
#include "courage/util/binary_io.hpp"
#include "courage/util/hash.hpp"

namespace courage::data {

inline constexpr char kCacheMagic[9] = "CRGSER01";
inline constexpr std::uint32_t kCacheVersion = 1;

struct SeriesCache {
    std::vector<LocationSeries> counties;
    std::vector<LocationSeries> states;

    [[nodiscard]] Date first_date() const { return counties.empty() ? Date{} : counties.front().start; }
    [[nodiscard]] Date last_date() const {
        return counties.empty() ? Date{} : counties.front().date_at(counties.front().days() - 1);
    }

    friend bool operator==(const SeriesCache&, const SeriesCache&) = default;
};

namespace detail {

inline void write_series(io::BinaryWriter& w, const LocationSeries& s) {
    w.str(s.id);
    w.str(s.name);
    w.str(s.state_code);
    w.u8(s.level == Level::County ? 0 : 1);
    w.i64(s.start.time_since_epoch().count());
    w.f64(s.population);
    w.f64s(s.cumulative_cases);
    w.f64s(s.cumulative_deaths);
    w.f64s(s.new_cases);
    w.f64s(s.new_deaths);
    w.f64s(s.smoothed_cases);
    w.f64s(s.smoothed_deaths);
    for (const auto& m : s.mobility) w.f64s(m);
}

inline LocationSeries read_series(io::BinaryReader& r) {
    LocationSeries s;
    s.id = r.str();
    s.name = r.str();
    s.state_code = r.str();
    s.level = r.u8() == 0 ? Level::County : Level::State;
    s.start = Date{std::chrono::days{r.i64()}};
    s.population = r.f64();
    s.cumulative_cases = r.f64s();
    s.cumulative_deaths = r.f64s();
    s.new_cases = r.f64s();
    s.new_deaths = r.f64s();
    s.smoothed_cases = r.f64s();
    s.smoothed_deaths = r.f64s();
    for (auto& m : s.mobility) m = r.f64s();
    const auto n = s.new_deaths.size();
    auto bad = [n](const std::vector<double>& v) { return v.size() != n; };
    if (bad(s.cumulative_cases) || bad(s.cumulative_deaths) || bad(s.new_cases) || bad(s.smoothed_cases) ||
        bad(s.smoothed_deaths) || std::any_of(s.mobility.begin(), s.mobility.end(), bad)) {
        throw FormatError(r.source() + ": series " + s.id + " has inconsistent lengths");
    }
    return s;
}

} // namespace detail

inline void write_cache(std::ostream& os, const SeriesCache& cache) {
    io::BinaryWriter w(os);
    w.magic(kCacheMagic);
    w.u32(kCacheVersion);
    w.u64(cache.counties.size());
    for (const auto& s : cache.counties) detail::write_series(w, s);
    w.u64(cache.states.size());
    for (const auto& s : cache.states) detail::write_series(w, s);
}

inline SeriesCache read_cache(std::istream& is, const std::string& source) {
    io::BinaryReader r(is, source);
    r.expect_magic(kCacheMagic);
    if (const auto v = r.u32(); v != kCacheVersion) {
        throw FormatError(source + ": unsupported cache version " + std::to_string(v));
    }
    SeriesCache c;
    for (auto n = r.u64(); n > 0; --n) c.counties.push_back(detail::read_series(r));
    for (auto n = r.u64(); n > 0; --n) c.states.push_back(detail::read_series(r));
    return c;
}

inline void save_cache(const std::string& path, const SeriesCache& cache) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path);
    write_cache(os, cache);
}

inline SeriesCache load_cache(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    return read_cache(is, path);
}

} // namespace courage::data
