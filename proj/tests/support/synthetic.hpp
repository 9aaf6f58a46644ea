#pragma once

// Seeded synthetic county panel: epidemic waves with a mild trend, weekday
// reporting seasonality and Poisson noise. Cases lead deaths by two weeks and
// residential mobility tracks the wave, so the inputs carry real signal about
// the next fortnight that a persistence forecast cannot use.

#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "courage/data/jhu.hpp"
#include "courage/data/mobility.hpp"
#include "courage/data/series.hpp"

namespace courage::testing {

struct SyntheticOptions {
    std::size_t counties = 50;
    std::size_t days = 200;
    Date start = parse_iso_date("2020-03-07");
    std::uint64_t seed = 1;
    std::vector<std::string> states = {"Alabama", "Georgia", "Iowa", "Ohio", "Texas"};
    double min_daily_deaths = 2.0;
    double max_daily_deaths = 12.0;
    double cases_per_death = 40.0;
    bool mobility = true;
};

struct SyntheticData {
    std::map<std::string, data::CountyInfo> counties;
    std::vector<data::DailyRecord> records;
    data::MobilityTable mobility;
};

inline SyntheticData make_synthetic(const SyntheticOptions& opt) {
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    SyntheticData out;
    constexpr double two_pi = 2.0 * std::numbers::pi;

    for (std::size_t c = 0; c < opt.counties; ++c) {
        const auto* state = data::state_by_name(opt.states[c % opt.states.size()]);
        char fips[8];
        std::snprintf(fips, sizeof fips, "%s%03zu", std::string(state->fips).c_str(), 2 * (c / opt.states.size()) + 1);
        const double base = opt.min_daily_deaths + (opt.max_daily_deaths - opt.min_daily_deaths) * unit(rng);
        const double amplitude = 0.35 + 0.35 * unit(rng);
        const double period = 45.0 + 40.0 * unit(rng);
        const double phase = period * unit(rng);
        const double trend = 0.2 * (unit(rng) - 0.5);
        const double weekday_amp = 0.25 * unit(rng);

        data::CountyInfo info{fips, "Synth" + std::to_string(c), std::string(state->name), base * 20000.0};
        out.counties[info.fips] = info;

        const auto rate = [&](double t) {
            const double wave = 1.0 + amplitude * std::sin(two_pi * (t + phase) / period);
            return base * wave * (1.0 + trend * t / static_cast<double>(opt.days));
        };

        double cum_cases = 0.0;
        double cum_deaths = 0.0;
        for (std::size_t t = 0; t < opt.days; ++t) {
            const double td = static_cast<double>(t);
            const double weekday = 1.0 + weekday_amp * std::sin(two_pi * td / 7.0);
            std::poisson_distribution<int> deaths(std::max(0.0, rate(td) * weekday));
            std::poisson_distribution<int> cases(std::max(0.0, opt.cases_per_death * rate(td + 14.0) * weekday));
            cum_deaths += deaths(rng);
            cum_cases += cases(rng);

            data::DailyRecord r;
            r.location_id = info.fips;
            r.date = add_days(opt.start, static_cast<long>(t));
            r.cumulative_cases = cum_cases;
            r.cumulative_deaths = cum_deaths;
            r.population = info.population;
            if (opt.mobility) {
                const double wave = std::sin(two_pi * (td + 10.0 + phase) / period);
                for (std::size_t k = 0; k < data::kMobilityCategories; ++k) {
                    const double sign = k == 5 ? 1.0 : -1.0;
                    r.mobility[k] = std::round(sign * 12.0 * wave + 4.0 * (unit(rng) - 0.5));
                }
                out.mobility.by_fips[info.fips][r.date] = r.mobility;
            }
            out.records.push_back(std::move(r));
        }
    }
    return out;
}

inline std::vector<data::LocationSeries> synthetic_series(const SyntheticOptions& opt) {
    const auto d = make_synthetic(opt);
    return data::build_county_series(d.records, d.counties);
}

} // namespace courage::testing
