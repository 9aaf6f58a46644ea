#pragma once

// Ten low-count county windows (0.2-1.5 deaths/day) used to check that the
// default model and schedule can memorise a tiny training set.

#include <algorithm>
#include <cmath>
#include <vector>

#include "courage/data/standardizer.hpp"
#include "courage/data/windows.hpp"
#include "courage/model/transformer.hpp"
#include "courage/training/trainer.hpp"
#include "synthetic.hpp"

namespace courage::testing {

struct OverfitOutcome {
    double final_loss = 0.0;
    double worst_error_deaths = 0.0; // max |prediction - target| over windows and horizons
};

inline std::vector<data::SampleWindow> overfit_windows() {
    SyntheticOptions opt;
    opt.counties = 10;
    opt.days = 60;
    opt.min_daily_deaths = 0.2;
    opt.max_daily_deaths = 1.5;
    std::vector<data::SampleWindow> out;
    for (const auto& s : synthetic_series(opt)) out.push_back(data::make_window(s, 20, 7));
    return out;
}

inline OverfitOutcome run_overfit(const training::TrainConfig& train = {}, const model::ModelConfig& config = {}) {
    const auto raw = overfit_windows();
    const auto st = data::Standardizer::fit(raw);
    const auto z = st.apply(raw);
    const auto result = training::train(z, config, train, {});
    OverfitOutcome out;
    out.final_loss = result.curve.back().loss;
    for (const auto& w : raw) {
        const auto p = model::forward(st.apply(w).features, result.params, config);
        out.worst_error_deaths = std::max({out.worst_error_deaths, std::abs(st.destandardize_target(0, p.week1) - w.target1),
                                           std::abs(st.destandardize_target(1, p.week2) - w.target2)});
    }
    return out;
}

} // namespace courage::testing
