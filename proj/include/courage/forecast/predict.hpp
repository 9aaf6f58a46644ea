#pragma once

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "courage/data/standardizer.hpp"
#include "courage/data/windows.hpp"
#include "courage/error.hpp"
#include "courage/forecast/forecast_set.hpp"
#include "courage/model/transformer.hpp"
#include "courage/training/checkpoint.hpp"

namespace courage::forecast {

/// Destandardized, clamped predictions for standardized windows. `workers` > 1
/// splits the windows across threads; output order does not depend on it.
inline ForecastSet predict(const std::string& model_name, const model::ModelParams& params,
                           const model::ModelConfig& config, const data::Standardizer& standardizer,
                           const std::vector<data::SampleWindow>& windows, data::Level level = data::Level::County,
                           std::size_t workers = 1) {
    const auto expected = standardizer.hash();
    for (const auto& w : windows) {
        if (w.standardizer_hash != expected) {
            throw MismatchError("predict: window " + w.location_id + "@" + format_iso(w.anchor) +
                                " was not standardized with this model's standardizer");
        }
    }

    ForecastSet out{model_name, level, std::vector<ForecastEntry>(windows.size())};
    auto run = [&](std::size_t i) {
        const auto& w = windows[i];
        const auto p = model::forward(w.features, params, config);
        auto& e = out.entries[i];
        e.anchor = w.anchor;
        e.location_id = w.location_id;
        e.location_name = w.location_name;
        e.state_code = w.state_code;
        e.week1 = std::max(0.0, standardizer.destandardize_target(0, p.week1));
        e.week2 = std::max(0.0, standardizer.destandardize_target(1, p.week2));
        if (!std::isfinite(e.week1) || !std::isfinite(e.week2)) {
            throw NumericError("predict: non-finite prediction for " + w.location_id);
        }
    };

    if (workers <= 1 || windows.size() < 2) {
        for (std::size_t i = 0; i < windows.size(); ++i) run(i);
    } else {
        std::vector<std::exception_ptr> errors(workers);
        std::vector<std::thread> pool;
        for (std::size_t k = 0; k < workers; ++k) {
            pool.emplace_back([&, k] {
                try {
                    for (std::size_t i = k; i < windows.size(); i += workers) run(i);
                } catch (...) {
                    errors[k] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }
    out.sort();
    return out;
}

inline ForecastSet predict(const std::string& model_name, const training::Checkpoint& ckpt,
                           const std::vector<data::SampleWindow>& windows, std::size_t workers = 1) {
    return predict(model_name, ckpt.params, ckpt.model, ckpt.standardizer, windows, ckpt.level, workers);
}

} // namespace courage::forecast
