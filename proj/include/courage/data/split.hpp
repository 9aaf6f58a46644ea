#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "courage/data/windows.hpp"
#include "courage/error.hpp"

namespace courage::data {

/// Date-based train/test partition of [range_start, range_end].
struct SplitDates {
    Date range_start{};
    Date range_end{};
    Date train_end{};  // last day whose data may be used for training (inputs and targets)
    Date test_start{}; // train_end + 1; first anchor of the test period
    double fraction = 0.0;
};

/// The training period is the first floor(fraction * N) days of the N-day range.
inline SplitDates compute_split(Date range_start, Date range_end, double fraction) {
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw ConfigError("split fraction must lie in (0, 1), got " + std::to_string(fraction));
    }
    if (range_end < range_start) throw ConfigError("split: range end precedes range start");
    const long total = days_between(range_start, range_end) + 1;
    const auto train_days = static_cast<long>(std::floor(fraction * static_cast<double>(total)));
    if (train_days < 1 || train_days >= total) throw ConfigError("split: fraction leaves an empty train or test period");
    SplitDates s;
    s.range_start = range_start;
    s.range_end = range_end;
    s.train_end = add_days(range_start, train_days - 1);
    s.test_start = add_days(s.train_end, 1);
    s.fraction = fraction;
    return s;
}

/// True when every input and target day of `w` lies inside the training period.
inline bool in_train(const SampleWindow& w, const SplitDates& s) {
    return w.anchor >= s.range_start && add_days(w.anchor, static_cast<long>(kHorizonDays)) <= s.train_end;
}

/// True when the anchor is in the test period and both target weeks end by range_end.
inline bool in_test(const SampleWindow& w, const SplitDates& s) {
    return w.anchor >= s.test_start && add_days(w.anchor, static_cast<long>(kHorizonDays)) <= s.range_end;
}

/// Partitions by anchor date. Windows whose targets reach past train_end are
/// left out of both sides, so no training target overlaps the test period.
inline std::pair<std::vector<SampleWindow>, std::vector<SampleWindow>> split(std::vector<SampleWindow> windows,
                                                                             const SplitDates& s) {
    std::pair<std::vector<SampleWindow>, std::vector<SampleWindow>> out;
    for (auto& w : windows) {
        if (in_train(w, s))
            out.first.push_back(std::move(w));
        else if (in_test(w, s))
            out.second.push_back(std::move(w));
    }
    return out;
}

} // namespace courage::data
