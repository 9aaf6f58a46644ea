#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "courage/data/date.hpp"
#include "courage/data/records.hpp"
#include "courage/error.hpp"

namespace courage::forecast {

/// Week-1 / Week-2 predictions in deaths for one location and anchor date.
struct ForecastEntry {
    Date anchor{};
    std::string location_id;
    std::string location_name;
    std::string state_code;
    double week1 = 0.0;
    double week2 = 0.0;

    friend bool operator==(const ForecastEntry&, const ForecastEntry&) = default;
};

using ForecastKey = std::pair<Date, std::string>;

/// Predictions of one model at one level, kept sorted by (anchor, location_id).
struct ForecastSet {
    std::string model;
    data::Level level = data::Level::County;
    std::vector<ForecastEntry> entries;

    void sort() {
        std::sort(entries.begin(), entries.end(), [](const ForecastEntry& a, const ForecastEntry& b) {
            return std::tie(a.anchor, a.location_id) < std::tie(b.anchor, b.location_id);
        });
    }

    [[nodiscard]] const ForecastEntry* find(Date anchor, const std::string& id) const {
        auto it = std::lower_bound(entries.begin(), entries.end(), ForecastKey{anchor, id},
                                   [](const ForecastEntry& e, const ForecastKey& k) {
                                       return std::tie(e.anchor, e.location_id) < std::tie(k.first, k.second);
                                   });
        if (it == entries.end() || it->anchor != anchor || it->location_id != id) return nullptr;
        return &*it;
    }

    [[nodiscard]] std::vector<ForecastKey> keys() const {
        std::vector<ForecastKey> out;
        out.reserve(entries.size());
        for (const auto& e : entries) out.emplace_back(e.anchor, e.location_id);
        return out;
    }

    friend bool operator==(const ForecastSet&, const ForecastSet&) = default;
};

/// State code owning a county FIPS, from the entry itself or the FIPS prefix.
inline std::string owning_state(const ForecastEntry& e) {
    if (!e.state_code.empty() && data::state_by_code(e.state_code)) return e.state_code;
    if (const auto* s = data::state_by_fips_prefix(e.location_id)) return std::string(s->code);
    throw MismatchError("county " + e.location_id + " maps to no known state");
}

} // namespace courage::forecast
