#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "courage/data/date.hpp"

namespace courage::data {

inline constexpr std::size_t kMobilityCategories = 6;

inline constexpr std::array<std::string_view, kMobilityCategories> kMobilityColumns = {
    "retail_and_recreation_percent_change_from_baseline",
    "grocery_and_pharmacy_percent_change_from_baseline",
    "parks_percent_change_from_baseline",
    "transit_stations_percent_change_from_baseline",
    "workplaces_percent_change_from_baseline",
    "residential_percent_change_from_baseline",
};

using MobilityRow = std::array<std::optional<double>, kMobilityCategories>;

enum class Level { County, State };

inline std::string to_string(Level l) { return l == Level::County ? "county" : "state"; }

/// One location-day of raw observations. Cumulative counts as published; mobility
/// cells are percent change from baseline and may be missing.
struct DailyRecord {
    std::string location_id; // 5-digit FIPS for counties, postal code for states
    Date date{};
    double cumulative_cases = 0.0;
    double cumulative_deaths = 0.0;
    MobilityRow mobility{};
    double population = 0.0;

    friend bool operator==(const DailyRecord&, const DailyRecord&) = default;
};

struct StateInfo {
    std::string_view name;
    std::string_view code;
    std::string_view fips;
};

// clang-format off
inline constexpr std::array<StateInfo, 51> kStates = {{
    {"Alabama", "AL", "01"}, {"Alaska", "AK", "02"}, {"Arizona", "AZ", "04"}, {"Arkansas", "AR", "05"},
    {"California", "CA", "06"}, {"Colorado", "CO", "08"}, {"Connecticut", "CT", "09"}, {"Delaware", "DE", "10"},
    {"District of Columbia", "DC", "11"}, {"Florida", "FL", "12"}, {"Georgia", "GA", "13"}, {"Hawaii", "HI", "15"},
    {"Idaho", "ID", "16"}, {"Illinois", "IL", "17"}, {"Indiana", "IN", "18"}, {"Iowa", "IA", "19"},
    {"Kansas", "KS", "20"}, {"Kentucky", "KY", "21"}, {"Louisiana", "LA", "22"}, {"Maine", "ME", "23"},
    {"Maryland", "MD", "24"}, {"Massachusetts", "MA", "25"}, {"Michigan", "MI", "26"}, {"Minnesota", "MN", "27"},
    {"Mississippi", "MS", "28"}, {"Missouri", "MO", "29"}, {"Montana", "MT", "30"}, {"Nebraska", "NE", "31"},
    {"Nevada", "NV", "32"}, {"New Hampshire", "NH", "33"}, {"New Jersey", "NJ", "34"}, {"New Mexico", "NM", "35"},
    {"New York", "NY", "36"}, {"North Carolina", "NC", "37"}, {"North Dakota", "ND", "38"}, {"Ohio", "OH", "39"},
    {"Oklahoma", "OK", "40"}, {"Oregon", "OR", "41"}, {"Pennsylvania", "PA", "42"}, {"Rhode Island", "RI", "44"},
    {"South Carolina", "SC", "45"}, {"South Dakota", "SD", "46"}, {"Tennessee", "TN", "47"}, {"Texas", "TX", "48"},
    {"Utah", "UT", "49"}, {"Vermont", "VT", "50"}, {"Virginia", "VA", "51"}, {"Washington", "WA", "53"},
    {"West Virginia", "WV", "54"}, {"Wisconsin", "WI", "55"}, {"Wyoming", "WY", "56"},
}};
// clang-format on

inline const StateInfo* state_by_name(std::string_view name) {
    for (const auto& s : kStates)
        if (s.name == name) return &s;
    return nullptr;
}

inline const StateInfo* state_by_code(std::string_view code) {
    for (const auto& s : kStates)
        if (s.code == code) return &s;
    return nullptr;
}

inline const StateInfo* state_by_fips_prefix(std::string_view county_fips) {
    if (county_fips.size() != 5) return nullptr;
    const auto prefix = county_fips.substr(0, 2);
    for (const auto& s : kStates)
        if (s.fips == prefix) return &s;
    return nullptr;
}

/// Mainland jurisdictions kept by the ingest filter: everything in kStates except
/// Alaska and Hawaii. Territories never appear in kStates.
inline bool is_mainland(std::string_view state_name) {
    const auto* s = state_by_name(state_name);
    return s != nullptr && s->code != "AK" && s->code != "HI";
}

} // namespace courage::data
