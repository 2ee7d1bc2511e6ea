#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sdipipe/activity.hpp"
#include "sdipipe/dates.hpp"
#include "sdipipe/geo.hpp"
#include "sdipipe/trips.hpp"

namespace sdipipe::weights {

// Profiles with home geography resolved once.
struct ProfileTable {
    std::vector<activity::DeviceProfile> profiles;
    std::vector<std::string> home_county;  // aligned with profiles
    std::vector<std::string> home_state;

    static ProfileTable build(std::vector<activity::DeviceProfile> profiles,
                              const geo::ZoneIndex& zones);
    std::optional<size_t> find(const std::string& device_id) const;

private:
    std::map<std::string, size_t> by_id_;
};

struct CountyWeights {
    std::map<std::string, double> county_weight;   // persons represented per device
    std::map<std::string, uint64_t> county_devices;
    std::vector<double> device_weight;             // aligned with ProfileTable
    std::vector<std::string> unrepresented;        // population > 0, zero devices
};

// weight(county) = county population / devices with home in that county.
CountyWeights county_device_weights(const ProfileTable& profiles, const geo::ZoneIndex& zones);

struct TripWeightFactor {
    std::string state_id;
    double factor = 1.0;
    double observed_rate = 0.0;  // weighted trips / person / weekday in the window
    double target_rate = 0.0;
};

// Calibration window: weekdays of Feb 1-14 of the given year. Trips are
// attributed to the device's home state.
std::vector<Date> calibration_weekdays(int year);

// factor(state) = target rate / observed weighted rate over the window.
// Throws when a state with a positive target has no observed trips.
std::map<std::string, TripWeightFactor> state_trip_weights(
    const std::vector<trips::Trip>& calibration_trips,
    const std::vector<size_t>& trip_profile,  // profile index per trip
    const ProfileTable& profiles, const CountyWeights& cw,
    const std::map<std::string, double>& target_rates, int n_weekdays);

}  // namespace sdipipe::weights
