#include "sdipipe/weights.hpp"

namespace sdipipe::weights {

ProfileTable ProfileTable::build(std::vector<activity::DeviceProfile> profiles,
                                 const geo::ZoneIndex& zones) {
    ProfileTable t;
    t.profiles = std::move(profiles);
    t.home_county.reserve(t.profiles.size());
    t.home_state.reserve(t.profiles.size());
    for (size_t i = 0; i < t.profiles.size(); ++i) {
        const auto& p = t.profiles[i];
        auto zi = zones.find_zone(p.home_zone);
        if (!zi) throw data_error("profile " + p.device_id + ": unknown home zone " + p.home_zone);
        t.home_county.push_back(zones.zone(*zi).county_id);
        t.home_state.push_back(zones.zone(*zi).state_id);
        t.by_id_[p.device_id] = i;
    }
    return t;
}

std::optional<size_t> ProfileTable::find(const std::string& device_id) const {
    auto it = by_id_.find(device_id);
    if (it == by_id_.end()) return std::nullopt;
    return it->second;
}

CountyWeights county_device_weights(const ProfileTable& profiles, const geo::ZoneIndex& zones) {
    CountyWeights cw;
    for (const auto& county : zones.county_ids()) cw.county_devices[county] = 0;
    for (size_t i = 0; i < profiles.profiles.size(); ++i)
        ++cw.county_devices[profiles.home_county[i]];

    for (const auto& [county, n] : cw.county_devices) {
        double pop = zones.county_population(county);
        if (n == 0) {
            cw.county_weight[county] = 0.0;
            if (pop > 0) cw.unrepresented.push_back(county);
        } else {
            cw.county_weight[county] = pop / double(n);
        }
    }
    cw.device_weight.reserve(profiles.profiles.size());
    for (size_t i = 0; i < profiles.profiles.size(); ++i)
        cw.device_weight.push_back(cw.county_weight.at(profiles.home_county[i]));
    return cw;
}

std::vector<Date> calibration_weekdays(int year) {
    return weekdays_between(Date::from_civil(year, 2, 1), Date::from_civil(year, 2, 14));
}

std::map<std::string, TripWeightFactor> state_trip_weights(
    const std::vector<trips::Trip>& calibration_trips, const std::vector<size_t>& trip_profile,
    const ProfileTable& profiles, const CountyWeights& cw,
    const std::map<std::string, double>& target_rates, int n_weekdays) {
    if (n_weekdays <= 0) throw data_error("calibration window has no weekdays");
    if (calibration_trips.size() != trip_profile.size())
        throw internal_error("trip/profile index size mismatch");

    std::map<std::string, double> weighted_trips;
    std::map<std::string, double> weighted_persons;
    for (size_t i = 0; i < profiles.profiles.size(); ++i)
        weighted_persons[profiles.home_state[i]] += cw.device_weight[i];
    for (size_t i = 0; i < calibration_trips.size(); ++i) {
        size_t pi = trip_profile[i];
        weighted_trips[profiles.home_state[pi]] += cw.device_weight[pi];
    }

    std::map<std::string, TripWeightFactor> out;
    for (const auto& [state, target] : target_rates) {
        TripWeightFactor f;
        f.state_id = state;
        f.target_rate = target;
        double persons = weighted_persons.count(state) ? weighted_persons.at(state) : 0.0;
        double trips_w = weighted_trips.count(state) ? weighted_trips.at(state) : 0.0;
        if (persons > 0) f.observed_rate = trips_w / persons / double(n_weekdays);
        if (f.observed_rate <= 0) {
            if (target > 0)
                throw data_error("state " + state +
                                 " has no observed calibration trips; cannot calibrate");
            f.factor = 1.0;
        } else {
            f.factor = target / f.observed_rate;
        }
        out[state] = f;
    }
    return out;
}

}  // namespace sdipipe::weights
