#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sdipipe/activity.hpp"
#include "sdipipe/dates.hpp"
#include "sdipipe/geo.hpp"
#include "sdipipe/ingest.hpp"
#include "sdipipe/metrics.hpp"

namespace sdipipe::synth {

// Behavior parameters active from start_date on. transition_weekdays > 0
// interpolates linearly from the previous phase's values over the first n
// weekdays, which is how ramps and gradual drifts are scripted.
struct PhaseSpec {
    Date start;
    int transition_weekdays = 0;
    double stay_home_prob = 0.2;
    double work_trip_rate = 1.0;     // expected work trips per employed active day
    double nonwork_trip_rate = 3.0;  // expected non-work trips per active day
    double mean_trip_km = 10.0;
    double out_of_county_prob = 0.2;
};

// Scripted logistic epidemic curve for one county.
struct CaseCurve {
    std::string county_id;
    double cap = 1000.0;
    double rate = 0.15;  // per day
    Date midpoint;
};

struct Scenario {
    uint64_t seed = 1;
    int n_devices = 100;
    Date start_date;
    Date end_date;
    double employed_prob = 0.6;
    double capture_prob = 1.0;   // probability a true trip emits movement sightings
    double sighting_rate_hz = 1.0 / 480.0;
    int stationary_ping_s = 3600;
    int night_ping_s = 10800;    // sparser pings between local 23:00 and 07:00
    double jitter_m = 15.0;
    double accuracy_min_m = 5.0;
    double accuracy_max_m = 30.0;
    std::vector<PhaseSpec> phases;
    std::vector<CaseCurve> case_curves;

    void validate(const geo::ZoneIndex& zones) const;
    static Scenario load(const std::string& json_path);
    // Interpolated behavior parameters for a weekday.
    PhaseSpec params_on(Date d) const;
};

struct TruthTrip {
    uint32_t device = 0;
    int64_t departure_ts = 0;
    int64_t arrival_ts = 0;
    geo::GeoPoint origin;
    geo::GeoPoint destination;
    std::string origin_zone;
    std::string destination_zone;
    double distance_m = 0.0;
    bool is_work = false;
};

struct GroundTruth {
    std::vector<std::string> device_ids;
    std::vector<activity::DeviceProfile> profiles;  // true home/work assignments
    std::vector<TruthTrip> trips;                   // chronological per device
    std::vector<char> stayed_home;                  // [device * n_days + day]
    std::vector<Date> days;                         // the weekday calendar
};

struct GenResult {
    ingest::SightingTable sightings;  // sorted by (device_id, ts)
    GroundTruth truth;
};

// Deterministic for a given scenario + seed: per-device substreams keyed on
// (seed, device, day) make the output independent of generation order.
GenResult generate(const Scenario& sc, const geo::ZoneIndex& zones);

// Daily metrics computed directly from the scripted behavior (true trips,
// true homes, county weights from true home counts). The end-to-end oracle
// the pipeline output is compared against.
std::vector<metrics::DailyMetrics> truth_daily_metrics(const GroundTruth& truth,
                                                       const geo::ZoneIndex& zones);

// Wide cumulative cases CSV content (all calendar days in range).
std::string render_case_csv(const Scenario& sc, const geo::ZoneIndex& zones);

void write_truth_trips(const GroundTruth& truth, const std::string& path);
void write_truth_profiles(const GroundTruth& truth, const std::string& path);

}  // namespace sdipipe::synth
