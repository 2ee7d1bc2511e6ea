#pragma once

#include <map>
#include <string>
#include <vector>

#include "sdipipe/dates.hpp"
#include "sdipipe/weights.hpp"

namespace sdipipe::metrics {

enum class Level { County, State, Nation };
const char* level_name(Level l);

struct DailyMetrics {
    Date date;
    Level level = Level::Nation;
    std::string geo_id;  // "US" for the nation row
    double pct_staying_home = 0.0;
    double work_trips_pp = 0.0;
    double nonwork_trips_pp = 0.0;
    double trips_pp = 0.0;
    double miles_pp = 0.0;
    double pct_out_of_county = 0.0;
};

// One trip prepared for aggregation: resolved against the traveler's
// profile and the zone map.
struct TripForMetrics {
    size_t profile = 0;      // index into ProfileTable
    double distance_m = 0.0;
    bool is_work = false;        // origin or destination equals the work zone
    bool od_counties_known = false;
    bool out_of_county = false;  // destination county != origin county
};

// Weighted metrics for every geography level on one day. panel lists the
// profile indices of devices in the denominator (devices observed that
// day, or all profiled devices depending on configuration). Geographies
// with zero weighted persons are omitted.
std::vector<DailyMetrics> daily_metrics(Date date, const std::vector<size_t>& panel,
                                        const std::vector<TripForMetrics>& trips,
                                        const weights::ProfileTable& profiles,
                                        const weights::CountyWeights& cw,
                                        const std::map<std::string, weights::TripWeightFactor>& factors,
                                        const geo::ZoneIndex& zones);

struct Benchmark {
    Level level = Level::Nation;
    std::string geo_id;
    double pct_staying_home = 0.0;
    double work_trips_pp = 0.0;
    double nonwork_trips_pp = 0.0;
    double trips_pp = 0.0;
    double miles_pp = 0.0;
    double pct_out_of_county = 0.0;
};

// Per-metric arithmetic mean over the benchmark dates. Throws when a
// geography is missing a row for any benchmark date.
std::map<std::string, Benchmark> compute_benchmark(const std::vector<DailyMetrics>& series,
                                                   const std::vector<Date>& benchmark_dates);

// Key used for benchmark/series maps: "level:geo_id".
std::string geo_key(Level level, const std::string& geo_id);

}  // namespace sdipipe::metrics
