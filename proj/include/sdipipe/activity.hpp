#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sdipipe/geo.hpp"

namespace sdipipe::activity {

struct ClusterConfig {
    double eps_m = 100.0;
    int min_points = 5;
    double max_radius_m = 3218.69;  // two miles
    double merge_eps_m = 150.0;
    double static_speed_cap_mps = 1.4;

    // home/work inference
    double night_start_hour = 19.0;  // local 19:00..08:00 window
    double night_end_hour = 8.0;
    double work_dwell_floor_s = 7200.0;  // 2 h per day
    double work_day_share_floor = 0.25;  // of observed days
    int64_t visit_gap_s = 14400;         // gap that splits visits

    void validate() const;
};

// One static sighting (trip id "0") of a device.
struct StaticPoint {
    int64_t ts = 0;
    geo::GeoPoint point;
};

struct Visit {
    int64_t start_ts = 0;
    int64_t end_ts = 0;
};

struct ActivityCluster {
    std::string cluster_id;
    geo::GeoPoint centroid;
    double radius_m = 0.0;  // max point-to-centroid distance
    std::vector<Visit> visits;
    int64_t total_dwell_s = 0;
    int distinct_days = 0;              // distinct local dates with any point
    std::vector<uint32_t> point_index;  // into the device's static points
};

// Plain density clustering (eps / min_points, core-point expansion) over
// the haversine metric. Returns per-point labels, -1 for noise. Exposed so
// tests can compare the grid-accelerated path against a brute-force pass.
std::vector<int> density_cluster(std::span<const geo::GeoPoint> points, double eps_m,
                                 int min_points);

// Full activity pipeline for one device: cluster static points, split any
// cluster whose radius exceeds the two-mile cap by halving eps, drop
// clusters that fail the static-speed check, merge nearby clusters, and
// compute visit statistics. utc_offset_s fixes "local" time for day counts.
std::vector<ActivityCluster> cluster_activities(const std::string& device_id,
                                                std::span<const StaticPoint> static_points,
                                                const ClusterConfig& cfg, int32_t utc_offset_s);

struct HomeResult {
    std::optional<size_t> cluster;       // index into the cluster list
    std::optional<std::string> zone_id;  // empty if centroid is outside all zones
};

// Home: the cluster with the most distinct nights of presence (a visit
// counts toward a night when at least half of it falls inside the local
// night window). Ties: larger total dwell, then smaller cluster_id.
HomeResult identify_home(std::span<const ActivityCluster> clusters, const geo::ZoneIndex& zones,
                         const ClusterConfig& cfg, int32_t utc_offset_s);

struct WorkResult {
    std::optional<size_t> cluster;
    std::optional<std::string> zone_id;
};

// Work: the non-home cluster with the most days carrying >= 2 h dwell,
// kept only when visited on >= 25% of the device's observed days. No fixed
// nine-to-five window; night shifts qualify the same way.
WorkResult identify_work(std::span<const ActivityCluster> clusters,
                         std::optional<size_t> home_cluster, const geo::ZoneIndex& zones,
                         const ClusterConfig& cfg, int32_t utc_offset_s, int observed_days);

struct DeviceProfile {
    std::string device_id;
    std::string home_zone;
    std::optional<std::string> work_zone;
    bool employed = false;
};

}  // namespace sdipipe::activity
