#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "sdipipe/error.hpp"

namespace sdipipe::geo {

inline constexpr double kEarthRadiusM = 6'371'000.0;
inline constexpr double kMilesPerMeter = 0.000621371;

struct GeoPoint {
    double lat = 0.0;
    double lon = 0.0;

    static bool in_range(double lat, double lon) {
        return lat >= -90.0 && lat <= 90.0 && lon >= -180.0 && lon <= 180.0;
    }
    // Range-checked entry point for anything coming from outside.
    static GeoPoint checked(double lat, double lon);
};

// Great-circle distance in meters on the mean-radius sphere.
double haversine_distance(const GeoPoint& a, const GeoPoint& b);

// Ray-casting parity in the lon/lat plane; points on the boundary count as
// inside. Assumes a simple ring well away from the poles and antimeridian.
bool point_in_polygon(const GeoPoint& p, std::span<const GeoPoint> ring);

struct Zone {
    std::string zone_id;
    std::string county_id;
    std::string state_id;
    double population = 0.0;
    int32_t utc_offset_s = 0;
    std::vector<GeoPoint> boundary;
    // cached bounding box
    double min_lat = 0, max_lat = 0, min_lon = 0, max_lon = 0;
};

// Immutable zone set plus a grid acceleration structure; safe for
// concurrent readers once built.
class ZoneIndex {
public:
    ZoneIndex() = default;
    explicit ZoneIndex(std::vector<Zone> zones);

    static ZoneIndex load(const std::string& json_path);

    // Index of the containing zone; boundary-shared points resolve to the
    // lexicographically smallest zone_id.
    std::optional<size_t> locate(const GeoPoint& p) const;
    std::optional<std::string> locate_id(const GeoPoint& p) const;

    const std::vector<Zone>& zones() const { return zones_; }
    const Zone& zone(size_t i) const { return zones_[i]; }
    std::optional<size_t> find_zone(const std::string& zone_id) const;

    const std::string& county_of(size_t zone_idx) const { return zones_[zone_idx].county_id; }
    const std::string& state_of_county(const std::string& county_id) const;
    double county_population(const std::string& county_id) const;
    double state_population(const std::string& state_id) const;
    double total_population() const { return total_population_; }
    std::vector<std::string> county_ids() const;  // sorted
    std::vector<std::string> state_ids() const;   // sorted

private:
    void build();

    std::vector<Zone> zones_;
    std::unordered_map<std::string, size_t> by_id_;
    std::unordered_map<std::string, std::string> county_state_;
    std::unordered_map<std::string, double> county_pop_;
    std::unordered_map<std::string, double> state_pop_;
    double total_population_ = 0.0;

    // uniform grid over the combined bounding box
    double grid_min_lat_ = 0, grid_min_lon_ = 0, cell_lat_ = 1, cell_lon_ = 1;
    int grid_nx_ = 0, grid_ny_ = 0;
    std::vector<std::vector<uint32_t>> grid_;
};

}  // namespace sdipipe::geo
