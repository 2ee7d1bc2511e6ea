#include "sdipipe/geo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

namespace sdipipe::geo {

GeoPoint GeoPoint::checked(double lat, double lon) {
    if (!std::isfinite(lat) || !std::isfinite(lon) || !in_range(lat, lon))
        throw data_error("coordinate out of range: lat=" + std::to_string(lat) +
                         " lon=" + std::to_string(lon));
    return GeoPoint{lat, lon};
}

double haversine_distance(const GeoPoint& a, const GeoPoint& b) {
    constexpr double deg = 0.017453292519943295;
    double phi1 = a.lat * deg, phi2 = b.lat * deg;
    double dphi = (b.lat - a.lat) * deg;
    double dlam = (b.lon - a.lon) * deg;
    double sp = std::sin(dphi / 2), sl = std::sin(dlam / 2);
    double h = sp * sp + std::cos(phi1) * std::cos(phi2) * sl * sl;
    h = std::clamp(h, 0.0, 1.0);
    return 2.0 * kEarthRadiusM * std::asin(std::sqrt(h));
}

namespace {

// Is p on the closed segment [a, b]? Exact comparisons: callers tolerate
// the knife-edge cases because the convention only has to be deterministic.
bool on_segment(const GeoPoint& p, const GeoPoint& a, const GeoPoint& b) {
    double cross = (b.lon - a.lon) * (p.lat - a.lat) - (b.lat - a.lat) * (p.lon - a.lon);
    if (cross != 0.0) return false;
    return p.lon >= std::min(a.lon, b.lon) && p.lon <= std::max(a.lon, b.lon) &&
           p.lat >= std::min(a.lat, b.lat) && p.lat <= std::max(a.lat, b.lat);
}

}  // namespace

bool point_in_polygon(const GeoPoint& p, std::span<const GeoPoint> ring) {
    if (ring.size() < 3) throw data_error("degenerate ring: fewer than 3 vertices");
    bool inside = false;
    size_t n = ring.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        const GeoPoint& a = ring[j];
        const GeoPoint& b = ring[i];
        if (on_segment(p, a, b)) return true;  // boundary counts as inside
        bool crosses = (b.lat > p.lat) != (a.lat > p.lat);
        if (crosses) {
            double x = (a.lon - b.lon) * (p.lat - b.lat) / (a.lat - b.lat) + b.lon;
            if (p.lon < x) inside = !inside;
        }
    }
    return inside;
}

namespace {

bool segments_intersect(const GeoPoint& p1, const GeoPoint& p2, const GeoPoint& q1,
                        const GeoPoint& q2) {
    auto orient = [](const GeoPoint& a, const GeoPoint& b, const GeoPoint& c) {
        double v = (b.lon - a.lon) * (c.lat - a.lat) - (b.lat - a.lat) * (c.lon - a.lon);
        return (v > 0) - (v < 0);
    };
    int o1 = orient(p1, p2, q1), o2 = orient(p1, p2, q2);
    int o3 = orient(q1, q2, p1), o4 = orient(q1, q2, p2);
    return o1 != o2 && o3 != o4;
}

void validate_ring(const Zone& z) {
    const auto& r = z.boundary;
    if (r.size() < 3) throw data_error("zone " + z.zone_id + ": boundary needs >= 3 vertices");
    // Desk-scale inputs: the quadratic self-intersection scan is fine.
    size_t n = r.size();
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            // skip adjacent edges (shared endpoint)
            if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
            if (segments_intersect(r[i], r[(i + 1) % n], r[j], r[(j + 1) % n]))
                throw data_error("zone " + z.zone_id + ": self-intersecting boundary");
        }
    }
    if (r.front().lat == r.back().lat && r.front().lon == r.back().lon)
        throw data_error("zone " + z.zone_id + ": first boundary point must not be repeated");
}

}  // namespace

ZoneIndex::ZoneIndex(std::vector<Zone> zones) : zones_(std::move(zones)) { build(); }

void ZoneIndex::build() {
    double min_lat = 1e9, max_lat = -1e9, min_lon = 1e9, max_lon = -1e9;
    for (size_t i = 0; i < zones_.size(); ++i) {
        Zone& z = zones_[i];
        validate_ring(z);
        if (z.population < 0) throw data_error("zone " + z.zone_id + ": negative population");
        if (!by_id_.emplace(z.zone_id, i).second)
            throw data_error("duplicate zone_id: " + z.zone_id);
        auto it = county_state_.find(z.county_id);
        if (it == county_state_.end())
            county_state_.emplace(z.county_id, z.state_id);
        else if (it->second != z.state_id)
            throw data_error("county " + z.county_id + " mapped to two states");
        county_pop_[z.county_id] += z.population;
        state_pop_[z.state_id] += z.population;
        total_population_ += z.population;

        z.min_lat = 1e9;
        z.max_lat = -1e9;
        z.min_lon = 1e9;
        z.max_lon = -1e9;
        for (const auto& p : z.boundary) {
            z.min_lat = std::min(z.min_lat, p.lat);
            z.max_lat = std::max(z.max_lat, p.lat);
            z.min_lon = std::min(z.min_lon, p.lon);
            z.max_lon = std::max(z.max_lon, p.lon);
        }
        min_lat = std::min(min_lat, z.min_lat);
        max_lat = std::max(max_lat, z.max_lat);
        min_lon = std::min(min_lon, z.min_lon);
        max_lon = std::max(max_lon, z.max_lon);
    }
    if (zones_.empty()) return;

    grid_nx_ = grid_ny_ = std::max(1, static_cast<int>(std::sqrt(double(zones_.size())) * 4));
    grid_min_lat_ = min_lat;
    grid_min_lon_ = min_lon;
    cell_lat_ = std::max((max_lat - min_lat) / grid_ny_, 1e-9);
    cell_lon_ = std::max((max_lon - min_lon) / grid_nx_, 1e-9);
    grid_.assign(static_cast<size_t>(grid_nx_) * grid_ny_, {});
    for (size_t i = 0; i < zones_.size(); ++i) {
        const Zone& z = zones_[i];
        int x0 = std::clamp(int((z.min_lon - grid_min_lon_) / cell_lon_), 0, grid_nx_ - 1);
        int x1 = std::clamp(int((z.max_lon - grid_min_lon_) / cell_lon_), 0, grid_nx_ - 1);
        int y0 = std::clamp(int((z.min_lat - grid_min_lat_) / cell_lat_), 0, grid_ny_ - 1);
        int y1 = std::clamp(int((z.max_lat - grid_min_lat_) / cell_lat_), 0, grid_ny_ - 1);
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x)
                grid_[static_cast<size_t>(y) * grid_nx_ + x].push_back(static_cast<uint32_t>(i));
    }
}

std::optional<size_t> ZoneIndex::locate(const GeoPoint& p) const {
    if (zones_.empty()) return std::nullopt;
    int x = int((p.lon - grid_min_lon_) / cell_lon_);
    int y = int((p.lat - grid_min_lat_) / cell_lat_);
    if (x < 0 || x >= grid_nx_ || y < 0 || y >= grid_ny_) return std::nullopt;
    std::optional<size_t> best;
    for (uint32_t i : grid_[static_cast<size_t>(y) * grid_nx_ + x]) {
        const Zone& z = zones_[i];
        if (p.lat < z.min_lat || p.lat > z.max_lat || p.lon < z.min_lon || p.lon > z.max_lon)
            continue;
        if (point_in_polygon(p, z.boundary)) {
            if (!best || z.zone_id < zones_[*best].zone_id) best = i;
        }
    }
    return best;
}

std::optional<std::string> ZoneIndex::locate_id(const GeoPoint& p) const {
    auto i = locate(p);
    if (!i) return std::nullopt;
    return zones_[*i].zone_id;
}

std::optional<size_t> ZoneIndex::find_zone(const std::string& zone_id) const {
    auto it = by_id_.find(zone_id);
    if (it == by_id_.end()) return std::nullopt;
    return it->second;
}

const std::string& ZoneIndex::state_of_county(const std::string& county_id) const {
    auto it = county_state_.find(county_id);
    if (it == county_state_.end()) throw data_error("unknown county: " + county_id);
    return it->second;
}

double ZoneIndex::county_population(const std::string& county_id) const {
    auto it = county_pop_.find(county_id);
    return it == county_pop_.end() ? 0.0 : it->second;
}

double ZoneIndex::state_population(const std::string& state_id) const {
    auto it = state_pop_.find(state_id);
    return it == state_pop_.end() ? 0.0 : it->second;
}

std::vector<std::string> ZoneIndex::county_ids() const {
    std::vector<std::string> ids;
    ids.reserve(county_pop_.size());
    for (const auto& [c, _] : county_pop_) ids.push_back(c);
    std::sort(ids.begin(), ids.end());
    return ids;
}

std::vector<std::string> ZoneIndex::state_ids() const {
    std::vector<std::string> ids;
    ids.reserve(state_pop_.size());
    for (const auto& [s, _] : state_pop_) ids.push_back(s);
    std::sort(ids.begin(), ids.end());
    return ids;
}

ZoneIndex ZoneIndex::load(const std::string& json_path) {
    std::ifstream is(json_path);
    if (!is) throw data_error("cannot open zone file: " + json_path);
    nlohmann::json doc;
    try {
        is >> doc;
    } catch (const std::exception& e) {
        throw data_error("zone file " + json_path + ": " + e.what());
    }
    if (!doc.is_array()) throw data_error("zone file must be a JSON array");
    std::vector<Zone> zones;
    zones.reserve(doc.size());
    for (const auto& jz : doc) {
        Zone z;
        z.zone_id = jz.at("zone_id").get<std::string>();
        z.county_id = jz.at("county_id").get<std::string>();
        z.state_id = jz.at("state_id").get<std::string>();
        z.population = jz.at("population").get<double>();
        z.utc_offset_s = jz.value("utc_offset_s", 0);
        for (const auto& pt : jz.at("boundary")) {
            if (!pt.is_array() || pt.size() != 2)
                throw data_error("zone " + z.zone_id + ": boundary entries must be [lat,lon]");
            z.boundary.push_back(GeoPoint::checked(pt[0].get<double>(), pt[1].get<double>()));
        }
        zones.push_back(std::move(z));
    }
    return ZoneIndex(std::move(zones));
}

}  // namespace sdipipe::geo
