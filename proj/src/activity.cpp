#include "sdipipe/activity.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "sdipipe/dates.hpp"

namespace sdipipe::activity {

void ClusterConfig::validate() const {
    if (eps_m <= 0 || min_points <= 0 || merge_eps_m <= 0 || static_speed_cap_mps <= 0 ||
        max_radius_m <= 0)
        throw data_error("cluster parameters must be strictly positive");
    if (eps_m >= max_radius_m) throw data_error("eps_m must be below max_radius_m");
}

namespace {

constexpr double kMetersPerDegLat = 111320.0;

struct PointGrid {
    double cell_deg_lat, cell_deg_lon;
    double min_lat, min_lon;
    int nx = 1, ny = 1;
    std::vector<std::vector<uint32_t>> cells;

    PointGrid(std::span<const geo::GeoPoint> pts, double eps_m) {
        min_lat = 1e9;
        min_lon = 1e9;
        double max_lat = -1e9, max_lon = -1e9, sum_lat = 0;
        for (const auto& p : pts) {
            min_lat = std::min(min_lat, p.lat);
            max_lat = std::max(max_lat, p.lat);
            min_lon = std::min(min_lon, p.lon);
            max_lon = std::max(max_lon, p.lon);
            sum_lat += p.lat;
        }
        double mean_lat = pts.empty() ? 0.0 : sum_lat / double(pts.size());
        double coslat = std::max(0.05, std::cos(mean_lat * 0.017453292519943295));
        cell_deg_lat = eps_m / kMetersPerDegLat;
        cell_deg_lon = eps_m / (kMetersPerDegLat * coslat);
        nx = std::max(1, int((max_lon - min_lon) / cell_deg_lon) + 1);
        ny = std::max(1, int((max_lat - min_lat) / cell_deg_lat) + 1);
        // keep the table bounded for sparse spreads
        if (int64_t(nx) * ny > int64_t(pts.size()) * 8 + 64) {
            double scale = std::sqrt(double(int64_t(nx) * ny) / double(pts.size() * 8 + 64));
            cell_deg_lat *= scale;
            cell_deg_lon *= scale;
            nx = std::max(1, int((max_lon - min_lon) / cell_deg_lon) + 1);
            ny = std::max(1, int((max_lat - min_lat) / cell_deg_lat) + 1);
        }
        cells.assign(size_t(nx) * size_t(ny), {});
        for (uint32_t i = 0; i < pts.size(); ++i) cells[cell_of(pts[i])].push_back(i);
    }

    size_t cell_of(const geo::GeoPoint& p) const {
        int x = std::clamp(int((p.lon - min_lon) / cell_deg_lon), 0, nx - 1);
        int y = std::clamp(int((p.lat - min_lat) / cell_deg_lat), 0, ny - 1);
        return size_t(y) * size_t(nx) + size_t(x);
    }

    template <typename Fn>
    void for_candidates(const geo::GeoPoint& p, int reach, Fn&& fn) const {
        int cx = std::clamp(int((p.lon - min_lon) / cell_deg_lon), 0, nx - 1);
        int cy = std::clamp(int((p.lat - min_lat) / cell_deg_lat), 0, ny - 1);
        for (int y = std::max(0, cy - reach); y <= std::min(ny - 1, cy + reach); ++y)
            for (int x = std::max(0, cx - reach); x <= std::min(nx - 1, cx + reach); ++x)
                for (uint32_t i : cells[size_t(y) * size_t(nx) + size_t(x)]) fn(i);
    }
};

}  // namespace

std::vector<int> density_cluster(std::span<const geo::GeoPoint> points, double eps_m,
                                 int min_points) {
    const size_t n = points.size();
    std::vector<int> label(n, -1);
    if (n == 0) return label;

    PointGrid grid(points, eps_m);
    // grid cells may be rescaled for sparse data; compute the cell reach that
    // still covers eps in both axes
    int reach = std::max(
        1, int(std::ceil(eps_m / (grid.cell_deg_lat * kMetersPerDegLat))));

    auto neighbors_of = [&](uint32_t i, std::vector<uint32_t>& out) {
        out.clear();
        grid.for_candidates(points[i], reach, [&](uint32_t j) {
            if (geo::haversine_distance(points[i], points[j]) <= eps_m) out.push_back(j);
        });
    };

    std::vector<char> visited(n, 0);
    std::vector<uint32_t> nb, frontier_nb;
    int next_cluster = 0;
    for (uint32_t i = 0; i < n; ++i) {
        if (visited[i]) continue;
        visited[i] = 1;
        neighbors_of(i, nb);
        if (static_cast<int>(nb.size()) < min_points) continue;  // noise (may be claimed later)
        int cid = next_cluster++;
        label[i] = cid;
        std::vector<uint32_t> queue(nb.begin(), nb.end());
        size_t qi = 0;
        while (qi < queue.size()) {
            uint32_t j = queue[qi++];
            if (label[j] < 0) label[j] = cid;  // border or newly reached
            if (visited[j]) continue;
            visited[j] = 1;
            neighbors_of(j, frontier_nb);
            if (static_cast<int>(frontier_nb.size()) >= min_points)
                queue.insert(queue.end(), frontier_nb.begin(), frontier_nb.end());
        }
    }
    return label;
}

namespace {

struct RawCluster {
    std::vector<uint32_t> idx;  // indices into the device's static points
    geo::GeoPoint centroid;
    double radius_m = 0;
};

geo::GeoPoint centroid_of(const std::vector<uint32_t>& idx,
                          std::span<const StaticPoint> pts) {
    double slat = 0, slon = 0;
    for (uint32_t i : idx) {
        slat += pts[i].point.lat;
        slon += pts[i].point.lon;
    }
    return {slat / double(idx.size()), slon / double(idx.size())};
}

double radius_of(const std::vector<uint32_t>& idx, const geo::GeoPoint& c,
                 std::span<const StaticPoint> pts) {
    double r = 0;
    for (uint32_t i : idx) r = std::max(r, geo::haversine_distance(c, pts[i].point));
    return r;
}

// Re-cluster with halved eps until every cluster satisfies the radius cap
// or its points dissolve to noise.
void split_to_radius(std::vector<uint32_t> idx, std::span<const StaticPoint> pts,
                     const ClusterConfig& cfg, double eps_m, std::vector<RawCluster>& out) {
    geo::GeoPoint c = centroid_of(idx, pts);
    double r = radius_of(idx, c, pts);
    if (r <= cfg.max_radius_m) {
        out.push_back({std::move(idx), c, r});
        return;
    }
    double next_eps = eps_m / 2.0;
    if (next_eps < 0.5) return;  // dissolve
    std::vector<geo::GeoPoint> sub;
    sub.reserve(idx.size());
    for (uint32_t i : idx) sub.push_back(pts[i].point);
    std::vector<int> labels = density_cluster(sub, next_eps, cfg.min_points);
    int k = 0;
    for (int l : labels) k = std::max(k, l + 1);
    if (k == 0) return;  // dissolved to noise
    std::vector<std::vector<uint32_t>> groups(static_cast<size_t>(k));
    bool all_same = true;
    for (size_t j = 0; j < labels.size(); ++j) {
        if (labels[j] >= 0) groups[static_cast<size_t>(labels[j])].push_back(idx[j]);
        if (labels[j] != 0) all_same = false;
    }
    if (all_same && groups[0].size() == idx.size()) {
        // no progress at this eps; keep halving
        split_to_radius(std::move(groups[0]), pts, cfg, next_eps, out);
        return;
    }
    for (auto& g : groups)
        if (!g.empty()) split_to_radius(std::move(g), pts, cfg, next_eps, out);
}

double median_consecutive_speed(const std::vector<uint32_t>& idx,
                                std::span<const StaticPoint> pts) {
    // idx is ascending, and static points are time-sorted per device
    std::vector<double> speeds;
    speeds.reserve(idx.size());
    for (size_t k = 1; k < idx.size(); ++k) {
        const StaticPoint& a = pts[idx[k - 1]];
        const StaticPoint& b = pts[idx[k]];
        double dt = double(b.ts - a.ts);
        if (dt <= 0) continue;
        speeds.push_back(geo::haversine_distance(a.point, b.point) / dt);
    }
    if (speeds.empty()) return 0.0;
    std::sort(speeds.begin(), speeds.end());
    size_t m = speeds.size() / 2;
    return speeds.size() % 2 ? speeds[m] : 0.5 * (speeds[m - 1] + speeds[m]);
}

struct DSU {
    std::vector<size_t> parent;
    explicit DSU(size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), size_t{0}); }
    size_t find(size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(size_t a, size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

std::vector<ActivityCluster> cluster_activities(const std::string& device_id,
                                                std::span<const StaticPoint> static_points,
                                                const ClusterConfig& cfg, int32_t utc_offset_s) {
    cfg.validate();
    std::vector<ActivityCluster> result;
    if (static_points.empty()) return result;

    std::vector<geo::GeoPoint> pts;
    pts.reserve(static_points.size());
    for (const auto& sp : static_points) pts.push_back(sp.point);

    std::vector<int> labels = density_cluster(pts, cfg.eps_m, cfg.min_points);
    int k = 0;
    for (int l : labels) k = std::max(k, l + 1);

    std::vector<RawCluster> raw;
    {
        std::vector<std::vector<uint32_t>> groups(static_cast<size_t>(k));
        for (size_t i = 0; i < labels.size(); ++i)
            if (labels[i] >= 0) groups[static_cast<size_t>(labels[i])].push_back(uint32_t(i));
        for (auto& g : groups)
            if (!g.empty()) split_to_radius(std::move(g), static_points, cfg, cfg.eps_m, raw);
    }

    // non-static filter
    std::erase_if(raw, [&](const RawCluster& c) {
        return median_consecutive_speed(c.idx, static_points) > cfg.static_speed_cap_mps;
    });

    // merge nearby clusters (transitively); a merge group that would break
    // the radius cap stays unmerged
    if (raw.size() > 1) {
        DSU dsu(raw.size());
        for (size_t a = 0; a < raw.size(); ++a)
            for (size_t b = a + 1; b < raw.size(); ++b)
                if (geo::haversine_distance(raw[a].centroid, raw[b].centroid) < cfg.merge_eps_m)
                    dsu.unite(a, b);
        std::map<size_t, std::vector<size_t>> groups;
        for (size_t i = 0; i < raw.size(); ++i) groups[dsu.find(i)].push_back(i);
        std::vector<RawCluster> merged;
        for (auto& [root, members] : groups) {
            if (members.size() == 1) {
                merged.push_back(std::move(raw[members[0]]));
                continue;
            }
            RawCluster m;
            for (size_t i : members)
                m.idx.insert(m.idx.end(), raw[i].idx.begin(), raw[i].idx.end());
            std::sort(m.idx.begin(), m.idx.end());
            m.centroid = centroid_of(m.idx, static_points);
            m.radius_m = radius_of(m.idx, m.centroid, static_points);
            if (m.radius_m <= cfg.max_radius_m) {
                merged.push_back(std::move(m));
            } else {
                for (size_t i : members) merged.push_back(std::move(raw[i]));
            }
        }
        raw = std::move(merged);
    }

    // canonical order: earliest point, then coordinates (stable under input
    // permutations of equal content)
    std::sort(raw.begin(), raw.end(), [&](const RawCluster& a, const RawCluster& b) {
        int64_t ta = static_points[a.idx.front()].ts, tb = static_points[b.idx.front()].ts;
        if (ta != tb) return ta < tb;
        if (a.centroid.lat != b.centroid.lat) return a.centroid.lat < b.centroid.lat;
        return a.centroid.lon < b.centroid.lon;
    });

    result.reserve(raw.size());
    for (size_t c = 0; c < raw.size(); ++c) {
        ActivityCluster ac;
        ac.cluster_id = device_id + ":a" + std::to_string(c);
        ac.centroid = raw[c].centroid;
        ac.radius_m = raw[c].radius_m;
        ac.point_index = std::move(raw[c].idx);

        std::set<int32_t> days;
        for (size_t k2 = 0; k2 < ac.point_index.size(); ++k2) {
            const StaticPoint& sp = static_points[ac.point_index[k2]];
            days.insert(Date::from_epoch_seconds(sp.ts, utc_offset_s).days());
            if (k2 == 0 || sp.ts - static_points[ac.point_index[k2 - 1]].ts > cfg.visit_gap_s)
                ac.visits.push_back({sp.ts, sp.ts});
            else
                ac.visits.back().end_ts = sp.ts;
        }
        for (const auto& v : ac.visits) ac.total_dwell_s += v.end_ts - v.start_ts;
        ac.distinct_days = static_cast<int>(days.size());
        result.push_back(std::move(ac));
    }
    return result;
}

namespace {

// Overlap of visit [s,e] (UTC) with the local night window, plus the set of
// nights touched. A night is keyed by the local date on which it starts.
struct NightOverlap {
    double seconds = 0;
    std::set<int32_t> nights;
};

NightOverlap night_overlap(const Visit& v, const ClusterConfig& cfg, int32_t utc_offset_s) {
    NightOverlap res;
    int64_t ls = v.start_ts + utc_offset_s;
    int64_t le = v.end_ts + utc_offset_s;
    int32_t d0 = int32_t(Date::from_epoch_seconds(v.start_ts, utc_offset_s).days()) - 1;
    int32_t d1 = int32_t(Date::from_epoch_seconds(v.end_ts, utc_offset_s).days());
    int64_t night_start_off = int64_t(cfg.night_start_hour * 3600.0);
    int64_t night_end_off = int64_t(cfg.night_end_hour * 3600.0);
    for (int32_t d = d0; d <= d1; ++d) {
        int64_t ws = int64_t(d) * 86400 + night_start_off;
        int64_t we = int64_t(d + 1) * 86400 + night_end_off;
        if (ls == le) {  // single-point visit
            if (ls >= ws && ls < we) res.nights.insert(d);
            continue;
        }
        int64_t lo = std::max(ls, ws), hi = std::min(le, we);
        if (hi > lo) {
            res.seconds += double(hi - lo);
            res.nights.insert(d);
        }
    }
    return res;
}

}  // namespace

HomeResult identify_home(std::span<const ActivityCluster> clusters, const geo::ZoneIndex& zones,
                         const ClusterConfig& cfg, int32_t utc_offset_s) {
    HomeResult res;
    if (clusters.empty()) return res;

    size_t best = 0;
    int best_nights = -1;
    for (size_t c = 0; c < clusters.size(); ++c) {
        std::set<int32_t> nights;
        for (const auto& v : clusters[c].visits) {
            NightOverlap ov = night_overlap(v, cfg, utc_offset_s);
            double len = double(v.end_ts - v.start_ts);
            bool night_visit = (len <= 0) ? !ov.nights.empty() : (ov.seconds / len >= 0.5);
            if (night_visit) nights.insert(ov.nights.begin(), ov.nights.end());
        }
        int n = static_cast<int>(nights.size());
        if (n > best_nights ||
            (n == best_nights &&
             (clusters[c].total_dwell_s > clusters[best].total_dwell_s ||
              (clusters[c].total_dwell_s == clusters[best].total_dwell_s &&
               clusters[c].cluster_id < clusters[best].cluster_id)))) {
            best = c;
            best_nights = n;
        }
    }
    res.cluster = best;
    res.zone_id = zones.locate_id(clusters[best].centroid);
    return res;
}

WorkResult identify_work(std::span<const ActivityCluster> clusters,
                         std::optional<size_t> home_cluster, const geo::ZoneIndex& zones,
                         const ClusterConfig& cfg, int32_t utc_offset_s, int observed_days) {
    WorkResult res;
    if (clusters.empty() || observed_days <= 0) return res;

    std::optional<size_t> best;
    int best_days = 0;
    for (size_t c = 0; c < clusters.size(); ++c) {
        if (home_cluster && c == *home_cluster) continue;
        // accumulate dwell per local date, splitting visits at local midnight
        std::map<int32_t, double> per_day;
        for (const auto& v : clusters[c].visits) {
            int64_t ls = v.start_ts + utc_offset_s;
            int64_t le = v.end_ts + utc_offset_s;
            for (int64_t t = ls; t < le;) {
                int32_t day = int32_t(t >= 0 ? t / 86400 : (t - 86399) / 86400);
                int64_t day_end = (int64_t(day) + 1) * 86400;
                int64_t seg_end = std::min(le, day_end);
                per_day[day] += double(seg_end - t);
                t = seg_end;
            }
        }
        int qual = 0;
        for (const auto& [day, dwell] : per_day)
            if (dwell >= cfg.work_dwell_floor_s) ++qual;
        if (qual == 0) continue;
        if (!best || qual > best_days ||
            (qual == best_days &&
             (clusters[c].total_dwell_s > clusters[*best].total_dwell_s ||
              (clusters[c].total_dwell_s == clusters[*best].total_dwell_s &&
               clusters[c].cluster_id < clusters[*best].cluster_id)))) {
            best = c;
            best_days = qual;
        }
    }
    if (!best) return res;
    if (double(clusters[*best].distinct_days) < cfg.work_day_share_floor * double(observed_days))
        return res;
    res.cluster = best;
    res.zone_id = zones.locate_id(clusters[*best].centroid);
    return res;
}

}  // namespace sdipipe::activity
