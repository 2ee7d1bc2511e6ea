#include "sdipipe/trips.hpp"

#include <cstdio>

namespace sdipipe::trips {

void TripConfig::validate() const {
    if (distance_threshold_m <= 0 || time_threshold_s <= 0 || speed_threshold_mps <= 0 ||
        min_trip_length_m <= 0)
        throw data_error("trip thresholds must be strictly positive");
}

std::vector<AnnotatedPoint> annotate(std::span<const ingest::Sighting> points) {
    std::vector<AnnotatedPoint> out;
    out.reserve(points.size());
    for (size_t i = 0; i < points.size(); ++i) {
        if (i > 0 && points[i].ts <= points[i - 1].ts)
            throw data_error("annotate: timestamps not strictly increasing");
        out.push_back({points[i], {}, {}, {}, {}, {}, {}});
    }
    for (size_t i = 1; i < out.size(); ++i) {
        double d = geo::haversine_distance(out[i - 1].s.point, out[i].s.point);
        double dt = double(out[i].s.ts - out[i - 1].s.ts);
        out[i].dist_to_prev_m = d;
        out[i].time_to_prev_s = dt;
        out[i].speed_from_prev_mps = d / dt;
        out[i - 1].dist_to_next_m = d;
        out[i - 1].time_to_next_s = dt;
        out[i - 1].speed_to_next_mps = d / dt;
    }
    return out;
}

std::string make_trip_id(const std::string& device_id, int64_t departure_ts) {
    uint64_t h = 0xcbf29ce484222325ull;
    auto mixin = [&h](const char* data, size_t n) {
        for (size_t i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(data[i]);
            h *= 0x100000001b3ull;
        }
    };
    mixin(device_id.data(), device_id.size());
    mixin(":", 1);
    mixin(reinterpret_cast<const char*>(&departure_ts), sizeof(departure_ts));
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

SegmentResult segment(const std::vector<AnnotatedPoint>& points, const TripConfig& cfg,
                      const std::string& device_id) {
    cfg.validate();
    SegmentResult res;
    res.assignment.assign(points.size(), kStatic);
    if (points.empty()) return res;

    int32_t open_trip = -1;                // index into res.trips, -1 = none
    std::optional<size_t> stop_anchor;     // first observation of the current stop

    auto open_new_trip = [&](size_t origin_idx, size_t first_move_idx) {
        Trip t;
        t.device = points[origin_idx].s.device;
        t.departure_ts = points[origin_idx].s.ts;
        t.trip_id = make_trip_id(device_id, t.departure_ts);
        t.origin = points[origin_idx].s.point;
        res.trips.push_back(std::move(t));
        open_trip = static_cast<int32_t>(res.trips.size()) - 1;
        res.assignment[origin_idx] = open_trip;
        res.assignment[first_move_idx] = open_trip;
        stop_anchor.reset();
    };

    for (size_t i = 1; i < points.size(); ++i) {
        const AnnotatedPoint& p = points[i];
        double v = *p.speed_from_prev_mps;
        double d = *p.dist_to_prev_m;

        if (v >= cfg.speed_threshold_mps) {
            // On the move: continue the open trip or start one at the
            // predecessor (the movement began there).
            if (open_trip >= 0) {
                res.assignment[i] = open_trip;
                stop_anchor.reset();
            } else {
                open_new_trip(i - 1, i);
            }
            continue;
        }

        // Not moving. Outside of a trip there is nothing to extend.
        if (open_trip < 0) continue;  // stays static

        if (d > cfg.distance_threshold_m) {
            // Far jump without motion: not part of the previous trip.
            open_trip = -1;
            stop_anchor.reset();
            continue;
        }

        if (stop_anchor &&
            geo::haversine_distance(points[*stop_anchor].s.point, p.s.point) <=
                cfg.distance_threshold_m) {
            // Still at the stop; dwell counts from the stop's first observation.
            double dwell = double(p.s.ts - points[*stop_anchor].s.ts);
            if (dwell >= cfg.time_threshold_s) {
                open_trip = -1;  // trip over; this point is static
                stop_anchor.reset();
            } else {
                res.assignment[i] = open_trip;
            }
        } else {
            // First slow observation here: a (new) stop begins at this point.
            stop_anchor = i;
            res.assignment[i] = open_trip;
        }
    }

    // Assemble trip records from assignments.
    std::vector<const AnnotatedPoint*> last_point(res.trips.size(), nullptr);
    for (size_t i = 0; i < points.size(); ++i) {
        int32_t t = res.assignment[i];
        if (t < 0) continue;
        Trip& trip = res.trips[static_cast<size_t>(t)];
        if (last_point[static_cast<size_t>(t)]) {
            trip.distance_m +=
                geo::haversine_distance(last_point[static_cast<size_t>(t)]->s.point, points[i].s.point);
        }
        trip.destination = points[i].s.point;
        trip.arrival_ts = points[i].s.ts;
        ++trip.n_points;
        last_point[static_cast<size_t>(t)] = &points[i];
    }
    return res;
}

std::vector<Trip> filter_short(std::vector<Trip> trips, const TripConfig& cfg) {
    std::erase_if(trips, [&](const Trip& t) { return t.distance_m < cfg.min_trip_length_m; });
    return trips;
}

}  // namespace sdipipe::trips
