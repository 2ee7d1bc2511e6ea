#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sdipipe/ingest.hpp"

namespace sdipipe::trips {

struct TripConfig {
    double distance_threshold_m = 200.0;
    double time_threshold_s = 900.0;
    double speed_threshold_mps = 1.4;
    double min_trip_length_m = 300.0;

    void validate() const;
};

// A sighting plus its neighbor metrics. Missing neighbors (sequence ends)
// leave the optionals empty.
struct AnnotatedPoint {
    ingest::Sighting s;
    std::optional<double> dist_to_prev_m;
    std::optional<double> time_to_prev_s;
    std::optional<double> speed_from_prev_mps;
    std::optional<double> dist_to_next_m;
    std::optional<double> time_to_next_s;
    std::optional<double> speed_to_next_mps;
};

inline constexpr int32_t kStatic = -1;  // exported as trip id "0"

struct Trip {
    std::string trip_id;
    uint32_t device = 0;
    geo::GeoPoint origin;
    geo::GeoPoint destination;
    std::optional<std::string> origin_zone;
    std::optional<std::string> destination_zone;
    int64_t departure_ts = 0;
    int64_t arrival_ts = 0;
    double distance_m = 0.0;  // sum of consecutive-point haversine legs
    uint32_t n_points = 0;
};

struct SegmentResult {
    std::vector<Trip> trips;                 // time-ordered per device
    std::vector<int32_t> assignment;         // per input point: trip index or kStatic
};

// Neighbor metrics for one device's time-sorted sightings. Throws on
// non-monotone timestamps.
std::vector<AnnotatedPoint> annotate(std::span<const ingest::Sighting> points);

// Threshold segmentation. Membership rules, applied in time order per point:
//  - on the move (speed from previous >= speed threshold): the point joins
//    its predecessor's trip, or opens a new trip when the predecessor is
//    static; the predecessor becomes the new trip's origin point;
//  - a far jump (distance > distance threshold) without motion (speed below
//    threshold) never joins the previous trip;
//  - slow points within the distance threshold of the current stop anchor
//    stay in the trip while dwell (measured from the first observation of
//    the stop) is below the time threshold; reaching the threshold ends the
//    trip and the point becomes static ("0").
SegmentResult segment(const std::vector<AnnotatedPoint>& points, const TripConfig& cfg,
                      const std::string& device_id);

// Removes trips shorter than cfg.min_trip_length_m (strictly; 300.0 m is
// kept). Points of removed trips are re-tagged static by the caller.
std::vector<Trip> filter_short(std::vector<Trip> trips, const TripConfig& cfg);

// Deterministic trip id: 64-bit FNV-1a of (device_id, departure_ts), hex.
std::string make_trip_id(const std::string& device_id, int64_t departure_ts);

}  // namespace sdipipe::trips
