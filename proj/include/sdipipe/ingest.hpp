#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdipipe/geo.hpp"

namespace sdipipe::ingest {

// One device-location observation. device is an index into
// SightingTable::device_ids (ids are interned once at parse time).
struct Sighting {
    uint32_t device = 0;
    int64_t ts = 0;  // UTC epoch seconds, > 0
    geo::GeoPoint point;
    float accuracy_m = 0.0f;
};

struct SightingTable {
    std::vector<std::string> device_ids;  // sorted lexicographically after finalize
    std::vector<Sighting> rows;

    const std::string& device_id(uint32_t idx) const { return device_ids[idx]; }
    // Sorts rows by (device_id, ts) and device_ids lexicographically.
    void finalize();
};

struct ParseError {
    size_t line;  // 1-based, header is line 1
    std::string message;
};

struct ParseResult {
    SightingTable table;
    std::vector<ParseError> errors;
};

// CSV schema: device_id,ts,lat,lon,accuracy_m. Malformed rows are recorded
// and skipped, never silently dropped.
ParseResult parse_sightings(const std::string& content);
ParseResult parse_sightings_file(const std::string& path);

void write_sightings(const SightingTable& table, const std::string& path);

struct CleaningConfig {
    double max_accuracy_m = 100.0;
    double max_plausible_speed_kmh = 1000.0;
    int min_sightings_per_device_day = 3;
    bool require_monotone_dedupe = true;

    void validate() const;
};

// Drop counters per quality dimension. records_out + drops == records_in.
struct CleaningReport {
    uint64_t records_in = 0;
    uint64_t records_out = 0;
    uint64_t dropped_consistency = 0;  // duplicate (device, ts)
    uint64_t dropped_accuracy = 0;     // accuracy_m over the cutoff
    uint64_t dropped_completeness = 0; // device-days below the sighting floor
    uint64_t dropped_timeliness = 0;   // implied speed over the teleport cutoff

    uint64_t total_dropped() const {
        return dropped_consistency + dropped_accuracy + dropped_completeness + dropped_timeliness;
    }
    bool balanced() const { return records_in == records_out + total_dropped(); }
    CleaningReport& operator+=(const CleaningReport& o);
    std::string to_json() const;
};

struct CleanResult {
    SightingTable table;  // sorted by (device_id, ts), strictly increasing ts per device
    CleaningReport report;
};

CleanResult clean(const SightingTable& input, const CleaningConfig& cfg);

}  // namespace sdipipe::ingest
