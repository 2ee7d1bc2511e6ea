#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sdipipe/dates.hpp"
#include "sdipipe/geo.hpp"
#include "sdipipe/sdi.hpp"

namespace sdipipe::cases {

struct CaseRecord {
    Date date;
    metrics::Level level = metrics::Level::County;
    std::string geo_id;
    int64_t cumulative_confirmed = 0;
    int64_t new_confirmed = 0;
    double new_per_thousand = 0.0;  // filled by the join (needs populations)
};

// Wide cumulative time series: one county per row, one date per column.
struct CaseTable {
    std::vector<Date> dates;                 // column order, strictly increasing
    std::vector<std::string> county_ids;     // row order as parsed
    std::vector<std::vector<int64_t>> cumulative;  // [row][date]
    int corrections = 0;                     // negative daily diffs clamped to 0
    std::vector<std::string> row_errors;     // skipped rows, with reasons

    // Daily new cases per county (clamped diff), and roll-ups by summing
    // county-level new counts so every level stays mutually consistent.
    std::vector<CaseRecord> records(const geo::ZoneIndex& zones) const;
};

// Header: "county_id" followed by ISO date columns in increasing order
// (non-monotone dates are fatal). Unparsable cells skip the row with an
// error entry.
CaseTable parse_cases(const std::string& content);
CaseTable parse_cases_file(const std::string& path);

struct JoinedRow {
    Date date;
    std::string geo_id;  // county, state, or "US"
    metrics::Level level = metrics::Level::County;
    double sdi_smoothed = 0.0;
    int64_t new_confirmed = 0;
    double new_per_thousand = 0.0;
};

struct JoinResult {
    std::vector<JoinedRow> rows;
    std::vector<std::string> unmatched_geographies;  // present on one side only
};

// Inner join of case records with SDI rows on (level, geo, date).
// Per-thousand normalization uses the zone-file populations.
JoinResult join_with_sdi(const std::vector<CaseRecord>& case_records,
                         const std::vector<sdi::SdiSeries>& sdi_series,
                         const geo::ZoneIndex& zones);

}  // namespace sdipipe::cases
