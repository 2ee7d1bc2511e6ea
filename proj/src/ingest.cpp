#include "sdipipe/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "sdipipe/csv.hpp"
#include "sdipipe/dates.hpp"

namespace sdipipe::ingest {

void SightingTable::finalize() {
    std::vector<uint32_t> order(device_ids.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(),
              [&](uint32_t a, uint32_t b) { return device_ids[a] < device_ids[b]; });
    std::vector<uint32_t> rank(device_ids.size());
    for (uint32_t i = 0; i < order.size(); ++i) rank[order[i]] = i;

    std::vector<std::string> sorted_ids(device_ids.size());
    for (uint32_t i = 0; i < order.size(); ++i) sorted_ids[i] = std::move(device_ids[order[i]]);
    device_ids = std::move(sorted_ids);
    for (auto& r : rows) r.device = rank[r.device];
    std::sort(rows.begin(), rows.end(), [](const Sighting& a, const Sighting& b) {
        return a.device != b.device ? a.device < b.device : a.ts < b.ts;
    });
}

ParseResult parse_sightings(const std::string& content) {
    ParseResult res;
    std::unordered_map<std::string_view, uint32_t> intern;
    std::vector<std::string_view> fields;
    size_t line_no = 0;
    bool header_seen = false;

    csv::for_each_line(content, [&](std::string_view line) {
        ++line_no;
        if (!header_seen) {
            header_seen = true;
            return;  // header row
        }
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) return;
        csv::split(line, fields);
        if (fields.size() != 5) {
            res.errors.push_back({line_no, "expected 5 fields, got " + std::to_string(fields.size())});
            return;
        }
        auto ts = csv::parse_i64(fields[1]);
        auto lat = csv::parse_double(fields[2]);
        auto lon = csv::parse_double(fields[3]);
        auto acc = csv::parse_double(fields[4]);
        if (fields[0].empty()) {
            res.errors.push_back({line_no, "empty device_id"});
            return;
        }
        if (!ts || *ts <= 0) {
            res.errors.push_back({line_no, "bad ts"});
            return;
        }
        if (!lat || !lon || !geo::GeoPoint::in_range(*lat, *lon)) {
            res.errors.push_back({line_no, "lat/lon out of range"});
            return;
        }
        if (!acc || !(*acc >= 0) || !std::isfinite(*acc)) {
            res.errors.push_back({line_no, "bad accuracy_m"});
            return;
        }
        auto [it, inserted] = intern.try_emplace(fields[0], uint32_t(res.table.device_ids.size()));
        if (inserted) res.table.device_ids.emplace_back(fields[0]);
        res.table.rows.push_back(
            {it->second, *ts, geo::GeoPoint{*lat, *lon}, static_cast<float>(*acc)});
    });
    // Interned keys view into device_ids strings that may reallocate; the map
    // dies here, so that is fine.
    return res;
}

ParseResult parse_sightings_file(const std::string& path) {
    return parse_sightings(csv::read_file(path));
}

void write_sightings(const SightingTable& table, const std::string& path) {
    csv::Writer w(path);
    w.line("device_id,ts,lat,lon,accuracy_m");
    std::string buf;
    for (const auto& s : table.rows) {
        buf.clear();
        buf += table.device_id(s.device);
        buf += ',';
        buf += std::to_string(s.ts);
        buf += ',';
        csv::append_fixed(buf, s.point.lat, 6);
        buf += ',';
        csv::append_fixed(buf, s.point.lon, 6);
        buf += ',';
        csv::append_fixed(buf, s.accuracy_m, 1);
        w.line(buf);
    }
    w.close();
}

void CleaningConfig::validate() const {
    if (max_accuracy_m <= 0 || max_plausible_speed_kmh <= 0 || min_sightings_per_device_day <= 0)
        throw data_error("cleaning thresholds must be strictly positive");
}

CleaningReport& CleaningReport::operator+=(const CleaningReport& o) {
    records_in += o.records_in;
    records_out += o.records_out;
    dropped_consistency += o.dropped_consistency;
    dropped_accuracy += o.dropped_accuracy;
    dropped_completeness += o.dropped_completeness;
    dropped_timeliness += o.dropped_timeliness;
    return *this;
}

std::string CleaningReport::to_json() const {
    std::string s = "{\n";
    auto add = [&](const char* k, uint64_t v, bool last = false) {
        s += "  \"";
        s += k;
        s += "\": ";
        s += std::to_string(v);
        s += last ? "\n" : ",\n";
    };
    add("records_in", records_in);
    add("records_out", records_out);
    add("dropped_consistency", dropped_consistency);
    add("dropped_accuracy", dropped_accuracy);
    add("dropped_completeness", dropped_completeness);
    add("dropped_timeliness", dropped_timeliness, true);
    s += "}\n";
    return s;
}

CleanResult clean(const SightingTable& input, const CleaningConfig& cfg) {
    cfg.validate();
    CleanResult res;
    res.table.device_ids = input.device_ids;
    res.report.records_in = input.rows.size();

    std::vector<Sighting> rows = input.rows;
    std::vector<uint32_t> rank(input.device_ids.size());
    {
        std::vector<uint32_t> order(input.device_ids.size());
        std::iota(order.begin(), order.end(), 0u);
        std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
            return input.device_ids[a] < input.device_ids[b];
        });
        for (uint32_t i = 0; i < order.size(); ++i) rank[order[i]] = i;
    }
    std::sort(rows.begin(), rows.end(), [&](const Sighting& a, const Sighting& b) {
        if (a.device != b.device) return rank[a.device] < rank[b.device];
        return a.ts < b.ts;
    });

    const double max_speed_mps = cfg.max_plausible_speed_kmh / 3.6;
    std::vector<Sighting> kept;
    kept.reserve(rows.size());

    size_t i = 0;
    while (i < rows.size()) {
        size_t j = i;
        while (j < rows.size() && rows[j].device == rows[i].device) ++j;
        // one device, time-sorted
        size_t dev_begin = kept.size();
        const Sighting* prev = nullptr;
        for (size_t k = i; k < j; ++k) {
            const Sighting& s = rows[k];
            if (cfg.require_monotone_dedupe && prev && s.ts == prev->ts) {
                ++res.report.dropped_consistency;
                continue;
            }
            if (s.accuracy_m > cfg.max_accuracy_m) {
                ++res.report.dropped_accuracy;
                continue;
            }
            if (prev) {
                double dt = double(s.ts - prev->ts);
                double d = geo::haversine_distance(prev->point, s.point);
                if (d > max_speed_mps * dt) {  // teleport
                    ++res.report.dropped_timeliness;
                    continue;
                }
            }
            kept.push_back(s);
            prev = &kept.back();
        }
        // completeness: drop device-days below the floor (UTC days)
        size_t w = dev_begin;
        size_t r = dev_begin;
        while (r < kept.size()) {
            int32_t day = Date::from_epoch_seconds(kept[r].ts).days();
            size_t day_end = r;
            while (day_end < kept.size() && Date::from_epoch_seconds(kept[day_end].ts).days() == day)
                ++day_end;
            size_t n_day = day_end - r;
            if (n_day >= static_cast<size_t>(cfg.min_sightings_per_device_day)) {
                if (w != r) std::copy(kept.begin() + r, kept.begin() + day_end, kept.begin() + w);
                w += n_day;
            } else {
                res.report.dropped_completeness += n_day;
            }
            r = day_end;
        }
        kept.resize(w);
        i = j;
    }

    res.report.records_out = kept.size();
    res.table.rows = std::move(kept);
    res.table.finalize();
    return res;
}

}  // namespace sdipipe::ingest
