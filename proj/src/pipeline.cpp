#include "sdipipe/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <thread>

#include <json.hpp>

#include "sdipipe/cases.hpp"
#include "sdipipe/csv.hpp"
#include "sdipipe/metrics.hpp"
#include "sdipipe/phase.hpp"
#include "sdipipe/svg.hpp"
#include "sdipipe/synth.hpp"
#include "sdipipe/weights.hpp"

namespace fs = std::filesystem;

namespace sdipipe::pipeline {

namespace {

Date jdate(const nlohmann::json& j, const char* key, Date fallback) {
    if (!j.contains(key)) return fallback;
    return Date::from_string(j.at(key).get<std::string>());
}

// All of a stage's outputs land under temporary names and are renamed on
// commit, so a failing stage leaves no partial artifacts behind.
class StageOutputs {
public:
    ~StageOutputs() {
        if (committed_) return;
        for (const auto& [tmp, target] : pending_) {
            std::error_code ec;
            fs::remove(tmp, ec);
        }
    }
    std::string stage(const std::string& target) {
        fs::create_directories(fs::path(target).parent_path());
        std::string tmp = target + ".tmp";
        pending_.push_back({tmp, target});
        return tmp;
    }
    void commit() {
        for (const auto& [tmp, target] : pending_) fs::rename(tmp, target);
        committed_ = true;
    }

private:
    std::vector<std::pair<std::string, std::string>> pending_;
    bool committed_ = false;
};

void write_text(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw data_error("cannot open for writing: " + path);
    os << content;
    if (!os) throw data_error("write failed: " + path);
}

void require_file(const std::string& path, const std::string& stage) {
    if (path.empty() || !fs::exists(path))
        throw data_error("stage " + stage + ": missing input file '" + path + "'");
}

// Deterministic per-device parallelism: results land in per-device slots
// and are concatenated in device order afterwards.
void parallel_devices(size_t n, int threads, const std::function<void(size_t)>& fn) {
    unsigned hw = std::thread::hardware_concurrency();
    size_t nt = threads > 0 ? size_t(threads) : size_t(hw ? hw : 1);
    nt = std::min(nt, n ? n : size_t(1));
    if (nt <= 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    std::vector<std::exception_ptr> errors(nt);
    for (size_t t = 0; t < nt; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

metrics::Level parse_level(std::string_view s) {
    if (s == "county") return metrics::Level::County;
    if (s == "state") return metrics::Level::State;
    if (s == "nation") return metrics::Level::Nation;
    throw data_error("unknown level: " + std::string(s));
}

std::vector<std::pair<size_t, size_t>> device_ranges(const ingest::SightingTable& t) {
    std::vector<std::pair<size_t, size_t>> ranges;
    size_t i = 0;
    while (i < t.rows.size()) {
        size_t j = i;
        while (j < t.rows.size() && t.rows[j].device == t.rows[i].device) ++j;
        ranges.push_back({i, j});
        i = j;
    }
    return ranges;
}

}  // namespace

PipelineConfig PipelineConfig::load(const std::string& json_path) {
    std::ifstream is(json_path);
    if (!is) throw usage_error("cannot open config: " + json_path);
    nlohmann::json j;
    try {
        is >> j;
    } catch (const std::exception& e) {
        throw usage_error("config " + json_path + ": " + e.what());
    }
    PipelineConfig c;
    fs::path base = fs::path(json_path).parent_path();
    auto respath = [&](std::string p) {
        if (p.empty() || fs::path(p).is_absolute()) return p;
        return (base / p).string();
    };
    const auto& paths = j.at("paths");
    c.zones_path = respath(paths.at("zones").get<std::string>());
    c.scenario_path = respath(paths.value("scenario", ""));
    c.out_dir = respath(paths.value("out_dir", "out"));
    c.sightings_path = respath(paths.value("sightings", c.out_dir + "/sightings.csv"));
    c.cases_path = respath(paths.value("cases", c.out_dir + "/cases.csv"));

    if (j.contains("analysis")) {
        c.analysis_start = jdate(j["analysis"], "start_date", c.analysis_start);
        c.analysis_end = jdate(j["analysis"], "end_date", c.analysis_end);
    }
    if (j.contains("benchmark")) {
        c.benchmark_start = jdate(j["benchmark"], "start_date", c.benchmark_start);
        c.benchmark_end = jdate(j["benchmark"], "end_date", c.benchmark_end);
    }
    if (j.contains("calibration")) {
        const auto& cal = j["calibration"];
        c.calibration_year = cal.value("year", c.calibration_year);
        c.default_target_rate = cal.value("default_target_rate", c.default_target_rate);
        if (cal.contains("target_rates"))
            for (auto it = cal["target_rates"].begin(); it != cal["target_rates"].end(); ++it)
                c.target_rates[it.key()] = it.value().get<double>();
    }
    if (j.contains("cleaning")) {
        const auto& cl = j["cleaning"];
        c.cleaning.max_accuracy_m = cl.value("max_accuracy_m", c.cleaning.max_accuracy_m);
        c.cleaning.max_plausible_speed_kmh =
            cl.value("max_plausible_speed_kmh", c.cleaning.max_plausible_speed_kmh);
        c.cleaning.min_sightings_per_device_day =
            cl.value("min_sightings_per_device_day", c.cleaning.min_sightings_per_device_day);
        c.cleaning.require_monotone_dedupe =
            cl.value("require_monotone_dedupe", c.cleaning.require_monotone_dedupe);
    }
    if (j.contains("trips")) {
        const auto& tr = j["trips"];
        c.trip_cfg.distance_threshold_m = tr.value("distance_threshold_m", 200.0);
        c.trip_cfg.time_threshold_s = tr.value("time_threshold_s", 900.0);
        c.trip_cfg.speed_threshold_mps = tr.value("speed_threshold_mps", 1.4);
        c.trip_cfg.min_trip_length_m = tr.value("min_trip_length_m", 300.0);
    }
    if (j.contains("clustering")) {
        const auto& cc = j["clustering"];
        c.cluster_cfg.eps_m = cc.value("eps_m", 100.0);
        c.cluster_cfg.min_points = cc.value("min_points", 5);
        c.cluster_cfg.merge_eps_m = cc.value("merge_eps_m", 150.0);
        c.cluster_cfg.static_speed_cap_mps = cc.value("static_speed_cap_mps", 1.4);
        c.cluster_cfg.night_start_hour = cc.value("night_start_hour", 19.0);
        c.cluster_cfg.night_end_hour = cc.value("night_end_hour", 8.0);
        c.cluster_cfg.work_dwell_floor_s = cc.value("work_dwell_floor_s", 7200.0);
        c.cluster_cfg.work_day_share_floor = cc.value("work_day_share_floor", 0.25);
        c.cluster_cfg.visit_gap_s = cc.value("visit_gap_s", int64_t(14400));
    }
    if (j.contains("sdi_weights")) {
        const auto& w = j["sdi_weights"];
        c.sdi_weights.w_home = w.value("home", 0.4);
        c.sdi_weights.w_work = w.value("work", 0.1);
        c.sdi_weights.w_nonwork = w.value("nonwork", 0.2);
        c.sdi_weights.w_dist = w.value("distance", 0.2);
        c.sdi_weights.w_outcounty = w.value("out_of_county", 0.1);
        c.sdi_weights.validate();
    }
    if (j.contains("smoothing")) {
        c.smoothing_window = j["smoothing"].value("window", 5);
        std::string mode = j["smoothing"].value("mode", "centered");
        if (mode == "trailing")
            c.smoothing_mode = sdi::SmoothingMode::Trailing;
        else if (mode == "centered")
            c.smoothing_mode = sdi::SmoothingMode::Centered;
        else
            throw usage_error("smoothing.mode must be 'centered' or 'trailing'");
    }
    if (j.contains("roc")) {
        c.roc_lookback = j["roc"].value("lookback_weekdays", 5);
        c.elbow_eps_pct = j["roc"].value("elbow_eps_pct", 1.0);
        c.fatigue_run_weekdays = j["roc"].value("fatigue_run_weekdays", 3);
    }
    if (j.contains("pivot_date")) c.pivot_date = Date::from_string(j["pivot_date"].get<std::string>());
    if (j.contains("panel")) {
        std::string p = j["panel"].get<std::string>();
        if (p == "observed")
            c.panel_observed_only = true;
        else if (p == "all")
            c.panel_observed_only = false;
        else
            throw usage_error("panel must be 'observed' or 'all'");
    }
    c.threads = j.value("threads", 0);
    return c;
}

std::string PipelineConfig::artifact(const std::string& name) const {
    return out_dir + "/" + name;
}

// -------------------------------------------------------------------------
// synth

void stage_synth(const PipelineConfig& cfg) {
    require_file(cfg.zones_path, "synth");
    require_file(cfg.scenario_path, "synth");
    geo::ZoneIndex zones = geo::ZoneIndex::load(cfg.zones_path);
    synth::Scenario sc = synth::Scenario::load(cfg.scenario_path);
    synth::GenResult gen = synth::generate(sc, zones);

    StageOutputs out;
    ingest::write_sightings(gen.sightings, out.stage(cfg.sightings_path));
    write_text(out.stage(cfg.cases_path), synth::render_case_csv(sc, zones));
    synth::write_truth_trips(gen.truth, out.stage(cfg.artifact("truth/trips.csv")));
    synth::write_truth_profiles(gen.truth, out.stage(cfg.artifact("truth/profiles.csv")));
    {
        auto tm = synth::truth_daily_metrics(gen.truth, zones);
        csv::Writer w(out.stage(cfg.artifact("truth/metrics.csv")));
        w.line(
            "date,level,geo_id,pct_staying_home,work_trips_pp,nonwork_trips_pp,trips_pp,miles_pp,"
            "pct_out_of_county");
        std::string buf;
        for (const auto& m : tm) {
            buf.clear();
            buf += m.date.to_string();
            buf += ',';
            buf += metrics::level_name(m.level);
            buf += ',';
            buf += m.geo_id;
            for (double v : {m.pct_staying_home, m.work_trips_pp, m.nonwork_trips_pp, m.trips_pp,
                             m.miles_pp, m.pct_out_of_county}) {
                buf += ',';
                csv::append_fixed(buf, v, 6);
            }
            w.line(buf);
        }
        w.close();
    }
    out.commit();
}

// -------------------------------------------------------------------------
// ingest

void stage_ingest(const PipelineConfig& cfg) {
    require_file(cfg.sightings_path, "ingest");
    ingest::ParseResult parsed = ingest::parse_sightings_file(cfg.sightings_path);
    ingest::CleanResult cleaned = ingest::clean(parsed.table, cfg.cleaning);

    StageOutputs out;
    ingest::write_sightings(cleaned.table, out.stage(cfg.artifact("cleaned.csv")));
    write_text(out.stage(cfg.artifact("cleaning_report.json")), cleaned.report.to_json());
    if (!parsed.errors.empty()) {
        std::string report;
        for (const auto& e : parsed.errors)
            report += "line " + std::to_string(e.line) + ": " + e.message + "\n";
        write_text(out.stage(cfg.artifact("parse_errors.txt")), report);
    }
    out.commit();
}

// -------------------------------------------------------------------------
// trips

void stage_trips(const PipelineConfig& cfg) {
    require_file(cfg.zones_path, "trips");
    require_file(cfg.artifact("cleaned.csv"), "trips");
    geo::ZoneIndex zones = geo::ZoneIndex::load(cfg.zones_path);
    ingest::ParseResult parsed = ingest::parse_sightings_file(cfg.artifact("cleaned.csv"));
    if (!parsed.errors.empty())
        throw data_error("trips: cleaned.csv is malformed (" +
                         std::to_string(parsed.errors.size()) + " bad rows)");
    const ingest::SightingTable& table = parsed.table;
    auto ranges = device_ranges(table);

    struct DeviceOut {
        std::vector<trips::Trip> trips;
        std::vector<ingest::Sighting> statics;
    };
    std::vector<DeviceOut> outs(ranges.size());

    parallel_devices(ranges.size(), cfg.threads, [&](size_t r) {
        auto [b, e] = ranges[r];
        const std::string& dev_id = table.device_id(table.rows[b].device);
        std::span<const ingest::Sighting> pts(&table.rows[b], e - b);
        auto annotated = trips::annotate(pts);
        trips::SegmentResult seg = trips::segment(annotated, cfg.trip_cfg, dev_id);

        std::vector<char> kept(seg.trips.size(), 0);
        auto filtered = trips::filter_short(seg.trips, cfg.trip_cfg);
        {
            std::set<std::string> kept_ids;
            for (const auto& t : filtered) kept_ids.insert(t.trip_id);
            for (size_t i = 0; i < seg.trips.size(); ++i)
                kept[i] = kept_ids.count(seg.trips[i].trip_id) != 0;
        }
        for (auto& t : filtered) {
            t.origin_zone = zones.locate_id(t.origin);
            t.destination_zone = zones.locate_id(t.destination);
        }
        outs[r].trips = std::move(filtered);
        for (size_t i = 0; i < annotated.size(); ++i) {
            int32_t a = seg.assignment[i];
            // points of removed short trips count as static downstream
            if (a == trips::kStatic || !kept[size_t(a)]) outs[r].statics.push_back(annotated[i].s);
        }
    });

    StageOutputs out;
    {
        csv::Writer w(out.stage(cfg.artifact("trips.csv")));
        w.line(
            "trip_id,device_id,departure_ts,arrival_ts,o_lat,o_lon,d_lat,d_lon,o_zone,d_zone,"
            "distance_m,n_points");
        std::string buf;
        for (const auto& d : outs) {
            for (const auto& t : d.trips) {
                buf.clear();
                buf += t.trip_id;
                buf += ',';
                buf += table.device_id(t.device);
                buf += ',';
                buf += std::to_string(t.departure_ts);
                buf += ',';
                buf += std::to_string(t.arrival_ts);
                buf += ',';
                csv::append_fixed(buf, t.origin.lat, 6);
                buf += ',';
                csv::append_fixed(buf, t.origin.lon, 6);
                buf += ',';
                csv::append_fixed(buf, t.destination.lat, 6);
                buf += ',';
                csv::append_fixed(buf, t.destination.lon, 6);
                buf += ',';
                if (t.origin_zone) buf += *t.origin_zone;
                buf += ',';
                if (t.destination_zone) buf += *t.destination_zone;
                buf += ',';
                csv::append_fixed(buf, t.distance_m, 1);
                buf += ',';
                buf += std::to_string(t.n_points);
                w.line(buf);
            }
        }
        w.close();
    }
    {
        csv::Writer w(out.stage(cfg.artifact("static_points.csv")));
        w.line("device_id,ts,lat,lon");
        std::string buf;
        for (const auto& d : outs) {
            for (const auto& s : d.statics) {
                buf.clear();
                buf += table.device_id(s.device);
                buf += ',';
                buf += std::to_string(s.ts);
                buf += ',';
                csv::append_fixed(buf, s.point.lat, 6);
                buf += ',';
                csv::append_fixed(buf, s.point.lon, 6);
                w.line(buf);
            }
        }
        w.close();
    }
    out.commit();
}

// -------------------------------------------------------------------------
// activities

void stage_activities(const PipelineConfig& cfg) {
    require_file(cfg.zones_path, "activities");
    require_file(cfg.artifact("static_points.csv"), "activities");
    require_file(cfg.artifact("cleaned.csv"), "activities");
    geo::ZoneIndex zones = geo::ZoneIndex::load(cfg.zones_path);

    // static points, grouped per device
    struct DeviceStatics {
        std::string device_id;
        std::vector<activity::StaticPoint> pts;
    };
    std::vector<DeviceStatics> devices;
    {
        std::string content = csv::read_file(cfg.artifact("static_points.csv"));
        std::vector<std::string_view> f;
        bool header = true;
        csv::for_each_line(content, [&](std::string_view line) {
            if (header) {
                header = false;
                return;
            }
            if (line.empty()) return;
            csv::split(line, f);
            if (f.size() != 4) throw data_error("static_points.csv: bad row");
            std::string dev(f[0]);
            auto ts = csv::parse_i64(f[1]);
            auto lat = csv::parse_double(f[2]);
            auto lon = csv::parse_double(f[3]);
            if (!ts || !lat || !lon) throw data_error("static_points.csv: bad row");
            if (devices.empty() || devices.back().device_id != dev)
                devices.push_back({dev, {}});
            devices.back().pts.push_back({*ts, geo::GeoPoint{*lat, *lon}});
        });
    }
    // observed local dates per device (from the cleaned feed)
    std::map<std::string, std::set<int32_t>> observed_days;
    {
        ingest::ParseResult parsed = ingest::parse_sightings_file(cfg.artifact("cleaned.csv"));
        for (const auto& s : parsed.table.rows) {
            auto zi = zones.locate(s.point);
            int32_t off = zi ? zones.zone(*zi).utc_offset_s : 0;
            observed_days[parsed.table.device_id(s.device)].insert(
                Date::from_epoch_seconds(s.ts, off).days());
        }
    }

    struct DeviceResult {
        std::vector<activity::ActivityCluster> clusters;
        std::optional<activity::DeviceProfile> profile;
        std::string excluded_reason;
    };
    std::vector<DeviceResult> results(devices.size());

    parallel_devices(devices.size(), cfg.threads, [&](size_t i) {
        const auto& dev = devices[i];
        // local clock: fixed offset of the zone holding the first static point
        int32_t off = 0;
        if (!dev.pts.empty()) {
            auto zi = zones.locate(dev.pts.front().point);
            if (zi) off = zones.zone(*zi).utc_offset_s;
        }
        auto clusters = activity::cluster_activities(dev.device_id, dev.pts, cfg.cluster_cfg, off);
        results[i].clusters = clusters;
        if (clusters.empty()) {
            results[i].excluded_reason = "no activity clusters";
            return;
        }
        auto home = activity::identify_home(clusters, zones, cfg.cluster_cfg, off);
        if (!home.zone_id) {
            results[i].excluded_reason = "home centroid outside all zones";
            return;
        }
        int days = 0;
        auto oit = observed_days.find(dev.device_id);
        if (oit != observed_days.end()) days = int(oit->second.size());
        auto work =
            activity::identify_work(clusters, home.cluster, zones, cfg.cluster_cfg, off, days);
        activity::DeviceProfile p;
        p.device_id = dev.device_id;
        p.home_zone = *home.zone_id;
        if (work.zone_id && *work.zone_id != *home.zone_id) {
            p.work_zone = work.zone_id;
            p.employed = true;
        }
        results[i].profile = std::move(p);
    });

    StageOutputs out;
    {
        csv::Writer w(out.stage(cfg.artifact("profiles.csv")));
        w.line("device_id,home_zone,work_zone,employed");
        std::string buf;
        for (const auto& r : results) {
            if (!r.profile) continue;
            buf.clear();
            buf += r.profile->device_id;
            buf += ',';
            buf += r.profile->home_zone;
            buf += ',';
            if (r.profile->work_zone) buf += *r.profile->work_zone;
            buf += ',';
            buf += r.profile->employed ? '1' : '0';
            w.line(buf);
        }
        w.close();
    }
    {
        csv::Writer w(out.stage(cfg.artifact("clusters.csv")));
        w.line("device_id,cluster_id,lat,lon,radius_m,total_dwell_s,distinct_days,n_points");
        std::string buf;
        for (size_t i = 0; i < devices.size(); ++i) {
            for (const auto& c : results[i].clusters) {
                buf.clear();
                buf += devices[i].device_id;
                buf += ',';
                buf += c.cluster_id;
                buf += ',';
                csv::append_fixed(buf, c.centroid.lat, 6);
                buf += ',';
                csv::append_fixed(buf, c.centroid.lon, 6);
                buf += ',';
                csv::append_fixed(buf, c.radius_m, 1);
                buf += ',';
                buf += std::to_string(c.total_dwell_s);
                buf += ',';
                buf += std::to_string(c.distinct_days);
                buf += ',';
                buf += std::to_string(c.point_index.size());
                w.line(buf);
            }
        }
        w.close();
    }
    {
        std::string report;
        for (size_t i = 0; i < devices.size(); ++i)
            if (!results[i].profile)
                report += devices[i].device_id + "," + results[i].excluded_reason + "\n";
        if (!report.empty()) write_text(out.stage(cfg.artifact("excluded_devices.csv")), report);
    }
    out.commit();
}

// -------------------------------------------------------------------------
// interstage loaders

std::vector<trips::Trip> load_trips_csv(const std::string& path,
                                        std::vector<std::string>* device_ids) {
    std::string content = csv::read_file(path);
    std::vector<trips::Trip> out;
    std::vector<std::string> ids;
    std::map<std::string, uint32_t> intern;
    std::vector<std::string_view> f;
    bool header = true;
    csv::for_each_line(content, [&](std::string_view line) {
        if (header) {
            header = false;
            return;
        }
        if (line.empty()) return;
        csv::split(line, f);
        if (f.size() != 12) throw data_error(path + ": bad trip row");
        trips::Trip t;
        t.trip_id = std::string(f[0]);
        std::string dev(f[1]);
        auto it = intern.find(dev);
        if (it == intern.end()) {
            it = intern.emplace(dev, uint32_t(ids.size())).first;
            ids.push_back(dev);
        }
        t.device = it->second;
        t.departure_ts = *csv::parse_i64(f[2]);
        t.arrival_ts = *csv::parse_i64(f[3]);
        t.origin = {*csv::parse_double(f[4]), *csv::parse_double(f[5])};
        t.destination = {*csv::parse_double(f[6]), *csv::parse_double(f[7])};
        if (!f[8].empty()) t.origin_zone = std::string(f[8]);
        if (!f[9].empty()) t.destination_zone = std::string(f[9]);
        t.distance_m = *csv::parse_double(f[10]);
        t.n_points = uint32_t(*csv::parse_i64(f[11]));
        out.push_back(std::move(t));
    });
    if (device_ids) *device_ids = std::move(ids);
    return out;
}

std::vector<activity::DeviceProfile> load_profiles_csv(const std::string& path) {
    std::string content = csv::read_file(path);
    std::vector<activity::DeviceProfile> out;
    std::vector<std::string_view> f;
    bool header = true;
    csv::for_each_line(content, [&](std::string_view line) {
        if (header) {
            header = false;
            return;
        }
        if (line.empty()) return;
        csv::split(line, f);
        if (f.size() != 4) throw data_error(path + ": bad profile row");
        activity::DeviceProfile p;
        p.device_id = std::string(f[0]);
        p.home_zone = std::string(f[1]);
        if (!f[2].empty()) p.work_zone = std::string(f[2]);
        p.employed = f[3] == "1";
        out.push_back(std::move(p));
    });
    return out;
}

std::vector<metrics::DailyMetrics> load_metrics_csv(const std::string& path) {
    std::string content = csv::read_file(path);
    std::vector<metrics::DailyMetrics> out;
    std::vector<std::string_view> f;
    bool header = true;
    csv::for_each_line(content, [&](std::string_view line) {
        if (header) {
            header = false;
            return;
        }
        if (line.empty()) return;
        csv::split(line, f);
        if (f.size() != 9) throw data_error(path + ": bad metrics row");
        metrics::DailyMetrics m;
        m.date = Date::from_string(std::string(f[0]));
        m.level = parse_level(f[1]);
        m.geo_id = std::string(f[2]);
        m.pct_staying_home = *csv::parse_double(f[3]);
        m.work_trips_pp = *csv::parse_double(f[4]);
        m.nonwork_trips_pp = *csv::parse_double(f[5]);
        m.trips_pp = *csv::parse_double(f[6]);
        m.miles_pp = *csv::parse_double(f[7]);
        m.pct_out_of_county = *csv::parse_double(f[8]);
        out.push_back(std::move(m));
    });
    return out;
}

std::vector<sdi::SdiSeries> load_sdi_csv(const std::string& path) {
    std::string content = csv::read_file(path);
    std::map<std::string, sdi::SdiSeries> by_geo;
    std::vector<std::string_view> f;
    bool header = true;
    csv::for_each_line(content, [&](std::string_view line) {
        if (header) {
            header = false;
            return;
        }
        if (line.empty()) return;
        csv::split(line, f);
        if (f.size() != 5) throw data_error(path + ": bad sdi row");
        metrics::Level level = parse_level(f[1]);
        std::string key = metrics::geo_key(level, std::string(f[2]));
        auto& s = by_geo[key];
        s.level = level;
        s.geo_id = std::string(f[2]);
        s.dates.push_back(Date::from_string(std::string(f[0])));
        s.values.push_back(*csv::parse_double(f[3]));
        s.smoothed.push_back(*csv::parse_double(f[4]));
    });
    std::vector<sdi::SdiSeries> out;
    out.reserve(by_geo.size());
    for (auto& [k, s] : by_geo) out.push_back(std::move(s));
    return out;
}

namespace {

// Shared assembly for the weights/metrics stages.
struct WeightingContext {
    geo::ZoneIndex zones;
    weights::ProfileTable profiles;
    weights::CountyWeights cw;
    std::vector<trips::Trip> trips;
    std::vector<size_t> trip_profile;       // profile index per kept trip
    std::vector<int32_t> trip_local_date;   // local date of departure
    std::vector<Date> calib_days;
    int32_t offset_of_profile(size_t pi) const {
        auto zi = zones.find_zone(profiles.profiles[pi].home_zone);
        return zi ? zones.zone(*zi).utc_offset_s : 0;
    }
};

WeightingContext load_weighting_context(const PipelineConfig& cfg) {
    require_file(cfg.zones_path, "weights");
    require_file(cfg.artifact("trips.csv"), "weights");
    require_file(cfg.artifact("profiles.csv"), "weights");
    WeightingContext ctx{geo::ZoneIndex::load(cfg.zones_path), {}, {}, {}, {}, {}, {}};
    ctx.profiles = weights::ProfileTable::build(load_profiles_csv(cfg.artifact("profiles.csv")),
                                                ctx.zones);
    ctx.cw = weights::county_device_weights(ctx.profiles, ctx.zones);

    std::vector<std::string> trip_devices;
    auto all_trips = load_trips_csv(cfg.artifact("trips.csv"), &trip_devices);
    ctx.trips.reserve(all_trips.size());
    for (auto& t : all_trips) {
        auto pi = ctx.profiles.find(trip_devices[t.device]);
        if (!pi) continue;  // unprofiled devices carry no weight
        ctx.trip_profile.push_back(*pi);
        ctx.trip_local_date.push_back(
            Date::from_epoch_seconds(t.departure_ts, ctx.offset_of_profile(*pi)).days());
        ctx.trips.push_back(std::move(t));
    }
    ctx.calib_days = weights::calibration_weekdays(cfg.calibration_year);
    return ctx;
}

std::map<std::string, double> effective_target_rates(const PipelineConfig& cfg,
                                                     const geo::ZoneIndex& zones) {
    std::map<std::string, double> rates;
    for (const auto& s : zones.state_ids()) {
        auto it = cfg.target_rates.find(s);
        rates[s] = it != cfg.target_rates.end() ? it->second : cfg.default_target_rate;
    }
    return rates;
}

std::map<std::string, weights::TripWeightFactor> compute_factors(const PipelineConfig& cfg,
                                                                 WeightingContext& ctx) {
    std::set<int32_t> calib_set;
    for (Date d : ctx.calib_days) calib_set.insert(d.days());
    std::vector<trips::Trip> calib_trips;
    std::vector<size_t> calib_profile;
    for (size_t i = 0; i < ctx.trips.size(); ++i) {
        if (calib_set.count(ctx.trip_local_date[i])) {
            calib_trips.push_back(ctx.trips[i]);
            calib_profile.push_back(ctx.trip_profile[i]);
        }
    }
    return weights::state_trip_weights(calib_trips, calib_profile, ctx.profiles, ctx.cw,
                                       effective_target_rates(cfg, ctx.zones),
                                       int(ctx.calib_days.size()));
}

}  // namespace

// -------------------------------------------------------------------------
// weights

void stage_weights(const PipelineConfig& cfg) {
    WeightingContext ctx = load_weighting_context(cfg);
    auto factors = compute_factors(cfg, ctx);

    StageOutputs out;
    {
        csv::Writer w(out.stage(cfg.artifact("device_weights.csv")));
        w.line("device_id,home_county,home_state,weight");
        std::string buf;
        for (size_t i = 0; i < ctx.profiles.profiles.size(); ++i) {
            buf.clear();
            buf += ctx.profiles.profiles[i].device_id;
            buf += ',';
            buf += ctx.profiles.home_county[i];
            buf += ',';
            buf += ctx.profiles.home_state[i];
            buf += ',';
            csv::append_fixed(buf, ctx.cw.device_weight[i], 6);
            w.line(buf);
        }
        w.close();
    }
    {
        csv::Writer w(out.stage(cfg.artifact("county_weights.csv")));
        w.line("county_id,population,devices,weight");
        std::string buf;
        for (const auto& [county, weight] : ctx.cw.county_weight) {
            buf.clear();
            buf += county;
            buf += ',';
            csv::append_fixed(buf, ctx.zones.county_population(county), 0);
            buf += ',';
            buf += std::to_string(ctx.cw.county_devices.at(county));
            buf += ',';
            csv::append_fixed(buf, weight, 6);
            w.line(buf);
        }
        w.close();
    }
    {
        csv::Writer w(out.stage(cfg.artifact("state_trip_factors.csv")));
        w.line("state_id,observed_rate,target_rate,factor");
        std::string buf;
        for (const auto& [state, f] : factors) {
            buf.clear();
            buf += state;
            buf += ',';
            csv::append_fixed(buf, f.observed_rate, 6);
            buf += ',';
            csv::append_fixed(buf, f.target_rate, 6);
            buf += ',';
            csv::append_fixed(buf, f.factor, 9);
            w.line(buf);
        }
        w.close();
    }
    if (!ctx.cw.unrepresented.empty()) {
        std::string rep;
        for (const auto& c : ctx.cw.unrepresented) rep += c + "\n";
        write_text(out.stage(cfg.artifact("unrepresented_counties.txt")), rep);
    }
    out.commit();
}

// -------------------------------------------------------------------------
// metrics

void stage_metrics(const PipelineConfig& cfg) {
    WeightingContext ctx = load_weighting_context(cfg);
    require_file(cfg.artifact("cleaned.csv"), "metrics");
    auto factors = compute_factors(cfg, ctx);

    // per-profile observed local dates (in-panel definition)
    std::vector<std::set<int32_t>> observed(ctx.profiles.profiles.size());
    {
        ingest::ParseResult parsed = ingest::parse_sightings_file(cfg.artifact("cleaned.csv"));
        for (const auto& s : parsed.table.rows) {
            auto pi = ctx.profiles.find(parsed.table.device_id(s.device));
            if (!pi) continue;
            observed[*pi].insert(
                Date::from_epoch_seconds(s.ts, ctx.offset_of_profile(*pi)).days());
        }
    }

    // resolve trips once
    std::vector<metrics::TripForMetrics> tfm(ctx.trips.size());
    for (size_t i = 0; i < ctx.trips.size(); ++i) {
        const trips::Trip& t = ctx.trips[i];
        metrics::TripForMetrics& m = tfm[i];
        m.profile = ctx.trip_profile[i];
        m.distance_m = t.distance_m;
        const auto& prof = ctx.profiles.profiles[m.profile];
        m.is_work = prof.work_zone &&
                    ((t.origin_zone && *t.origin_zone == *prof.work_zone) ||
                     (t.destination_zone && *t.destination_zone == *prof.work_zone));
        if (t.origin_zone && t.destination_zone) {
            auto oz = ctx.zones.find_zone(*t.origin_zone);
            auto dz = ctx.zones.find_zone(*t.destination_zone);
            if (oz && dz) {
                m.od_counties_known = true;
                m.out_of_county =
                    ctx.zones.zone(*oz).county_id != ctx.zones.zone(*dz).county_id;
            }
        }
    }

    std::vector<Date> days = weekdays_between(cfg.analysis_start, cfg.analysis_end);
    std::map<int32_t, std::vector<size_t>> trips_by_day;
    for (size_t i = 0; i < ctx.trips.size(); ++i)
        trips_by_day[ctx.trip_local_date[i]].push_back(i);

    StageOutputs out;
    std::vector<metrics::DailyMetrics> all_rows;
    for (Date day : days) {
        std::vector<size_t> panel;
        for (size_t pi = 0; pi < ctx.profiles.profiles.size(); ++pi)
            if (!cfg.panel_observed_only || observed[pi].count(day.days())) panel.push_back(pi);
        std::vector<metrics::TripForMetrics> day_trips;
        auto it = trips_by_day.find(day.days());
        if (it != trips_by_day.end())
            for (size_t i : it->second) day_trips.push_back(tfm[i]);
        auto rows =
            metrics::daily_metrics(day, panel, day_trips, ctx.profiles, ctx.cw, factors, ctx.zones);
        all_rows.insert(all_rows.end(), rows.begin(), rows.end());
    }

    {
        csv::Writer w(out.stage(cfg.artifact("metrics.csv")));
        w.line(
            "date,level,geo_id,pct_staying_home,work_trips_pp,nonwork_trips_pp,trips_pp,miles_pp,"
            "pct_out_of_county");
        std::string buf;
        for (const auto& m : all_rows) {
            buf.clear();
            buf += m.date.to_string();
            buf += ',';
            buf += metrics::level_name(m.level);
            buf += ',';
            buf += m.geo_id;
            for (double v : {m.pct_staying_home, m.work_trips_pp, m.nonwork_trips_pp, m.trips_pp,
                             m.miles_pp, m.pct_out_of_county}) {
                buf += ',';
                csv::append_fixed(buf, v, 6);
            }
            w.line(buf);
        }
        w.close();
    }
    {
        std::vector<Date> bdays = weekdays_between(cfg.benchmark_start, cfg.benchmark_end);
        auto bench = metrics::compute_benchmark(all_rows, bdays);
        csv::Writer w(out.stage(cfg.artifact("benchmark.csv")));
        w.line(
            "level,geo_id,pct_staying_home,work_trips_pp,nonwork_trips_pp,trips_pp,miles_pp,pct_"
            "out_of_county");
        std::string buf;
        for (const auto& [key, b] : bench) {
            buf.clear();
            buf += metrics::level_name(b.level);
            buf += ',';
            buf += b.geo_id;
            for (double v : {b.pct_staying_home, b.work_trips_pp, b.nonwork_trips_pp, b.trips_pp,
                             b.miles_pp, b.pct_out_of_county}) {
                buf += ',';
                csv::append_fixed(buf, v, 6);
            }
            w.line(buf);
        }
        w.close();
    }
    out.commit();
}

// -------------------------------------------------------------------------
// sdi

namespace {

std::map<std::string, metrics::Benchmark> load_benchmark_csv(const std::string& path) {
    std::string content = csv::read_file(path);
    std::map<std::string, metrics::Benchmark> out;
    std::vector<std::string_view> f;
    bool header = true;
    csv::for_each_line(content, [&](std::string_view line) {
        if (header) {
            header = false;
            return;
        }
        if (line.empty()) return;
        csv::split(line, f);
        if (f.size() != 8) throw data_error(path + ": bad benchmark row");
        metrics::Benchmark b;
        b.level = parse_level(f[0]);
        b.geo_id = std::string(f[1]);
        b.pct_staying_home = *csv::parse_double(f[2]);
        b.work_trips_pp = *csv::parse_double(f[3]);
        b.nonwork_trips_pp = *csv::parse_double(f[4]);
        b.trips_pp = *csv::parse_double(f[5]);
        b.miles_pp = *csv::parse_double(f[6]);
        b.pct_out_of_county = *csv::parse_double(f[7]);
        out[metrics::geo_key(b.level, b.geo_id)] = b;
    });
    return out;
}

}  // namespace

void stage_sdi(const PipelineConfig& cfg) {
    require_file(cfg.artifact("metrics.csv"), "sdi");
    require_file(cfg.artifact("benchmark.csv"), "sdi");
    auto rows = load_metrics_csv(cfg.artifact("metrics.csv"));
    auto bench = load_benchmark_csv(cfg.artifact("benchmark.csv"));

    std::map<std::string, sdi::SdiSeries> series;
    for (const auto& m : rows) {
        std::string key = metrics::geo_key(m.level, m.geo_id);
        auto bit = bench.find(key);
        if (bit == bench.end()) continue;  // no benchmark -> no SDI for this geo
        auto& s = series[key];
        s.level = m.level;
        s.geo_id = m.geo_id;
        s.dates.push_back(m.date);
        s.values.push_back(sdi::sdi_score(m, bit->second, cfg.sdi_weights).value);
    }

    StageOutputs out;
    csv::Writer w(out.stage(cfg.artifact("sdi.csv")));
    w.line("date,level,geo_id,sdi,sdi_smoothed");
    std::string buf;
    for (auto& [key, s] : series) {
        s.smoothed = sdi::moving_average(s.values, cfg.smoothing_window, cfg.smoothing_mode);
        for (size_t i = 0; i < s.dates.size(); ++i) {
            buf.clear();
            buf += s.dates[i].to_string();
            buf += ',';
            buf += metrics::level_name(s.level);
            buf += ',';
            buf += s.geo_id;
            buf += ',';
            csv::append_fixed(buf, s.values[i], 4);
            buf += ',';
            csv::append_fixed(buf, s.smoothed[i], 4);
            w.line(buf);
        }
    }
    w.close();
    out.commit();
}

// -------------------------------------------------------------------------
// phases

void stage_phases(const PipelineConfig& cfg) {
    require_file(cfg.artifact("sdi.csv"), "phases");
    auto series = load_sdi_csv(cfg.artifact("sdi.csv"));
    if (series.empty()) throw data_error("stage phases: sdi.csv has no series");

    StageOutputs out;
    std::vector<phase::PhaseReport> reports;
    {
        csv::Writer w(out.stage(cfg.artifact("roc.csv")));
        w.line("date,level,geo_id,roc");
        std::string buf;
        for (const auto& s : series) {
            phase::RocSeries r = phase::roc(s, cfg.roc_lookback);
            for (size_t i = 0; i < r.dates.size(); ++i) {
                buf.clear();
                buf += r.dates[i].to_string();
                buf += ',';
                buf += metrics::level_name(r.level);
                buf += ',';
                buf += r.geo_id;
                buf += ',';
                if (r.values[i]) csv::append_fixed(buf, *r.values[i], 4);
                w.line(buf);
            }
            if (s.level == metrics::Level::County) continue;  // reports for states + nation
            phase::PhaseReport rep;
            rep.geo_id = s.geo_id;
            rep.level = s.level;
            rep.dates = phase::detect_phases(r, cfg.elbow_eps_pct, cfg.fatigue_run_weekdays);
            rep.weeks = phase::week_compare(s.dates, s.values, cfg.pivot_date);
            rep.ttest = phase::welch_t_test(rep.weeks.before, rep.weeks.after);
            reports.push_back(std::move(rep));
        }
        w.close();
    }
    // nation first, then states alphabetically
    std::sort(reports.begin(), reports.end(), [](const auto& a, const auto& b) {
        if (a.level != b.level) return int(a.level) > int(b.level);
        return a.geo_id < b.geo_id;
    });
    write_text(out.stage(cfg.artifact("phase_report.json")), phase::phase_report_json(reports));
    out.commit();
}

// -------------------------------------------------------------------------
// cases

void stage_cases(const PipelineConfig& cfg) {
    require_file(cfg.zones_path, "cases");
    require_file(cfg.cases_path, "cases");
    require_file(cfg.artifact("sdi.csv"), "cases");
    geo::ZoneIndex zones = geo::ZoneIndex::load(cfg.zones_path);
    cases::CaseTable table = cases::parse_cases_file(cfg.cases_path);
    auto records = table.records(zones);
    auto series = load_sdi_csv(cfg.artifact("sdi.csv"));
    auto join = cases::join_with_sdi(records, series, zones);
    if (join.rows.empty())
        std::cerr << "warning: cases/sdi join is empty (disjoint dates or geographies)\n";

    StageOutputs out;
    {
        csv::Writer w(out.stage(cfg.artifact("cases_joined.csv")));
        w.line("date,geo_id,sdi_smoothed,new_confirmed,new_per_thousand");
        std::string buf;
        for (const auto& r : join.rows) {
            buf.clear();
            buf += r.date.to_string();
            buf += ',';
            buf += r.geo_id;
            buf += ',';
            csv::append_fixed(buf, r.sdi_smoothed, 4);
            buf += ',';
            buf += std::to_string(r.new_confirmed);
            buf += ',';
            csv::append_fixed(buf, r.new_per_thousand, 6);
            w.line(buf);
        }
        w.close();
    }
    {
        // state table mirroring the before/after comparison: raw-SDI week
        // means next to per-thousand case-rate week means
        csv::Writer w(out.stage(cfg.artifact("state_weekly.csv")));
        w.line("state_id,sdi_before,sdi_after,cases_before_per_k,cases_after_per_k");
        std::map<std::string, std::pair<std::vector<Date>, std::vector<double>>> state_cases;
        for (const auto& rec : records) {
            if (rec.level != metrics::Level::State) continue;
            double pop = zones.state_population(rec.geo_id);
            state_cases[rec.geo_id].first.push_back(rec.date);
            state_cases[rec.geo_id].second.push_back(
                pop > 0 ? double(rec.new_confirmed) * 1000.0 / pop : 0.0);
        }
        std::string buf;
        for (const auto& s : series) {
            if (s.level != metrics::Level::State) continue;
            phase::WeekCompare sdi_wc = phase::week_compare(s.dates, s.values, cfg.pivot_date);
            auto it = state_cases.find(s.geo_id);
            if (it == state_cases.end()) continue;
            // restrict case days to weekdays so the windows match the SDI ones
            std::vector<Date> wd;
            std::vector<double> wv;
            for (size_t i = 0; i < it->second.first.size(); ++i)
                if (it->second.first[i].is_weekday()) {
                    wd.push_back(it->second.first[i]);
                    wv.push_back(it->second.second[i]);
                }
            phase::WeekCompare case_wc = phase::week_compare(wd, wv, cfg.pivot_date);
            buf.clear();
            buf += s.geo_id;
            buf += ',';
            csv::append_fixed(buf, sdi_wc.mean_before, 4);
            buf += ',';
            csv::append_fixed(buf, sdi_wc.mean_after, 4);
            buf += ',';
            csv::append_fixed(buf, case_wc.mean_before, 6);
            buf += ',';
            csv::append_fixed(buf, case_wc.mean_after, 6);
            w.line(buf);
        }
        w.close();
    }
    out.commit();
}

// -------------------------------------------------------------------------
// report

void stage_report(const PipelineConfig& cfg) {
    require_file(cfg.artifact("sdi.csv"), "report");
    require_file(cfg.artifact("metrics.csv"), "report");
    auto series = load_sdi_csv(cfg.artifact("sdi.csv"));
    auto rows = load_metrics_csv(cfg.artifact("metrics.csv"));
    auto bench = load_benchmark_csv(cfg.artifact("benchmark.csv"));

    const sdi::SdiSeries* nation = nullptr;
    for (const auto& s : series)
        if (s.level == metrics::Level::Nation) nation = &s;
    if (!nation || nation->dates.empty())
        throw data_error("stage report: sdi.csv has no national series");

    phase::RocSeries nroc = phase::roc(*nation, cfg.roc_lookback);
    phase::PhaseDates pd = phase::detect_phases(nroc, cfg.elbow_eps_pct, cfg.fatigue_run_weekdays);

    auto band_of = [&](std::optional<Date> a, std::optional<Date> b, const char* color,
                       const char* label) -> std::optional<svg::Band> {
        if (!a || !b || !(*a < *b)) return std::nullopt;
        return svg::Band{*a, *b, color, label};
    };
    std::vector<svg::Band> bands;
    if (auto b = band_of(pd.inertia_start, pd.fatigue_start, "#ffd27f", "inertia")) bands.push_back(*b);
    if (auto b = band_of(pd.fatigue_start, pd.fatigue_end, "#ff9d9d", "fatigue")) bands.push_back(*b);

    StageOutputs out;
    // chart 1: national metrics + SDI
    {
        std::string bkey = metrics::geo_key(metrics::Level::Nation, "US");
        if (!bench.count(bkey)) throw data_error("stage report: missing national benchmark");
        const auto& b = bench.at(bkey);
        svg::Panel top;
        top.title = "National social distancing index (0-100)";
        top.y_label = "SDI";
        top.series.push_back({"sdi", "#bbbbbb", nation->dates, nation->values, false});
        top.series.push_back({"sdi (5-day avg)", "#1f5fbf", nation->dates, nation->smoothed, false});
        for (const auto& band : bands) top.bands.push_back(band);

        svg::Panel bottom;
        bottom.title = "National mobility metrics, % of benchmark";
        bottom.y_label = "% of benchmark";
        struct Pick {
            const char* label;
            const char* color;
            double metrics::DailyMetrics::*field;
            double denom;
        };
        std::vector<Pick> picks = {
            {"staying home", "#2a9d2a", &metrics::DailyMetrics::pct_staying_home,
             b.pct_staying_home},
            {"work trips", "#d07000", &metrics::DailyMetrics::work_trips_pp, b.work_trips_pp},
            {"non-work trips", "#9467bd", &metrics::DailyMetrics::nonwork_trips_pp,
             b.nonwork_trips_pp},
            {"miles", "#c03030", &metrics::DailyMetrics::miles_pp, b.miles_pp},
            {"out-of-county", "#17becf", &metrics::DailyMetrics::pct_out_of_county,
             b.pct_out_of_county},
        };
        for (const auto& p : picks) {
            svg::Series s;
            s.label = p.label;
            s.color = p.color;
            for (const auto& m : rows) {
                if (m.level != metrics::Level::Nation) continue;
                s.dates.push_back(m.date);
                s.values.push_back(p.denom > 0 ? 100.0 * (m.*(p.field)) / p.denom : 0.0);
            }
            bottom.series.push_back(std::move(s));
        }
        std::string comment = "date,sdi,sdi_smoothed\n";
        for (size_t i = 0; i < nation->dates.size(); ++i)
            comment += nation->dates[i].to_string() + "," + csv::fixed(nation->values[i], 4) + "," +
                       csv::fixed(nation->smoothed[i], 4) + "\n";
        write_text(out.stage(cfg.artifact("report_metrics_sdi.svg")),
                   svg::render_panels({top, bottom}, 920, comment));
    }
    // chart 2: SDI + ROC with phase shading
    {
        svg::Panel top;
        top.title = "Smoothed SDI";
        top.y_label = "SDI";
        top.series.push_back({"sdi (smoothed)", "#1f5fbf", nation->dates, nation->smoothed, false});
        for (const auto& band : bands) top.bands.push_back(band);

        svg::Panel bottom;
        bottom.title = "SDI rate of change (oscillator)";
        bottom.y_label = "ROC, %";
        svg::Series rocline{"roc", "#b02020", {}, {}, false};
        for (size_t i = 0; i < nroc.dates.size(); ++i) {
            if (!nroc.values[i]) continue;
            rocline.dates.push_back(nroc.dates[i]);
            rocline.values.push_back(*nroc.values[i]);
        }
        svg::Series zero{"0", "#555555", {}, {}, true};
        if (!rocline.dates.empty()) {
            zero.dates = {rocline.dates.front(), rocline.dates.back()};
            zero.values = {0.0, 0.0};
        }
        bottom.series.push_back(zero);
        bottom.series.push_back(rocline);
        for (const auto& band : bands) bottom.bands.push_back(band);
        if (pd.roc_peak_date)
            bottom.markers.push_back({*pd.roc_peak_date, "#333333", "roc peak"});

        std::string comment = "date,roc\n";
        for (size_t i = 0; i < nroc.dates.size(); ++i)
            if (nroc.values[i])
                comment +=
                    nroc.dates[i].to_string() + "," + csv::fixed(*nroc.values[i], 4) + "\n";
        write_text(out.stage(cfg.artifact("report_sdi_roc.svg")),
                   svg::render_panels({top, bottom}, 920, comment));
    }
    // chart 3: per-state before/after lines over case bars
    {
        require_file(cfg.artifact("state_weekly.csv"), "report");
        std::string content = csv::read_file(cfg.artifact("state_weekly.csv"));
        struct Row {
            std::string state;
            double sdi_b, sdi_a, case_b, case_a;
        };
        std::vector<Row> table;
        std::vector<std::string_view> f;
        bool header = true;
        csv::for_each_line(content, [&](std::string_view line) {
            if (header) {
                header = false;
                return;
            }
            if (line.empty()) return;
            csv::split(line, f);
            table.push_back({std::string(f[0]), *csv::parse_double(f[1]), *csv::parse_double(f[2]),
                             *csv::parse_double(f[3]), *csv::parse_double(f[4])});
        });
        std::sort(table.begin(), table.end(),
                  [](const Row& a, const Row& b) { return a.sdi_b > b.sdi_b; });
        svg::BarPanel p;
        p.title = "States: SDI and confirmed case rate, week before vs after " +
                  cfg.pivot_date.to_string();
        p.y_label = "new cases per thousand (bars)";
        p.overlay_y_label = "SDI (lines)";
        p.color_a = "#e8a0a0";
        p.color_b = "#9db7e8";
        p.label_a = "cases before";
        p.label_b = "cases after";
        svg::Series before{"sdi before", "#c01010", {}, {}, false};
        svg::Series after{"sdi after", "#1040c0", {}, {}, false};
        std::string comment = "state_id,sdi_before,sdi_after,cases_before_per_k,cases_after_per_k\n";
        for (const auto& r : table) {
            p.groups.push_back({r.state, r.case_b, r.case_a});
            before.values.push_back(r.sdi_b);
            after.values.push_back(r.sdi_a);
            comment += r.state + "," + csv::fixed(r.sdi_b, 4) + "," + csv::fixed(r.sdi_a, 4) + "," +
                       csv::fixed(r.case_b, 6) + "," + csv::fixed(r.case_a, 6) + "\n";
        }
        p.overlay.push_back(std::move(before));
        p.overlay.push_back(std::move(after));
        write_text(out.stage(cfg.artifact("report_states.svg")),
                   svg::render_bar_panel(p, 920, comment));
    }
    out.commit();
}

void run_all(const PipelineConfig& cfg) {
    if (!cfg.scenario_path.empty()) stage_synth(cfg);
    stage_ingest(cfg);
    stage_trips(cfg);
    stage_activities(cfg);
    stage_weights(cfg);
    stage_metrics(cfg);
    stage_sdi(cfg);
    stage_phases(cfg);
    stage_cases(cfg);
    stage_report(cfg);
}

}  // namespace sdipipe::pipeline
