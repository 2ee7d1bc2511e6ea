#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sdipipe/geo.hpp"
#include "sdipipe/phase.hpp"
#include "sdipipe/pipeline.hpp"
#include "sdipipe/sdi.hpp"
#include "sdipipe/trips.hpp"

namespace py = pybind11;
using namespace sdipipe;

namespace {

// (trip_id, point_indices) pairs plus the static point indices, from a
// plain (ts, lat, lon) trace.
py::dict segment_trips_py(const std::vector<std::tuple<int64_t, double, double>>& points,
                          double distance_threshold_m, double time_threshold_s,
                          double speed_threshold_mps, double min_trip_length_m) {
    std::vector<ingest::Sighting> rows;
    rows.reserve(points.size());
    for (const auto& [ts, lat, lon] : points)
        rows.push_back({0, ts, geo::GeoPoint::checked(lat, lon), 0.0f});
    trips::TripConfig cfg{distance_threshold_m, time_threshold_s, speed_threshold_mps,
                          min_trip_length_m};
    auto annotated = trips::annotate(rows);
    auto seg = trips::segment(annotated, cfg, "py");
    auto kept = trips::filter_short(seg.trips, cfg);

    py::list trips_out;
    for (const auto& t : kept) {
        py::dict d;
        d["trip_id"] = t.trip_id;
        d["departure_ts"] = t.departure_ts;
        d["arrival_ts"] = t.arrival_ts;
        d["distance_m"] = t.distance_m;
        d["n_points"] = t.n_points;
        trips_out.append(d);
    }
    py::list assignment;
    for (int32_t a : seg.assignment) {
        if (a == trips::kStatic)
            assignment.append(py::str("0"));
        else
            assignment.append(py::str(seg.trips[size_t(a)].trip_id));
    }
    py::dict out;
    out["trips"] = trips_out;
    out["assignment"] = assignment;
    return out;
}

double sdi_score_py(py::dict current, py::dict benchmark, py::dict weights) {
    metrics::DailyMetrics m;
    m.pct_staying_home = current["pct_staying_home"].cast<double>();
    m.work_trips_pp = current["work_trips_pp"].cast<double>();
    m.nonwork_trips_pp = current["nonwork_trips_pp"].cast<double>();
    m.miles_pp = current["miles_pp"].cast<double>();
    m.pct_out_of_county = current["pct_out_of_county"].cast<double>();
    metrics::Benchmark b;
    b.pct_staying_home = benchmark["pct_staying_home"].cast<double>();
    b.work_trips_pp = benchmark["work_trips_pp"].cast<double>();
    b.nonwork_trips_pp = benchmark["nonwork_trips_pp"].cast<double>();
    b.miles_pp = benchmark["miles_pp"].cast<double>();
    b.pct_out_of_county = benchmark["pct_out_of_county"].cast<double>();
    sdi::SdiWeights w;
    w.w_home = weights["home"].cast<double>();
    w.w_work = weights["work"].cast<double>();
    w.w_nonwork = weights["nonwork"].cast<double>();
    w.w_dist = weights["distance"].cast<double>();
    w.w_outcounty = weights["out_of_county"].cast<double>();
    return sdi::sdi_score(m, b, w).value;
}

std::vector<std::optional<double>> roc_py(const std::vector<double>& values, int lookback) {
    sdi::SdiSeries s;
    s.dates.reserve(values.size());
    for (size_t i = 0; i < values.size(); ++i) s.dates.push_back(Date(int32_t(i)));
    s.values = values;
    auto r = phase::roc(s, lookback);
    return r.values;
}

py::dict detect_phases_py(const std::vector<std::optional<double>>& roc_values,
                          const std::vector<std::string>& dates, double eps, int k) {
    if (roc_values.size() != dates.size())
        throw py::value_error("roc_values and dates must have equal length");
    phase::RocSeries r;
    r.values = roc_values;
    for (const auto& d : dates) r.dates.push_back(Date::from_string(d));
    auto pd = phase::detect_phases(r, eps, k);
    py::dict out;
    auto set = [&](const char* key, const std::optional<Date>& d) {
        out[key] = d ? py::object(py::str(d->to_string())) : py::object(py::none());
    };
    set("roc_peak_date", pd.roc_peak_date);
    set("inertia_start", pd.inertia_start);
    set("fatigue_start", pd.fatigue_start);
    set("fatigue_end", pd.fatigue_end);
    return out;
}

py::dict week_compare_py(const std::vector<std::string>& dates, const std::vector<double>& values,
                         const std::string& pivot) {
    std::vector<Date> ds;
    for (const auto& d : dates) ds.push_back(Date::from_string(d));
    auto wc = phase::week_compare(ds, values, Date::from_string(pivot));
    py::dict out;
    out["mean_before"] = wc.mean_before;
    out["mean_after"] = wc.mean_after;
    out["pct_change"] = wc.pct_change;
    out["variance_before"] = wc.variance_before;
    out["variance_after"] = wc.variance_after;
    return out;
}

py::tuple welch_py(const std::vector<double>& before, const std::vector<double>& after) {
    auto r = phase::welch_t_test(before, after);
    return py::make_tuple(r.t_stat, r.p_value, r.df);
}

std::optional<std::string> locate_zone_py(const std::string& zones_path, double lat, double lon) {
    geo::ZoneIndex zones = geo::ZoneIndex::load(zones_path);
    return zones.locate_id(geo::GeoPoint::checked(lat, lon));
}

void run_stage_py(const std::string& stage, const std::string& config_path) {
    pipeline::PipelineConfig cfg = pipeline::PipelineConfig::load(config_path);
    if (stage == "synth") return pipeline::stage_synth(cfg);
    if (stage == "ingest") return pipeline::stage_ingest(cfg);
    if (stage == "trips") return pipeline::stage_trips(cfg);
    if (stage == "activities") return pipeline::stage_activities(cfg);
    if (stage == "weights") return pipeline::stage_weights(cfg);
    if (stage == "metrics") return pipeline::stage_metrics(cfg);
    if (stage == "sdi") return pipeline::stage_sdi(cfg);
    if (stage == "phases") return pipeline::stage_phases(cfg);
    if (stage == "cases") return pipeline::stage_cases(cfg);
    if (stage == "report") return pipeline::stage_report(cfg);
    if (stage == "all") return pipeline::run_all(cfg);
    throw py::value_error("unknown stage: " + stage);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "sdipipe core operations";
    m.attr("__version__") = "0.1.0";

    m.def(
        "haversine_distance",
        [](double lat1, double lon1, double lat2, double lon2) {
            return geo::haversine_distance(geo::GeoPoint::checked(lat1, lon1),
                                           geo::GeoPoint::checked(lat2, lon2));
        },
        py::arg("lat1"), py::arg("lon1"), py::arg("lat2"), py::arg("lon2"),
        "Great-circle distance in meters on the mean-radius sphere.");

    m.def(
        "point_in_polygon",
        [](double lat, double lon, const std::vector<std::pair<double, double>>& ring) {
            std::vector<geo::GeoPoint> r;
            for (const auto& [la, lo] : ring) r.push_back(geo::GeoPoint::checked(la, lo));
            return geo::point_in_polygon(geo::GeoPoint::checked(lat, lon), r);
        },
        py::arg("lat"), py::arg("lon"), py::arg("ring"),
        "Ray-casting containment; boundary points count as inside.");

    m.def("locate_zone", &locate_zone_py, py::arg("zones_path"), py::arg("lat"), py::arg("lon"));

    m.def("segment_trips", &segment_trips_py, py::arg("points"),
          py::arg("distance_threshold_m") = 200.0, py::arg("time_threshold_s") = 900.0,
          py::arg("speed_threshold_mps") = 1.4, py::arg("min_trip_length_m") = 300.0,
          "Segment a (ts, lat, lon) trace into trips; returns trips and the "
          "per-point trip-id assignment ('0' = static).");

    m.def("sdi_score", &sdi_score_py, py::arg("current"), py::arg("benchmark"), py::arg("weights"));

    m.def(
        "moving_average",
        [](const std::vector<double>& v, int window, const std::string& mode) {
            return sdi::moving_average(v, window,
                                       mode == "trailing" ? sdi::SmoothingMode::Trailing
                                                          : sdi::SmoothingMode::Centered);
        },
        py::arg("values"), py::arg("window") = 5, py::arg("mode") = "centered");

    m.def("roc", &roc_py, py::arg("values"), py::arg("lookback") = 5);
    m.def("detect_phases", &detect_phases_py, py::arg("roc_values"), py::arg("dates"),
          py::arg("eps") = 1.0, py::arg("k") = 3);
    m.def("week_compare", &week_compare_py, py::arg("dates"), py::arg("values"), py::arg("pivot"));
    m.def("welch_t_test", &welch_py, py::arg("before"), py::arg("after"),
          "One-sided Welch test (alternative: after < before); returns (t, p, df).");
    m.def("t_cdf", &phase::t_cdf, py::arg("t"), py::arg("df"));
    m.def("regularized_incomplete_beta", &phase::regularized_incomplete_beta, py::arg("x"),
          py::arg("a"), py::arg("b"));
    m.def("run_stage", &run_stage_py, py::arg("stage"), py::arg("config_path"),
          "Run one pipeline stage (or 'all') against a config file.");
}
