#include "sdipipe/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "sdipipe/csv.hpp"
#include "sdipipe/rng.hpp"

namespace sdipipe::synth {

namespace {

constexpr double kPi = 3.141592653589793;
constexpr double kDeg = kPi / 180.0;

// Destination point at a given distance and bearing on the sphere.
geo::GeoPoint offset_point(const geo::GeoPoint& p, double dist_m, double bearing_rad) {
    double delta = dist_m / geo::kEarthRadiusM;
    double phi1 = p.lat * kDeg, lam1 = p.lon * kDeg;
    double sphi2 = std::sin(phi1) * std::cos(delta) +
                   std::cos(phi1) * std::sin(delta) * std::cos(bearing_rad);
    double phi2 = std::asin(std::clamp(sphi2, -1.0, 1.0));
    double lam2 = lam1 + std::atan2(std::sin(bearing_rad) * std::sin(delta) * std::cos(phi1),
                                    std::cos(delta) - std::sin(phi1) * sphi2);
    return {phi2 / kDeg, lam2 / kDeg};
}

// Spherical interpolation between two points, f in [0, 1].
geo::GeoPoint interpolate(const geo::GeoPoint& a, const geo::GeoPoint& b, double f) {
    double phi1 = a.lat * kDeg, lam1 = a.lon * kDeg;
    double phi2 = b.lat * kDeg, lam2 = b.lon * kDeg;
    double x1 = std::cos(phi1) * std::cos(lam1), y1 = std::cos(phi1) * std::sin(lam1),
           z1 = std::sin(phi1);
    double x2 = std::cos(phi2) * std::cos(lam2), y2 = std::cos(phi2) * std::sin(lam2),
           z2 = std::sin(phi2);
    double dot = std::clamp(x1 * x2 + y1 * y2 + z1 * z2, -1.0, 1.0);
    double omega = std::acos(dot);
    double wa, wb;
    if (omega < 1e-9) {
        wa = 1.0 - f;
        wb = f;
    } else {
        wa = std::sin((1.0 - f) * omega) / std::sin(omega);
        wb = std::sin(f * omega) / std::sin(omega);
    }
    double x = wa * x1 + wb * x2, y = wa * y1 + wb * y2, z = wa * z1 + wb * z2;
    double norm = std::sqrt(x * x + y * y + z * z);
    return {std::asin(std::clamp(z / norm, -1.0, 1.0)) / kDeg, std::atan2(y, x) / kDeg};
}

geo::GeoPoint random_point_in_zone(const geo::Zone& z, Rng& rng) {
    for (int i = 0; i < 4096; ++i) {
        geo::GeoPoint p{rng.uniform(z.min_lat, z.max_lat), rng.uniform(z.min_lon, z.max_lon)};
        if (geo::point_in_polygon(p, z.boundary)) return p;
    }
    throw data_error("zone " + z.zone_id + ": cannot sample interior point (zero area?)");
}

geo::GeoPoint jittered(const geo::GeoPoint& p, double jitter_m, Rng& rng) {
    double d = rng.uniform(0.0, jitter_m);
    double b = rng.uniform(0.0, 2.0 * kPi);
    return offset_point(p, d, b);
}

struct Move {
    geo::GeoPoint from, to;
    int64_t dep = 0, arr = 0;  // local seconds within the day timeline
    size_t from_zone = 0, to_zone = 0;
    double distance_m = 0.0;
    bool is_work = false;
    bool captured = true;
};

}  // namespace

void Scenario::validate(const geo::ZoneIndex& zones) const {
    if (zones.zones().empty()) throw data_error("scenario requires a non-empty zone set");
    if (n_devices <= 0) throw data_error("scenario: n_devices must be positive");
    if (!(start_date < end_date)) throw data_error("scenario: empty date range");
    if (phases.empty()) throw data_error("scenario: at least one phase required");
    Date prev = phases.front().start;
    if (phases.front().start > start_date)
        throw data_error("scenario: first phase must start at or before start_date");
    for (size_t i = 1; i < phases.size(); ++i) {
        if (!(prev < phases[i].start))
            throw data_error("scenario: phase starts must be strictly increasing");
        prev = phases[i].start;
    }
    for (const auto& ph : phases) {
        if (ph.stay_home_prob < 0 || ph.stay_home_prob > 1 || ph.out_of_county_prob < 0 ||
            ph.out_of_county_prob > 1)
            throw data_error("scenario: probabilities must lie in [0,1]");
        if (ph.work_trip_rate < 0 || ph.nonwork_trip_rate < 0 || ph.mean_trip_km <= 0)
            throw data_error("scenario: rates must be non-negative, mean_trip_km positive");
    }
    if (capture_prob < 0 || capture_prob > 1 || employed_prob < 0 || employed_prob > 1)
        throw data_error("scenario: probabilities must lie in [0,1]");
    if (sighting_rate_hz <= 0 || stationary_ping_s <= 0 || night_ping_s <= 0)
        throw data_error("scenario: ping rates must be positive");
    for (const auto& cc : case_curves)
        if (zones.county_ids().end() ==
            std::find(zones.county_ids().begin(), zones.county_ids().end(), cc.county_id))
            throw data_error("scenario case curve references unknown county " + cc.county_id);
}

Scenario Scenario::load(const std::string& json_path) {
    std::ifstream is(json_path);
    if (!is) throw data_error("cannot open scenario: " + json_path);
    nlohmann::json j;
    try {
        is >> j;
    } catch (const std::exception& e) {
        throw data_error("scenario " + json_path + ": " + e.what());
    }
    Scenario sc;
    sc.seed = j.at("seed").get<uint64_t>();
    sc.n_devices = j.at("n_devices").get<int>();
    sc.start_date = Date::from_string(j.at("start_date").get<std::string>());
    sc.end_date = Date::from_string(j.at("end_date").get<std::string>());
    sc.employed_prob = j.value("employed_prob", 0.6);
    sc.capture_prob = j.value("capture_prob", 1.0);
    sc.sighting_rate_hz = j.value("sighting_rate_hz", 1.0 / 480.0);
    sc.stationary_ping_s = j.value("stationary_ping_s", 3600);
    sc.night_ping_s = j.value("night_ping_s", 10800);
    sc.jitter_m = j.value("jitter_m", 15.0);
    sc.accuracy_min_m = j.value("accuracy_min_m", 5.0);
    sc.accuracy_max_m = j.value("accuracy_max_m", 30.0);
    for (const auto& jp : j.at("phases")) {
        PhaseSpec ph;
        ph.start = Date::from_string(jp.at("start_date").get<std::string>());
        ph.transition_weekdays = jp.value("transition_weekdays", 0);
        ph.stay_home_prob = jp.at("stay_home_prob").get<double>();
        ph.work_trip_rate = jp.at("work_trip_rate").get<double>();
        ph.nonwork_trip_rate = jp.at("nonwork_trip_rate").get<double>();
        ph.mean_trip_km = jp.at("mean_trip_km").get<double>();
        ph.out_of_county_prob = jp.at("out_of_county_prob").get<double>();
        sc.phases.push_back(ph);
    }
    if (j.contains("case_curves")) {
        for (const auto& jc : j.at("case_curves")) {
            CaseCurve cc;
            cc.county_id = jc.at("county_id").get<std::string>();
            cc.cap = jc.at("cap").get<double>();
            cc.rate = jc.at("rate").get<double>();
            cc.midpoint = Date::from_string(jc.at("midpoint").get<std::string>());
            sc.case_curves.push_back(cc);
        }
    }
    return sc;
}

PhaseSpec Scenario::params_on(Date d) const {
    size_t active = 0;
    for (size_t i = 0; i < phases.size(); ++i)
        if (phases[i].start <= d) active = i;
    const PhaseSpec& cur = phases[active];
    if (active == 0 || cur.transition_weekdays <= 0) return cur;
    const PhaseSpec& prev = phases[active - 1];
    // weekday index of d within the phase
    int k = 0;
    for (Date x = cur.start; x < d; x = x + 1)
        if (x.is_weekday()) ++k;
    double alpha = std::min(1.0, double(k + 1) / double(cur.transition_weekdays));
    PhaseSpec out = cur;
    out.stay_home_prob = prev.stay_home_prob + alpha * (cur.stay_home_prob - prev.stay_home_prob);
    out.work_trip_rate = prev.work_trip_rate + alpha * (cur.work_trip_rate - prev.work_trip_rate);
    out.nonwork_trip_rate =
        prev.nonwork_trip_rate + alpha * (cur.nonwork_trip_rate - prev.nonwork_trip_rate);
    out.mean_trip_km = prev.mean_trip_km + alpha * (cur.mean_trip_km - prev.mean_trip_km);
    out.out_of_county_prob =
        prev.out_of_county_prob + alpha * (cur.out_of_county_prob - prev.out_of_county_prob);
    return out;
}

namespace {

// Device placement proportional to zone population (largest remainder).
std::vector<size_t> apportion_devices(int n_devices, const geo::ZoneIndex& zones) {
    const auto& zs = zones.zones();
    std::vector<size_t> zone_order(zs.size());
    std::iota(zone_order.begin(), zone_order.end(), size_t{0});
    std::sort(zone_order.begin(), zone_order.end(),
              [&](size_t a, size_t b) { return zs[a].zone_id < zs[b].zone_id; });
    double total = zones.total_population();
    if (total <= 0) throw data_error("scenario zones have zero total population");
    std::vector<int> counts(zs.size(), 0);
    std::vector<std::pair<double, size_t>> rema;
    int assigned = 0;
    for (size_t zi : zone_order) {
        double quota = double(n_devices) * zs[zi].population / total;
        counts[zi] = int(quota);
        assigned += counts[zi];
        rema.push_back({quota - double(counts[zi]), zi});
    }
    std::sort(rema.begin(), rema.end(), [&](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return zs[a.second].zone_id < zs[b.second].zone_id;
    });
    for (int i = 0; assigned < n_devices; ++i, ++assigned) counts[rema[size_t(i) % rema.size()].second]++;

    std::vector<size_t> device_zone;
    device_zone.reserve(size_t(n_devices));
    for (size_t zi : zone_order)
        for (int k = 0; k < counts[zi]; ++k) device_zone.push_back(zi);
    device_zone.resize(size_t(n_devices));
    return device_zone;
}

struct DeviceState {
    geo::GeoPoint home, work;
    size_t home_zone = 0, work_zone = 0;
    bool employed = false;
};

// Per-county zone index lists and cross-county neighbor lists (zones of a
// different county within reach, so trips stay desk-scale).
struct ZoneTopology {
    std::vector<std::vector<size_t>> same_county;   // per zone
    std::vector<std::vector<size_t>> foreign_near;  // per zone
    explicit ZoneTopology(const geo::ZoneIndex& zones, double reach_m = 60000.0) {
        const auto& zs = zones.zones();
        auto centroid = [&](const geo::Zone& z) {
            double la = 0, lo = 0;
            for (const auto& p : z.boundary) {
                la += p.lat;
                lo += p.lon;
            }
            return geo::GeoPoint{la / double(z.boundary.size()), lo / double(z.boundary.size())};
        };
        std::vector<size_t> order(zs.size());
        std::iota(order.begin(), order.end(), size_t{0});
        std::sort(order.begin(), order.end(),
                  [&](size_t a, size_t b) { return zs[a].zone_id < zs[b].zone_id; });
        same_county.resize(zs.size());
        foreign_near.resize(zs.size());
        for (size_t a = 0; a < zs.size(); ++a) {
            for (size_t b : order) {
                if (zs[b].county_id == zs[a].county_id)
                    same_county[a].push_back(b);
                else if (geo::haversine_distance(centroid(zs[a]), centroid(zs[b])) <= reach_m)
                    foreign_near[a].push_back(b);
            }
            if (foreign_near[a].empty()) {
                // fall back to every foreign zone
                for (size_t b : order)
                    if (zs[b].county_id != zs[a].county_id) foreign_near[a].push_back(b);
            }
        }
    }
};

struct Emitter {
    const Scenario& sc;
    ingest::SightingTable& table;
    uint32_t device;
    // silence gate: after an unobserved relocation, stay dark until the
    // implied speed from the last emitted fix drops well under the
    // segmentation threshold
    bool has_last = false;
    int64_t last_ts = 0;
    geo::GeoPoint last_pos;

    void emit(int64_t ts, const geo::GeoPoint& p, Rng& rng, bool gated = true) {
        geo::GeoPoint q = jittered(p, sc.jitter_m, rng);
        float acc = float(rng.uniform(sc.accuracy_min_m, sc.accuracy_max_m));
        if (gated && has_last) {
            double dt = double(ts - last_ts);
            if (dt <= 0) return;
            double d = geo::haversine_distance(last_pos, q);
            if (d > 0.7 * 1.4 * dt) return;  // still dark
        }
        table.rows.push_back({device, ts, q, acc});
        has_last = true;
        last_ts = ts;
        last_pos = q;
    }

    // Movement fixes bypass the gate once the trip's first fix made it out.
    void emit_move(int64_t ts, const geo::GeoPoint& p, Rng& rng) {
        geo::GeoPoint q = jittered(p, 5.0, rng);
        float acc = float(rng.uniform(sc.accuracy_min_m, sc.accuracy_max_m));
        table.rows.push_back({device, ts, q, acc});
        has_last = true;
        last_ts = ts;
        last_pos = q;
    }
};

}  // namespace

GenResult generate(const Scenario& sc, const geo::ZoneIndex& zones) {
    sc.validate(zones);
    GenResult out;
    const auto& zs = zones.zones();
    std::vector<Date> days = weekdays_between(sc.start_date, sc.end_date);
    if (days.empty()) throw data_error("scenario range contains no weekdays");

    out.truth.days = days;
    std::vector<size_t> device_zone = apportion_devices(sc.n_devices, zones);
    ZoneTopology topo(zones);

    out.truth.device_ids.reserve(size_t(sc.n_devices));
    char namebuf[16];
    for (int d = 0; d < sc.n_devices; ++d) {
        std::snprintf(namebuf, sizeof(namebuf), "d%05d", d);
        out.truth.device_ids.emplace_back(namebuf);
    }
    out.sightings.device_ids = out.truth.device_ids;
    out.truth.stayed_home.assign(size_t(sc.n_devices) * days.size(), 0);

    std::vector<DeviceState> devices(size_t(sc.n_devices));
    for (int d = 0; d < sc.n_devices; ++d) {
        Rng rng = Rng::keyed({sc.seed, 0xD0, uint64_t(d)});
        DeviceState& st = devices[size_t(d)];
        st.home_zone = device_zone[size_t(d)];
        st.home = random_point_in_zone(zs[st.home_zone], rng);
        st.employed = rng.bernoulli(sc.employed_prob);
        if (st.employed) {
            // work inside the home county, a healthy commute away
            const auto& candidates = topo.same_county[st.home_zone];
            st.work_zone = candidates[rng.below(candidates.size())];
            for (int attempt = 0; attempt < 64; ++attempt) {
                geo::GeoPoint w = random_point_in_zone(zs[st.work_zone], rng);
                double dist = geo::haversine_distance(st.home, w);
                if (dist >= 3000.0 && dist <= 14000.0) {
                    st.work = w;
                    break;
                }
                st.work = w;  // keep the last try as fallback
            }
        }
        activity::DeviceProfile prof;
        prof.device_id = out.truth.device_ids[size_t(d)];
        prof.home_zone = zs[st.home_zone].zone_id;
        prof.employed = st.employed;
        if (st.employed) prof.work_zone = zs[st.work_zone].zone_id;
        out.truth.profiles.push_back(std::move(prof));
    }

    out.sightings.rows.reserve(size_t(sc.n_devices) * days.size() * 24);

    const double move_ping_interval = 1.0 / sc.sighting_rate_hz;
    for (int d = 0; d < sc.n_devices; ++d) {
        const DeviceState& st = devices[size_t(d)];
        const int32_t offset = zs[st.home_zone].utc_offset_s;
        Emitter em{sc, out.sightings, uint32_t(d)};

        for (size_t di = 0; di < days.size(); ++di) {
            Date day = days[di];
            PhaseSpec ph = sc.params_on(day);
            Rng plan = Rng::keyed({sc.seed, 0x91AA, uint64_t(d), uint64_t(uint32_t(day.days()))});
            Rng emr = Rng::keyed({sc.seed, 0xE2BB, uint64_t(d), uint64_t(uint32_t(day.days()))});
            const int64_t day_utc0 = day.epoch_seconds() - offset;  // local midnight in UTC

            std::vector<Move> moves;
            if (!plan.bernoulli(ph.stay_home_prob)) {
                geo::GeoPoint cur = st.home;
                size_t cur_zone = st.home_zone;
                int64_t cursor = 6 * 3600;
                bool commute = st.employed && plan.bernoulli(std::min(1.0, ph.work_trip_rate / 2.0));
                int64_t evening_start = 0;
                if (commute) {
                    double speed = plan.uniform(9.0, 14.0);
                    double dist = geo::haversine_distance(st.home, st.work);
                    int64_t dep = 27000 + int64_t(plan.uniform(0, 1800));
                    int64_t arr = dep + int64_t(dist / speed);
                    moves.push_back({st.home, st.work, dep, arr, st.home_zone, st.work_zone, dist,
                                     true, true});
                    int64_t ret = std::max<int64_t>(61200 + int64_t(plan.uniform(0, 1800)),
                                                    arr + 2400);
                    int64_t ret_arr = ret + int64_t(dist / speed);
                    moves.push_back({st.work, st.home, ret, ret_arr, st.work_zone, st.home_zone,
                                     dist, true, true});
                    evening_start = ret_arr + 2100;
                }
                int cap = commute ? 3 : 4;
                int outings = std::min(plan.poisson(ph.nonwork_trip_rate / 2.0), cap);
                static const int64_t slots_free[4] = {30600, 41400, 52200, 63000};
                static const int64_t slots_evening[3] = {65700, 73800, 79200};
                cursor = commute ? evening_start : 21600;
                for (int k = 0; k < outings; ++k) {
                    int64_t slot = commute ? slots_evening[k] : slots_free[k];
                    int64_t dep = std::max<int64_t>(slot + int64_t(plan.uniform(-900, 900)), cursor);
                    // destination: out of county into a nearby foreign zone,
                    // otherwise a point in the home county
                    bool ooc = plan.bernoulli(ph.out_of_county_prob);
                    size_t dest_zone;
                    geo::GeoPoint dest;
                    if (ooc) {
                        const auto& cand = topo.foreign_near[st.home_zone];
                        dest_zone = cand[plan.below(cand.size())];
                        dest = random_point_in_zone(zs[dest_zone], plan);
                    } else {
                        const auto& cand = topo.same_county[st.home_zone];
                        dest_zone = cand[plan.below(cand.size())];
                        double want = std::clamp(plan.exponential(ph.mean_trip_km * 1000.0), 600.0,
                                                 40000.0);
                        bool placed = false;
                        for (int attempt = 0; attempt < 20 && !placed; ++attempt) {
                            geo::GeoPoint p =
                                offset_point(cur, want, plan.uniform(0.0, 2.0 * kPi));
                            if (p.lat >= zs[dest_zone].min_lat && p.lat <= zs[dest_zone].max_lat &&
                                p.lon >= zs[dest_zone].min_lon && p.lon <= zs[dest_zone].max_lon &&
                                geo::point_in_polygon(p, zs[dest_zone].boundary)) {
                                dest = p;
                                placed = true;
                            }
                        }
                        if (!placed) dest = random_point_in_zone(zs[dest_zone], plan);
                    }
                    double dist = geo::haversine_distance(cur, dest);
                    if (dist < 600.0) continue;  // too short to count as a trip
                    double speed = plan.uniform(9.0, 14.0);
                    int64_t dur = int64_t(dist / speed);
                    int64_t dwell = int64_t(plan.uniform(1500, 2400));
                    if (dep + 2 * dur + dwell > 85200) break;  // would run past 23:40
                    moves.push_back({cur, dest, dep, dep + dur, cur_zone, dest_zone, dist, false,
                                     true});
                    int64_t back = dep + dur + dwell;
                    moves.push_back({dest, cur, back, back + dur, dest_zone, cur_zone, dist, false,
                                     true});
                    cursor = back + dur + 2100;
                }
            }
            out.truth.stayed_home[size_t(d) * days.size() + di] = moves.empty() ? 1 : 0;

            for (auto& mv : moves) {
                mv.captured = sc.capture_prob >= 1.0 || plan.bernoulli(sc.capture_prob);
                TruthTrip tt;
                tt.device = uint32_t(d);
                tt.departure_ts = day_utc0 + mv.dep;
                tt.arrival_ts = day_utc0 + mv.arr;
                tt.origin = mv.from;
                tt.destination = mv.to;
                tt.origin_zone = zs[mv.from_zone].zone_id;
                tt.destination_zone = zs[mv.to_zone].zone_id;
                tt.distance_m = mv.distance_m;
                tt.is_work = mv.is_work;
                out.truth.trips.push_back(std::move(tt));
            }

            // emission: stays between moves, then the moves themselves
            auto emit_stay = [&](int64_t from_local, int64_t to_local, const geo::GeoPoint& at,
                                 bool arrival) {
                if (to_local <= from_local) return;
                int64_t t = from_local;
                if (arrival) {
                    em.emit(day_utc0 + t + 60, at, emr);
                    if (t + 1080 < to_local) em.emit(day_utc0 + t + 1080, at, emr);
                    t += 1080;
                } else {
                    em.emit(day_utc0 + t, at, emr);
                }
                while (true) {
                    int64_t hour = ((t % 86400) + 86400) % 86400 / 3600;
                    int64_t step = (hour >= 23 || hour < 7) ? sc.night_ping_s : sc.stationary_ping_s;
                    t += step;
                    if (t >= to_local) break;
                    em.emit(day_utc0 + t, at, emr);
                }
            };

            int64_t cursor_t = 0;
            geo::GeoPoint cursor_pos = st.home;
            for (const auto& mv : moves) {
                emit_stay(cursor_t, mv.dep, cursor_pos, cursor_t != 0);
                if (mv.captured) {
                    // first fix passes through the gate; the rest follow it
                    bool was_dark = em.has_last &&
                                    geo::haversine_distance(em.last_pos, mv.from) >
                                        0.7 * 1.4 * double(day_utc0 + mv.dep - em.last_ts);
                    if (!was_dark) {
                        em.emit_move(day_utc0 + mv.dep, mv.from, emr);
                        int64_t steps = int64_t(double(mv.arr - mv.dep) / move_ping_interval);
                        for (int64_t s = 1; s <= steps; ++s) {
                            int64_t ts = mv.dep + int64_t(double(s) * move_ping_interval);
                            if (ts >= mv.arr) break;
                            double f = double(ts - mv.dep) / double(mv.arr - mv.dep);
                            em.emit_move(day_utc0 + ts, interpolate(mv.from, mv.to, f), emr);
                        }
                        em.emit_move(day_utc0 + mv.arr, mv.to, emr);
                    }
                }
                cursor_t = mv.arr;
                cursor_pos = mv.to;
            }
            emit_stay(cursor_t, 86400, cursor_pos, cursor_t != 0);
        }
    }
    return out;
}

std::vector<metrics::DailyMetrics> truth_daily_metrics(const GroundTruth& truth,
                                                       const geo::ZoneIndex& zones) {
    // direct aggregation of the scripted behavior with exact county weights
    struct Acc {
        double persons = 0, stay = 0, work = 0, nonwork = 0, miles = 0, oc = 0, trips = 0;
    };
    const size_t n_days = truth.days.size();
    std::map<int32_t, size_t> day_index;
    for (size_t i = 0; i < n_days; ++i) day_index[truth.days[i].days()] = i;

    std::vector<std::string> home_county(truth.profiles.size());
    std::vector<std::string> home_state(truth.profiles.size());
    std::map<std::string, uint64_t> county_devices;
    for (size_t d = 0; d < truth.profiles.size(); ++d) {
        auto zi = zones.find_zone(truth.profiles[d].home_zone);
        home_county[d] = zones.zone(*zi).county_id;
        home_state[d] = zones.zone(*zi).state_id;
        ++county_devices[home_county[d]];
    }
    std::map<std::string, double> county_weight;
    for (const auto& [c, n] : county_devices) county_weight[c] = zones.county_population(c) / double(n);

    // per (day, geo) accumulators; geo keys "county:x" / "state:x" / "nation:US"
    std::map<std::string, std::vector<Acc>> acc;
    auto accs = [&](const std::string& key) -> std::vector<Acc>& {
        auto it = acc.find(key);
        if (it == acc.end()) it = acc.emplace(key, std::vector<Acc>(n_days)).first;
        return it->second;
    };

    for (size_t d = 0; d < truth.profiles.size(); ++d) {
        double w = county_weight[home_county[d]];
        auto& ca = accs(metrics::geo_key(metrics::Level::County, home_county[d]));
        auto& sa = accs(metrics::geo_key(metrics::Level::State, home_state[d]));
        auto& na = accs(metrics::geo_key(metrics::Level::Nation, "US"));
        for (size_t di = 0; di < n_days; ++di) {
            bool stayed = truth.stayed_home[d * n_days + di] != 0;
            for (auto* a : {&ca[di], &sa[di], &na[di]}) {
                a->persons += w;
                if (stayed) a->stay += w;
            }
        }
    }
    for (const auto& t : truth.trips) {
        auto it = day_index.find(Date::from_epoch_seconds(t.departure_ts).days());
        if (it == day_index.end()) continue;
        size_t di = it->second;
        size_t d = t.device;
        double w = county_weight[home_county[d]];
        bool is_work = t.is_work;
        const std::string& oz_county = zones.zone(*zones.find_zone(t.origin_zone)).county_id;
        const std::string& dz_county = zones.zone(*zones.find_zone(t.destination_zone)).county_id;
        bool out_of_county = oz_county != dz_county;
        for (auto* a : {&accs(metrics::geo_key(metrics::Level::County, home_county[d]))[di],
                        &accs(metrics::geo_key(metrics::Level::State, home_state[d]))[di],
                        &accs(metrics::geo_key(metrics::Level::Nation, "US"))[di]}) {
            a->trips += w;
            (is_work ? a->work : a->nonwork) += w;
            a->miles += w * t.distance_m * geo::kMilesPerMeter;
            if (out_of_county) a->oc += w;
        }
    }

    std::vector<metrics::DailyMetrics> out;
    for (const auto& [key, vec] : acc) {
        auto colon = key.find(':');
        std::string level_s = key.substr(0, colon);
        std::string geo_id = key.substr(colon + 1);
        metrics::Level level = level_s == "county"  ? metrics::Level::County
                               : level_s == "state" ? metrics::Level::State
                                                    : metrics::Level::Nation;
        for (size_t di = 0; di < n_days; ++di) {
            const Acc& a = vec[di];
            if (a.persons <= 0) continue;
            metrics::DailyMetrics m;
            m.date = truth.days[di];
            m.level = level;
            m.geo_id = geo_id;
            m.pct_staying_home = a.stay / a.persons;
            m.work_trips_pp = a.work / a.persons;
            m.nonwork_trips_pp = a.nonwork / a.persons;
            m.trips_pp = m.work_trips_pp + m.nonwork_trips_pp;
            m.miles_pp = a.miles / a.persons;
            m.pct_out_of_county = a.trips > 0 ? a.oc / a.trips : 0.0;
            out.push_back(std::move(m));
        }
    }
    return out;
}

std::string render_case_csv(const Scenario& sc, const geo::ZoneIndex& zones) {
    std::string s = "county_id";
    std::vector<Date> all_days;
    for (Date d = sc.start_date; d <= sc.end_date; d = d + 1) all_days.push_back(d);
    for (Date d : all_days) {
        s += ',';
        s += d.to_string();
    }
    s += '\n';
    for (const auto& county : zones.county_ids()) {
        const CaseCurve* curve = nullptr;
        for (const auto& cc : sc.case_curves)
            if (cc.county_id == county) curve = &cc;
        s += county;
        int64_t prev = 0;
        for (Date d : all_days) {
            int64_t v = 0;
            if (curve) {
                double t = double(d - curve->midpoint);
                v = int64_t(curve->cap / (1.0 + std::exp(-curve->rate * t)));
                if (v < 3) v = 0;  // noise floor before the outbreak takes hold
            }
            v = std::max(v, prev);  // cumulative, non-decreasing
            prev = v;
            s += ',';
            s += std::to_string(v);
        }
        s += '\n';
    }
    return s;
}

void write_truth_trips(const GroundTruth& truth, const std::string& path) {
    csv::Writer w(path);
    w.line("device_id,departure_ts,arrival_ts,o_zone,d_zone,distance_m,is_work");
    std::string buf;
    for (const auto& t : truth.trips) {
        buf.clear();
        buf += truth.device_ids[t.device];
        buf += ',';
        buf += std::to_string(t.departure_ts);
        buf += ',';
        buf += std::to_string(t.arrival_ts);
        buf += ',';
        buf += t.origin_zone;
        buf += ',';
        buf += t.destination_zone;
        buf += ',';
        csv::append_fixed(buf, t.distance_m, 1);
        buf += ',';
        buf += t.is_work ? '1' : '0';
        w.line(buf);
    }
    w.close();
}

void write_truth_profiles(const GroundTruth& truth, const std::string& path) {
    csv::Writer w(path);
    w.line("device_id,home_zone,work_zone,employed");
    std::string buf;
    for (const auto& p : truth.profiles) {
        buf.clear();
        buf += p.device_id;
        buf += ',';
        buf += p.home_zone;
        buf += ',';
        if (p.work_zone) buf += *p.work_zone;
        buf += ',';
        buf += p.employed ? '1' : '0';
        w.line(buf);
    }
    w.close();
}

}  // namespace sdipipe::synth
