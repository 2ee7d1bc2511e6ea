#include "sdipipe/metrics.hpp"

#include <algorithm>

namespace sdipipe::metrics {

const char* level_name(Level l) {
    switch (l) {
        case Level::County: return "county";
        case Level::State: return "state";
        default: return "nation";
    }
}

std::string geo_key(Level level, const std::string& geo_id) {
    return std::string(level_name(level)) + ":" + geo_id;
}

namespace {

struct Acc {
    double persons = 0;       // weighted in-panel residents
    double stay_home = 0;     // weighted residents with zero trips
    double work_trips = 0;    // trip-weighted
    double nonwork_trips = 0;
    double miles = 0;
    double oc_trips = 0;      // out-of-county, among od-known trips
    double oc_base = 0;       // od-known trips

    void add_person(double w, bool stayed) {
        persons += w;
        if (stayed) stay_home += w;
    }
    void add_trip(double tw, const TripForMetrics& t) {
        (t.is_work ? work_trips : nonwork_trips) += tw;
        miles += tw * t.distance_m * geo::kMilesPerMeter;
        if (t.od_counties_known) {
            oc_base += tw;
            if (t.out_of_county) oc_trips += tw;
        }
    }
};

DailyMetrics to_metrics(Date date, Level level, const std::string& geo, const Acc& a) {
    DailyMetrics m;
    m.date = date;
    m.level = level;
    m.geo_id = geo;
    m.pct_staying_home = a.persons > 0 ? a.stay_home / a.persons : 0.0;
    m.work_trips_pp = a.persons > 0 ? a.work_trips / a.persons : 0.0;
    m.nonwork_trips_pp = a.persons > 0 ? a.nonwork_trips / a.persons : 0.0;
    m.trips_pp = m.work_trips_pp + m.nonwork_trips_pp;
    m.miles_pp = a.persons > 0 ? a.miles / a.persons : 0.0;
    m.pct_out_of_county = a.oc_base > 0 ? a.oc_trips / a.oc_base : 0.0;
    return m;
}

}  // namespace

std::vector<DailyMetrics> daily_metrics(Date date, const std::vector<size_t>& panel,
                                        const std::vector<TripForMetrics>& trips,
                                        const weights::ProfileTable& profiles,
                                        const weights::CountyWeights& cw,
                                        const std::map<std::string, weights::TripWeightFactor>& factors,
                                        const geo::ZoneIndex& zones) {
    std::vector<char> has_trip(profiles.profiles.size(), 0);
    for (const auto& t : trips) has_trip[t.profile] = 1;

    std::map<std::string, Acc> by_county;
    std::map<std::string, Acc> by_state;
    Acc nation;

    auto factor_of = [&](const std::string& state) {
        auto it = factors.find(state);
        return it == factors.end() ? 1.0 : it->second.factor;
    };

    for (size_t pi : panel) {
        double w = cw.device_weight[pi];
        if (w <= 0) continue;
        bool stayed = !has_trip[pi];
        by_county[profiles.home_county[pi]].add_person(w, stayed);
        by_state[profiles.home_state[pi]].add_person(w, stayed);
        nation.add_person(w, stayed);
    }
    for (const auto& t : trips) {
        double w = cw.device_weight[t.profile];
        if (w <= 0) continue;
        double tw = w * factor_of(profiles.home_state[t.profile]);
        by_county[profiles.home_county[t.profile]].add_trip(tw, t);
        by_state[profiles.home_state[t.profile]].add_trip(tw, t);
        nation.add_trip(tw, t);
    }

    std::vector<DailyMetrics> out;
    for (const auto& [county, acc] : by_county)
        if (acc.persons > 0) out.push_back(to_metrics(date, Level::County, county, acc));
    for (const auto& [state, acc] : by_state)
        if (acc.persons > 0) out.push_back(to_metrics(date, Level::State, state, acc));
    if (nation.persons > 0) out.push_back(to_metrics(date, Level::Nation, "US", nation));
    (void)zones;
    return out;
}

std::map<std::string, Benchmark> compute_benchmark(const std::vector<DailyMetrics>& series,
                                                   const std::vector<Date>& benchmark_dates) {
    if (benchmark_dates.empty()) throw data_error("benchmark date list is empty");
    std::map<std::string, Benchmark> out;
    std::map<std::string, size_t> counts;
    for (const auto& m : series) {
        if (!std::binary_search(benchmark_dates.begin(), benchmark_dates.end(), m.date)) continue;
        std::string key = geo_key(m.level, m.geo_id);
        Benchmark& b = out[key];
        b.level = m.level;
        b.geo_id = m.geo_id;
        b.pct_staying_home += m.pct_staying_home;
        b.work_trips_pp += m.work_trips_pp;
        b.nonwork_trips_pp += m.nonwork_trips_pp;
        b.trips_pp += m.trips_pp;
        b.miles_pp += m.miles_pp;
        b.pct_out_of_county += m.pct_out_of_county;
        ++counts[key];
    }
    for (auto& [key, b] : out) {
        size_t n = counts[key];
        if (n != benchmark_dates.size())
            throw data_error("geography " + key + " is missing metric rows on benchmark dates");
        double inv = 1.0 / double(n);
        b.pct_staying_home *= inv;
        b.work_trips_pp *= inv;
        b.nonwork_trips_pp *= inv;
        b.trips_pp *= inv;
        b.miles_pp *= inv;
        b.pct_out_of_county *= inv;
    }
    return out;
}

}  // namespace sdipipe::metrics
