#include "sdipipe/cases.hpp"

#include <algorithm>

#include "sdipipe/csv.hpp"

namespace sdipipe::cases {

CaseTable parse_cases(const std::string& content) {
    CaseTable t;
    std::vector<std::string_view> fields;
    size_t line_no = 0;
    bool header_done = false;
    csv::for_each_line(content, [&](std::string_view line) {
        ++line_no;
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) return;
        csv::split(line, fields);
        if (!header_done) {
            header_done = true;
            if (fields.empty() || fields[0] != "county_id")
                throw data_error("cases header must start with county_id");
            for (size_t i = 1; i < fields.size(); ++i) {
                Date d = Date::from_string(std::string(fields[i]));
                if (!t.dates.empty() && !(t.dates.back() < d))
                    throw data_error("cases date columns must be strictly increasing");
                t.dates.push_back(d);
            }
            return;
        }
        if (fields.size() != t.dates.size() + 1) {
            t.row_errors.push_back("line " + std::to_string(line_no) + ": wrong field count");
            return;
        }
        std::vector<int64_t> row;
        row.reserve(t.dates.size());
        for (size_t i = 1; i < fields.size(); ++i) {
            auto v = csv::parse_i64(fields[i]);
            if (!v || *v < 0) {
                t.row_errors.push_back("line " + std::to_string(line_no) + ": bad cell '" +
                                       std::string(fields[i]) + "'");
                return;
            }
            row.push_back(*v);
        }
        t.county_ids.emplace_back(fields[0]);
        t.cumulative.push_back(std::move(row));
    });
    if (!header_done) throw data_error("cases file is empty");
    // count corrections once, at parse time
    for (const auto& row : t.cumulative)
        for (size_t j = 1; j < row.size(); ++j)
            if (row[j] < row[j - 1]) ++t.corrections;
    return t;
}

CaseTable parse_cases_file(const std::string& path) { return parse_cases(csv::read_file(path)); }

std::vector<CaseRecord> CaseTable::records(const geo::ZoneIndex& zones) const {
    // county-level new counts (clamped), then sum upward so that
    // nation == sum of states == sum of counties on every date
    std::vector<CaseRecord> out;
    std::map<std::string, std::vector<int64_t>> state_new, state_cum;
    std::vector<int64_t> nation_new(dates.size(), 0), nation_cum(dates.size(), 0);

    for (size_t r = 0; r < county_ids.size(); ++r) {
        const std::string& county = county_ids[r];
        const std::string& state = zones.state_of_county(county);
        auto& snew = state_new.try_emplace(state, dates.size(), 0).first->second;
        auto& scum = state_cum.try_emplace(state, dates.size(), 0).first->second;
        for (size_t j = 0; j < dates.size(); ++j) {
            int64_t nv = j == 0 ? cumulative[r][0]
                                : std::max<int64_t>(0, cumulative[r][j] - cumulative[r][j - 1]);
            CaseRecord rec;
            rec.date = dates[j];
            rec.level = metrics::Level::County;
            rec.geo_id = county;
            rec.cumulative_confirmed = cumulative[r][j];
            rec.new_confirmed = nv;
            out.push_back(rec);
            snew[j] += nv;
            scum[j] += cumulative[r][j];
            nation_new[j] += nv;
            nation_cum[j] += cumulative[r][j];
        }
    }
    for (const auto& [state, snew] : state_new) {
        const auto& scum = state_cum.at(state);
        for (size_t j = 0; j < dates.size(); ++j) {
            CaseRecord rec;
            rec.date = dates[j];
            rec.level = metrics::Level::State;
            rec.geo_id = state;
            rec.cumulative_confirmed = scum[j];
            rec.new_confirmed = snew[j];
            out.push_back(rec);
        }
    }
    for (size_t j = 0; j < dates.size(); ++j) {
        CaseRecord rec;
        rec.date = dates[j];
        rec.level = metrics::Level::Nation;
        rec.geo_id = "US";
        rec.cumulative_confirmed = nation_cum[j];
        rec.new_confirmed = nation_new[j];
        out.push_back(rec);
    }
    return out;
}

JoinResult join_with_sdi(const std::vector<CaseRecord>& case_records,
                         const std::vector<sdi::SdiSeries>& sdi_series,
                         const geo::ZoneIndex& zones) {
    JoinResult res;
    std::map<std::pair<std::string, int32_t>, double> sdi_by_geo_date;
    std::map<std::string, bool> sdi_geos, case_geos;
    for (const auto& s : sdi_series) {
        std::string key = metrics::geo_key(s.level, s.geo_id);
        sdi_geos[key] = true;
        for (size_t i = 0; i < s.dates.size(); ++i)
            sdi_by_geo_date[{key, s.dates[i].days()}] =
                s.smoothed.empty() ? s.values[i] : s.smoothed[i];
    }

    auto population_of = [&](metrics::Level level, const std::string& geo) {
        switch (level) {
            case metrics::Level::County: return zones.county_population(geo);
            case metrics::Level::State: return zones.state_population(geo);
            default: return zones.total_population();
        }
    };

    for (const auto& rec : case_records) {
        std::string key = metrics::geo_key(rec.level, rec.geo_id);
        case_geos[key] = true;
        auto it = sdi_by_geo_date.find({key, rec.date.days()});
        if (it == sdi_by_geo_date.end()) continue;
        JoinedRow row;
        row.date = rec.date;
        row.geo_id = rec.geo_id;
        row.level = rec.level;
        row.sdi_smoothed = it->second;
        row.new_confirmed = rec.new_confirmed;
        double pop = population_of(rec.level, rec.geo_id);
        row.new_per_thousand = pop > 0 ? double(rec.new_confirmed) * 1000.0 / pop : 0.0;
        res.rows.push_back(row);
    }
    for (const auto& [key, _] : sdi_geos)
        if (!case_geos.count(key)) res.unmatched_geographies.push_back(key);
    for (const auto& [key, _] : case_geos)
        if (!sdi_geos.count(key)) res.unmatched_geographies.push_back(key);
    std::sort(res.unmatched_geographies.begin(), res.unmatched_geographies.end());
    std::sort(res.rows.begin(), res.rows.end(), [](const JoinedRow& a, const JoinedRow& b) {
        if (a.level != b.level) return int(a.level) < int(b.level);
        if (a.geo_id != b.geo_id) return a.geo_id < b.geo_id;
        return a.date < b.date;
    });
    return res;
}

}  // namespace sdipipe::cases
