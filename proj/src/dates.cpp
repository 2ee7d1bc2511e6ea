#include "sdipipe/dates.hpp"

#include <cstdio>
#include <stdexcept>

namespace sdipipe {

namespace {

// Howard Hinnant's civil date algorithms.
int32_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<int>(doe) - 719468;
}

void civil_from_days(int32_t z, int& y, int& m, int& d) {
    z += 719468;
    const int era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<int>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y += (m <= 2);
}

int64_t floor_div(int64_t a, int64_t b) {
    int64_t q = a / b;
    if ((a % b) != 0 && ((a < 0) != (b < 0))) --q;
    return q;
}

}  // namespace

Date Date::from_civil(int year, int month, int day) {
    return Date(days_from_civil(year, month, day));
}

Date Date::from_string(const std::string& iso) {
    int y = 0, m = 0, d = 0;
    if (std::sscanf(iso.c_str(), "%d-%d-%d", &y, &m, &d) != 3 || m < 1 || m > 12 || d < 1 || d > 31)
        throw std::runtime_error("bad date: '" + iso + "' (want YYYY-MM-DD)");
    return from_civil(y, m, d);
}

Date Date::from_epoch_seconds(int64_t ts, int32_t utc_offset_s) {
    return Date(static_cast<int32_t>(floor_div(ts + utc_offset_s, 86400)));
}

void Date::civil(int& year, int& month, int& day) const {
    civil_from_days(days_, year, month, day);
}

int Date::weekday() const {
    // 1970-01-01 was a Thursday (index 3 with Monday = 0).
    int w = (days_ + 3) % 7;
    return w < 0 ? w + 7 : w;
}

std::string Date::to_string() const {
    int y, m, d;
    civil(y, m, d);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
    return buf;
}

std::vector<Date> weekdays_between(Date start, Date end) {
    std::vector<Date> out;
    for (Date d = start; d <= end; d = d + 1)
        if (d.is_weekday()) out.push_back(d);
    return out;
}

int64_t seconds_into_local_day(int64_t ts, int32_t utc_offset_s) {
    int64_t local = ts + utc_offset_s;
    int64_t r = local - floor_div(local, 86400) * 86400;
    return r;
}

}  // namespace sdipipe
