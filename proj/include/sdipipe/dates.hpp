#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sdipipe {

// Civil date as days since 1970-01-01 (UTC). Weekday-aware helpers for the
// analysis calendar, which is weekdays-only throughout.
class Date {
public:
    Date() = default;
    explicit Date(int32_t days_since_epoch) : days_(days_since_epoch) {}
    static Date from_civil(int year, int month, int day);
    static Date from_string(const std::string& iso);          // "YYYY-MM-DD"
    static Date from_epoch_seconds(int64_t ts, int32_t utc_offset_s = 0);

    int32_t days() const { return days_; }
    int64_t epoch_seconds() const { return int64_t(days_) * 86400; }
    void civil(int& year, int& month, int& day) const;
    int weekday() const;                  // 0 = Monday .. 6 = Sunday
    bool is_weekday() const { return weekday() < 5; }
    std::string to_string() const;

    Date operator+(int d) const { return Date(days_ + d); }
    Date operator-(int d) const { return Date(days_ - d); }
    int operator-(Date o) const { return days_ - o.days_; }
    auto operator<=>(const Date&) const = default;

private:
    int32_t days_ = 0;
};

// All weekdays in [start, end], inclusive.
std::vector<Date> weekdays_between(Date start, Date end);

// Seconds elapsed since local midnight for a timestamp under a fixed offset.
int64_t seconds_into_local_day(int64_t ts, int32_t utc_offset_s);

}  // namespace sdipipe
