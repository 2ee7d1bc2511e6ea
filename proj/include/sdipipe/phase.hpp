#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sdipipe/sdi.hpp"

namespace sdipipe::phase {

// Percentage rate of change of a series over a weekday lookback. Entries
// without a lookback value (or with a zero denominator) are absent.
struct RocSeries {
    metrics::Level level = metrics::Level::Nation;
    std::string geo_id;
    std::vector<Date> dates;                        // same dates as the input series
    std::vector<std::optional<double>> values;      // percent
    int undefined_denominators = 0;                 // flagged s_{t-n} == 0 cases
};

RocSeries roc(const sdi::SdiSeries& series, int lookback_weekdays = 5);

struct PhaseDates {
    std::optional<Date> roc_peak_date;  // argmax, earliest on ties
    std::optional<Date> inertia_start;  // first date after the peak with |roc| < eps
    std::optional<Date> fatigue_start;  // first date of the earliest >= k-day negative run
    std::optional<Date> fatigue_end;    // last date of that run (sign change or series end)
};

// eps: elbow threshold in percent; k: required consecutive negative days.
// The fatigue run must begin at or after inertia_start. Absent patterns
// yield absent fields.
PhaseDates detect_phases(const RocSeries& r, double eps = 1.0, int k = 3);

struct WeekCompare {
    double mean_before = 0.0;
    double mean_after = 0.0;
    double pct_change = 0.0;        // 100 * (after - before) / before
    double variance_before = 0.0;   // unbiased sample variance
    double variance_after = 0.0;
    std::vector<double> before;     // the 5 weekday values before the pivot
    std::vector<double> after;      // the 5 weekday values from the pivot onward
};

// Means over the 5 weekdays before the pivot and the 5 from the pivot
// onward. Throws when either side has fewer than 5 weekdays of data.
WeekCompare week_compare(const std::vector<Date>& dates, const std::vector<double>& values,
                         Date pivot);

struct TTestResult {
    double t_stat = 0.0;
    double p_value = 0.5;  // one-sided, alternative "after < before"
    double df = 0.0;       // Welch-Satterthwaite
};

// Welch's unequal-variance t test, t = (mean(after) - mean(before)) / se.
// Identical samples give t = 0, p = 0.5; degenerate variances resolve by
// limit (p -> 0 or 1).
TTestResult welch_t_test(std::span<const double> before, std::span<const double> after);

// Numerics behind the test; exposed for verification.
double regularized_incomplete_beta(double x, double a, double b);
double t_cdf(double t, double df);

struct PhaseReport {
    std::string geo_id;
    metrics::Level level = metrics::Level::Nation;
    PhaseDates dates;
    WeekCompare weeks;
    TTestResult ttest;
};

std::string phase_report_json(const std::vector<PhaseReport>& reports);

}  // namespace sdipipe::phase
