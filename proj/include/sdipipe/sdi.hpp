#pragma once

#include <string>
#include <vector>

#include "sdipipe/metrics.hpp"

namespace sdipipe::sdi {

struct SdiWeights {
    double w_home = 0.4;
    double w_work = 0.1;
    double w_nonwork = 0.2;
    double w_dist = 0.2;
    double w_outcounty = 0.1;

    void validate() const;  // non-negative, sum to 1 within 1e-12
};

struct SdiScore {
    double value = 0.0;             // in [0, 100]
    bool zero_benchmark_flag = false;  // some trip-like benchmark was 0 with m > 0
};

// Clamped weighted reduction of the five mobility components against the
// benchmark. m == b scores 0; full stay-home with zero trips scores 100.
SdiScore sdi_score(const metrics::DailyMetrics& m, const metrics::Benchmark& b,
                   const SdiWeights& w);

enum class SmoothingMode { Centered, Trailing };

// Moving average over the available window; edges use the truncated
// window, so output length and dates match the input.
std::vector<double> moving_average(const std::vector<double>& series, int window,
                                   SmoothingMode mode = SmoothingMode::Centered);

struct SdiSeries {
    metrics::Level level = metrics::Level::Nation;
    std::string geo_id;
    std::vector<Date> dates;    // strictly increasing weekdays
    std::vector<double> values;
    std::vector<double> smoothed;
};

}  // namespace sdipipe::sdi
