#include "sdipipe/sdi.hpp"

#include <algorithm>
#include <cmath>

namespace sdipipe::sdi {

void SdiWeights::validate() const {
    const double ws[] = {w_home, w_work, w_nonwork, w_dist, w_outcounty};
    double sum = 0;
    for (double w : ws) {
        if (w < 0 || !std::isfinite(w)) throw data_error("SDI weights must be non-negative");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw data_error("SDI weights must sum to 1");
}

namespace {

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

// Reduction score for a trip-like metric: 1 - m/b, clamped. A zero
// benchmark pins the component to 0 (flagged by the caller when m > 0).
double reduction(double m, double b) {
    if (b <= 0) return 0.0;
    return clamp01(1.0 - m / b);
}

}  // namespace

SdiScore sdi_score(const metrics::DailyMetrics& m, const metrics::Benchmark& b,
                   const SdiWeights& w) {
    w.validate();
    if (!std::isfinite(b.pct_staying_home) || !std::isfinite(b.trips_pp))
        throw data_error("benchmark values must be finite");

    SdiScore out;
    double home = b.pct_staying_home < 1.0
                      ? clamp01((m.pct_staying_home - b.pct_staying_home) /
                                (1.0 - b.pct_staying_home))
                      : 1.0;
    double work = reduction(m.work_trips_pp, b.work_trips_pp);
    double nonwork = reduction(m.nonwork_trips_pp, b.nonwork_trips_pp);
    double dist = reduction(m.miles_pp, b.miles_pp);
    double outc = reduction(m.pct_out_of_county, b.pct_out_of_county);

    out.zero_benchmark_flag = (b.work_trips_pp <= 0 && m.work_trips_pp > 0) ||
                              (b.nonwork_trips_pp <= 0 && m.nonwork_trips_pp > 0) ||
                              (b.miles_pp <= 0 && m.miles_pp > 0) ||
                              (b.pct_out_of_county <= 0 && m.pct_out_of_county > 0);
    out.value = 100.0 * (w.w_home * home + w.w_work * work + w.w_nonwork * nonwork +
                         w.w_dist * dist + w.w_outcounty * outc);
    out.value = std::clamp(out.value, 0.0, 100.0);
    return out;
}

std::vector<double> moving_average(const std::vector<double>& series, int window,
                                   SmoothingMode mode) {
    if (window < 1 || (mode == SmoothingMode::Centered && window % 2 == 0))
        throw data_error("moving average window must be odd (centered) and >= 1");
    std::vector<double> out(series.size());
    const int n = static_cast<int>(series.size());
    for (int i = 0; i < n; ++i) {
        int lo, hi;  // inclusive
        if (mode == SmoothingMode::Centered) {
            lo = std::max(0, i - window / 2);
            hi = std::min(n - 1, i + window / 2);
        } else {
            lo = std::max(0, i - window + 1);
            hi = i;
        }
        double sum = 0;
        for (int j = lo; j <= hi; ++j) sum += series[j];
        out[i] = sum / double(hi - lo + 1);
    }
    return out;
}

}  // namespace sdipipe::sdi
