#include "sdipipe/phase.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sdipipe::phase {

RocSeries roc(const sdi::SdiSeries& series, int lookback_weekdays) {
    if (lookback_weekdays < 1) throw data_error("roc lookback must be >= 1");
    const auto& s = series.smoothed.empty() ? series.values : series.smoothed;
    RocSeries out;
    out.level = series.level;
    out.geo_id = series.geo_id;
    out.dates = series.dates;
    out.values.assign(s.size(), std::nullopt);
    for (size_t i = size_t(lookback_weekdays); i < s.size(); ++i) {
        double base = s[i - size_t(lookback_weekdays)];
        if (base == 0.0) {
            ++out.undefined_denominators;
            continue;
        }
        out.values[i] = 100.0 * (s[i] - base) / base;
    }
    return out;
}

PhaseDates detect_phases(const RocSeries& r, double eps, int k) {
    if (k < 1) throw data_error("fatigue run length must be >= 1");
    PhaseDates out;
    std::optional<size_t> peak;
    for (size_t i = 0; i < r.values.size(); ++i) {
        if (!r.values[i]) continue;
        if (!peak || *r.values[i] > *r.values[*peak]) peak = i;  // earliest on ties
    }
    if (!peak) return out;
    out.roc_peak_date = r.dates[*peak];

    std::optional<size_t> inertia;
    for (size_t i = *peak + 1; i < r.values.size(); ++i) {
        if (r.values[i] && std::abs(*r.values[i]) < eps) {
            inertia = i;
            break;
        }
    }
    if (!inertia) return out;
    out.inertia_start = r.dates[*inertia];

    // earliest run of >= k consecutive negative days starting at or after
    // the inertia date (an absent roc value breaks a run)
    size_t run_start = 0, run_len = 0;
    for (size_t i = *inertia; i < r.values.size(); ++i) {
        if (r.values[i] && *r.values[i] < 0.0) {
            if (run_len == 0) run_start = i;
            ++run_len;
            if (run_len == size_t(k)) {
                out.fatigue_start = r.dates[run_start];
                // extend to the sign change or the series end
                size_t j = i;
                while (j + 1 < r.values.size() && r.values[j + 1] && *r.values[j + 1] < 0.0) ++j;
                out.fatigue_end = r.dates[j];
                break;
            }
        } else {
            run_len = 0;
        }
    }
    return out;
}

WeekCompare week_compare(const std::vector<Date>& dates, const std::vector<double>& values,
                         Date pivot) {
    if (dates.size() != values.size()) throw internal_error("date/value size mismatch");
    WeekCompare out;
    for (size_t i = 0; i < dates.size(); ++i) {
        if (dates[i] < pivot)
            out.before.push_back(values[i]);  // keep all, trim below
        else
            out.after.push_back(values[i]);
    }
    if (out.before.size() < 5 || out.after.size() < 5)
        throw data_error("week_compare: need 5 weekdays on each side of " + pivot.to_string());
    out.before.erase(out.before.begin(), out.before.end() - 5);
    out.after.resize(5);

    auto mean = [](const std::vector<double>& v) {
        double s = 0;
        for (double x : v) s += x;
        return s / double(v.size());
    };
    auto var = [&](const std::vector<double>& v, double m) {
        double s = 0;
        for (double x : v) s += (x - m) * (x - m);
        return s / double(v.size() - 1);
    };
    out.mean_before = mean(out.before);
    out.mean_after = mean(out.after);
    out.variance_before = var(out.before, out.mean_before);
    out.variance_after = var(out.after, out.mean_after);
    out.pct_change =
        out.mean_before != 0 ? 100.0 * (out.mean_after - out.mean_before) / out.mean_before : 0.0;
    return out;
}

// Regularized incomplete beta via the Lentz continued fraction. Absolute
// error well under 1e-10 on the domain used here.
double regularized_incomplete_beta(double x, double a, double b) {
    if (!(x >= 0.0 && x <= 1.0) || a <= 0.0 || b <= 0.0)
        return std::numeric_limits<double>::quiet_NaN();
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;

    auto cf = [](double x_, double a_, double b_) {
        const double tiny = 1e-300;
        const double eps = 1e-15;
        double c = 1.0;
        double d = 1.0 - (a_ + b_) * x_ / (a_ + 1.0);
        if (std::abs(d) < tiny) d = tiny;
        d = 1.0 / d;
        double h = d;
        for (int m = 1; m <= 300; ++m) {
            double m2 = 2.0 * m;
            double num = m * (b_ - m) * x_ / ((a_ + m2 - 1.0) * (a_ + m2));
            d = 1.0 + num * d;
            if (std::abs(d) < tiny) d = tiny;
            c = 1.0 + num / c;
            if (std::abs(c) < tiny) c = tiny;
            d = 1.0 / d;
            h *= d * c;
            num = -(a_ + m) * (a_ + b_ + m) * x_ / ((a_ + m2) * (a_ + m2 + 1.0));
            d = 1.0 + num * d;
            if (std::abs(d) < tiny) d = tiny;
            c = 1.0 + num / c;
            if (std::abs(c) < tiny) c = tiny;
            d = 1.0 / d;
            double delta = d * c;
            h *= delta;
            if (std::abs(delta - 1.0) < eps) break;
        }
        return h;
    };

    double log_front = a * std::log(x) + b * std::log1p(-x) -
                       (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
    if (x < (a + 1.0) / (a + b + 2.0))
        return std::exp(log_front) * cf(x, a, b) / a;
    return 1.0 - std::exp(b * std::log1p(-x) + a * std::log(x) -
                          (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b))) *
                     cf(1.0 - x, b, a) / b;
}

double t_cdf(double t, double df) {
    if (df <= 0) return std::numeric_limits<double>::quiet_NaN();
    if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
    double x = df / (t * t + df);
    double ib = regularized_incomplete_beta(x, df / 2.0, 0.5);
    return t >= 0 ? 1.0 - ib / 2.0 : ib / 2.0;
}

TTestResult welch_t_test(std::span<const double> before, std::span<const double> after) {
    if (before.size() < 2 || after.size() < 2)
        throw data_error("welch_t_test: each sample needs >= 2 values");
    auto mean = [](std::span<const double> v) {
        double s = 0;
        for (double x : v) s += x;
        return s / double(v.size());
    };
    auto var = [&](std::span<const double> v, double m) {
        double s = 0;
        for (double x : v) s += (x - m) * (x - m);
        return s / double(v.size() - 1);
    };
    double mb = mean(before), ma = mean(after);
    double vb = var(before, mb), va = var(after, ma);
    double nb = double(before.size()), na = double(after.size());
    double se2 = va / na + vb / nb;

    TTestResult res;
    if (se2 <= 0.0) {
        // zero variance in both samples: equal means are a wash, otherwise
        // the limit decides
        if (ma == mb) {
            res.t_stat = 0.0;
            res.p_value = 0.5;
            res.df = na + nb - 2;
        } else {
            res.t_stat = ma < mb ? -std::numeric_limits<double>::infinity()
                                 : std::numeric_limits<double>::infinity();
            res.p_value = ma < mb ? 0.0 : 1.0;
            res.df = na + nb - 2;
        }
        return res;
    }
    res.t_stat = (ma - mb) / std::sqrt(se2);
    res.df = se2 * se2 /
             ((va / na) * (va / na) / (na - 1.0) + (vb / nb) * (vb / nb) / (nb - 1.0));
    res.p_value = t_cdf(res.t_stat, res.df);  // alternative: after < before
    return res;
}

namespace {

std::string json_str(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out += '"';
    return out;
}

std::string json_num(double v, int decimals = 6) {
    if (!std::isfinite(v)) return "null";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", decimals + 4, v);
    return buf;
}

std::string opt_date(const std::optional<Date>& d) {
    return d ? json_str(d->to_string()) : "null";
}

}  // namespace

std::string phase_report_json(const std::vector<PhaseReport>& reports) {
    std::string s = "[\n";
    for (size_t i = 0; i < reports.size(); ++i) {
        const PhaseReport& r = reports[i];
        s += "  {";
        s += "\"geo_id\": " + json_str(r.geo_id);
        s += ", \"level\": " + json_str(metrics::level_name(r.level));
        s += ", \"roc_peak_date\": " + opt_date(r.dates.roc_peak_date);
        s += ", \"inertia_start\": " + opt_date(r.dates.inertia_start);
        s += ", \"fatigue_start\": " + opt_date(r.dates.fatigue_start);
        s += ", \"fatigue_end\": " + opt_date(r.dates.fatigue_end);
        s += ", \"mean_before\": " + json_num(r.weeks.mean_before);
        s += ", \"mean_after\": " + json_num(r.weeks.mean_after);
        s += ", \"pct_change\": " + json_num(r.weeks.pct_change);
        s += ", \"t_stat\": " + json_num(r.ttest.t_stat);
        s += ", \"p_value\": " + json_num(r.ttest.p_value, 10);
        s += "}";
        s += (i + 1 < reports.size()) ? ",\n" : "\n";
    }
    s += "]\n";
    return s;
}

}  // namespace sdipipe::phase
