#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "qsk/errors.hpp"

namespace qsk {

constexpr double inf = std::numeric_limits<double>::infinity();
constexpr double neg_inf = -inf;
constexpr double pi = 3.14159265358979323846;
constexpr double two_pi = 2.0 * pi;

// log(sum_i e^{x_i}), stable under large magnitudes; -inf entries drop out.
inline double log_sum_exp(const std::vector<double>& x) {
    if (x.empty()) return neg_inf;
    const double mx = *std::max_element(x.begin(), x.end());
    if (!std::isfinite(mx)) return mx;  // all -inf (or a stray inf/nan propagates)
    double s = 0.0;
    for (double v : x) s += std::exp(v - mx);
    return mx + std::log(s);
}

inline double mean(const std::vector<double>& x) {
    if (x.empty()) return 0.0;
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

inline double sample_variance(const std::vector<double>& x) {
    const std::size_t n = x.size();
    if (n < 2) return 0.0;
    const double m = mean(x);
    // corrected two-pass: the second sum cancels the rounding error of the
    // mean, so identical inputs give exactly zero
    double s = 0.0, c = 0.0;
    for (double v : x) {
        s += (v - m) * (v - m);
        c += v - m;
    }
    const double var = (s - c * c / static_cast<double>(n)) / static_cast<double>(n - 1);
    return var > 0.0 ? var : 0.0;
}

// Standard error of the sample mean.
inline double sample_stderr(const std::vector<double>& x) {
    const std::size_t n = x.size();
    if (n < 2) return 0.0;
    return std::sqrt(sample_variance(x) / static_cast<double>(n));
}

// Statistics of log((1/M) sum e^{x_i}) with a leave-one-out jackknife error
// and the effective sample size of the exponential weights.
struct LogMeanStats {
    double log_mean = neg_inf;
    double jackknife_stderr = 0.0;
    double ess = 0.0;
    long n = 0;
};

inline LogMeanStats log_mean_exp_stats(const std::vector<double>& x) {
    LogMeanStats out;
    out.n = static_cast<long>(x.size());
    if (x.empty()) return out;
    const double mx = *std::max_element(x.begin(), x.end());
    if (mx == neg_inf) return out;  // every weight is zero
    const std::size_t m = x.size();
    std::vector<double> w(m);
    double s = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        w[i] = std::exp(x[i] - mx);
        s += w[i];
        s2 += w[i] * w[i];
    }
    out.log_mean = mx + std::log(s / static_cast<double>(m));
    out.ess = (s2 > 0.0) ? s * s / s2 : 0.0;
    if (m < 2) return out;
    // Leave-one-out estimates of the same log-mean.
    std::vector<double> loo(m);
    double loo_mean = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double rest = std::max(s - w[i], 0.0);
        loo[i] = (rest > 0.0) ? mx + std::log(rest / static_cast<double>(m - 1)) : neg_inf;
        loo_mean += loo[i];
    }
    loo_mean /= static_cast<double>(m);
    if (!std::isfinite(loo_mean)) {
        out.jackknife_stderr = std::numeric_limits<double>::infinity();
        return out;
    }
    double ss = 0.0;
    for (double v : loo) ss += (v - loo_mean) * (v - loo_mean);
    out.jackknife_stderr = std::sqrt(ss * static_cast<double>(m - 1) / static_cast<double>(m));
    return out;
}

}  // namespace qsk
