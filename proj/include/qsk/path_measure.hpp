#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "qsk/errors.hpp"
#include "qsk/estimate.hpp"
#include "qsk/model_core.hpp"
#include "qsk/numeric.hpp"
#include "qsk/parallel.hpp"
#include "qsk/rng.hpp"

namespace qsk {

// A ±1-valued right-continuous path on [0,1] stored as its initial sign plus
// the ordered flip times. An even flip count keeps sigma(1) = sigma(0).
struct FlipPath {
    int initial_sign = 1;
    std::vector<double> flip_times;

    int flip_count() const { return static_cast<int>(flip_times.size()); }

    int sign_at(double t) const {
        const auto it = std::upper_bound(flip_times.begin(), flip_times.end(), t);
        const auto n_before = static_cast<std::size_t>(it - flip_times.begin());
        return (n_before % 2 == 0) ? initial_sign : -initial_sign;
    }
};

inline void validate_path(const FlipPath& p) {
    if (p.initial_sign != 1 && p.initial_sign != -1)
        throw ValidationError("flip path initial sign must be +1 or -1");
    if (p.flip_times.size() % 2 != 0)
        throw ValidationError("flip path must have an even number of flips");
    double prev = 0.0;
    for (double t : p.flip_times) {
        if (!std::isfinite(t) || t <= prev || t >= 1.0)
            throw ValidationError("flip times must be strictly increasing inside (0,1)");
        prev = t;
    }
}

struct SpinConfig {
    std::vector<FlipPath> paths;
    int size() const { return static_cast<int>(paths.size()); }
};

// Restriction window: configurations whose mean squared projection tail
// (1/N) sum_i ||sigma_i - sigma_i(d)||^2 stays within epsilon.
struct RestrictionSpec {
    double epsilon = 0.0;
    int dim_d = 1;
};

inline void validate_restriction(const RestrictionSpec& s) {
    if (!std::isfinite(s.epsilon) || s.epsilon <= 0.0)
        throw ValidationError("restriction epsilon must be positive and finite");
    if (s.dim_d < 1) throw ValidationError("restriction dimension must be >= 1");
}

// Flip-count law conditioned on evenness: P(K = 2k) = h^{2k} / ((2k)! cosh h).
// Inverse-CDF over k; the series tail is dropped once below 1e-18 relative mass.
inline int sample_even_flip_count(double field_h, Rng& rng) {
    if (field_h == 0.0) return 0;
    const double u = rng.uniform();
    double term = 1.0 / std::cosh(field_h);
    double cum = term;
    int k = 0;
    while (u >= cum) {
        ++k;
        term *= field_h * field_h / (static_cast<double>(2 * k - 1) * static_cast<double>(2 * k));
        cum += term;
        if (term < 1e-18 * std::max(1.0, cum)) break;
    }
    return 2 * k;
}

inline FlipPath sample_path(double field_h, Rng& rng) {
    if (!(field_h >= 0.0) || !std::isfinite(field_h))
        throw ValidationError("field strength must be finite and >= 0");
    FlipPath p;
    p.initial_sign = rng.sign();
    const int k = sample_even_flip_count(field_h, rng);
    p.flip_times.resize(static_cast<std::size_t>(k));
    for (;;) {
        for (auto& t : p.flip_times) t = rng.uniform_pos();
        // uniform_pos keeps times away from 0; 1.0 is never produced
        std::sort(p.flip_times.begin(), p.flip_times.end());
        const bool tied =
            std::adjacent_find(p.flip_times.begin(), p.flip_times.end()) != p.flip_times.end();
        if (!tied) break;
    }
    return p;
}

inline SpinConfig sample_config(int n, double field_h, Rng& rng) {
    SpinConfig c;
    c.paths.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) c.paths.push_back(sample_path(field_h, rng));
    return c;
}

// Exact integral of a(t) b(t) over [0,1] by walking the merged flip grid.
inline double l2_inner(const FlipPath& a, const FlipPath& b) {
    std::size_t i = 0, j = 0;
    int sa = a.initial_sign, sb = b.initial_sign;
    double t = 0.0, acc = 0.0;
    while (t < 1.0) {
        const double na = i < a.flip_times.size() ? a.flip_times[i] : 1.0;
        const double nb = j < b.flip_times.size() ? b.flip_times[j] : 1.0;
        const double tn = std::min(na, nb);
        acc += static_cast<double>(sa * sb) * (tn - t);
        if (tn == na && i < a.flip_times.size()) {
            sa = -sa;
            ++i;
        }
        if (tn == nb && j < b.flip_times.size()) {
            sb = -sb;
            ++j;
        }
        t = tn;
    }
    return acc;
}

namespace detail {

// cos/sin of 2*pi*u evaluated on the reduced phase u - floor(u), so integer u
// gives exactly 1 and 0. Keeps segment integrals of full periods at exact zero.
inline double cos_reduced(double u) {
    return std::cos(two_pi * (u - std::floor(u)));
}
inline double sin_reduced(double u) {
    return std::sin(two_pi * (u - std::floor(u)));
}

}  // namespace detail

// Orthonormal basis on [0,1]: index 1 is the constant 1, index 2j is
// sqrt(2) sin(2 pi j t), index 2j+1 is sqrt(2) cos(2 pi j t).
inline double fourier_coeff(const FlipPath& path, int k) {
    if (k < 1) throw ValidationError("basis index must be >= 1");
    const std::size_t nf = path.flip_times.size();
    double acc = 0.0;
    int s = path.initial_sign;
    double t0 = 0.0;
    if (k == 1) {
        for (std::size_t i = 0; i <= nf; ++i) {
            const double t1 = i < nf ? path.flip_times[i] : 1.0;
            acc += s * (t1 - t0);
            t0 = t1;
            s = -s;
        }
        return acc;
    }
    const int j = k / 2;
    const bool is_sin = (k % 2 == 0);
    const double scale = std::sqrt(2.0) / ((two_pi * j));
    for (std::size_t i = 0; i <= nf; ++i) {
        const double t1 = i < nf ? path.flip_times[i] : 1.0;
        const double seg = is_sin
                               ? detail::cos_reduced(j * t0) - detail::cos_reduced(j * t1)
                               : detail::sin_reduced(j * t1) - detail::sin_reduced(j * t0);
        acc += s * seg;
        t0 = t1;
        s = -s;
    }
    return scale * acc;
}

inline std::vector<double> project_d(const FlipPath& path, int d) {
    if (d < 1) throw ValidationError("projection dimension must be >= 1");
    std::vector<double> v(static_cast<std::size_t>(d));
    for (int k = 1; k <= d; ++k) v[static_cast<std::size_t>(k - 1)] = fourier_coeff(path, k);
    return v;
}

// Squared norm lost by truncating at dimension d, computed as 1 minus the
// partial Parseval sum (the path itself has unit norm).
inline double projection_tail_sq(const FlipPath& path, int d) {
    double kept = 0.0;
    for (int k = 1; k <= d; ++k) {
        const double c = fourier_coeff(path, k);
        kept += c * c;
    }
    return 1.0 - kept;
}

inline double path_energy(const SpinConfig& config, const DisorderMatrix& disorder, double beta) {
    const int n = config.size();
    if (n < 1) throw ValidationError("configuration must hold at least one path");
    if (disorder.n() != n) throw ValidationError("configuration size does not match disorder");
    std::vector<double> inner(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const double v = i == j ? 1.0 : l2_inner(config.paths[static_cast<std::size_t>(i)],
                                                     config.paths[static_cast<std::size_t>(j)]);
            inner[static_cast<std::size_t>(i) * n + j] = v;
            inner[static_cast<std::size_t>(j) * n + i] = v;
        }
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            acc += disorder(i, j) * inner[static_cast<std::size_t>(i) * n + j];
    return beta / std::sqrt(static_cast<double>(n)) * acc;
}

// Energy of the dimension-reduced configuration: inner products replaced by
// dot products of the first d basis coefficients.
inline double reduced_path_energy(const SpinConfig& config, const DisorderMatrix& disorder,
                                  double beta, int d) {
    const int n = config.size();
    if (n < 1) throw ValidationError("configuration must hold at least one path");
    if (disorder.n() != n) throw ValidationError("configuration size does not match disorder");
    std::vector<std::vector<double>> proj;
    proj.reserve(static_cast<std::size_t>(n));
    for (const auto& p : config.paths) proj.push_back(project_d(p, d));
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double dot = 0.0;
            for (int k = 0; k < d; ++k)
                dot += proj[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] *
                       proj[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
            acc += disorder(i, j) * dot;
        }
    return beta / std::sqrt(static_cast<double>(n)) * acc;
}

inline bool in_restricted_set(const SpinConfig& config, const RestrictionSpec& spec) {
    validate_restriction(spec);
    double tail = 0.0;
    for (const auto& p : config.paths) tail += projection_tail_sq(p, spec.dim_d);
    return tail / config.size() <= spec.epsilon;
}

namespace detail {

inline Estimate log_mean_estimate(const std::vector<double>& weights, int n_spins,
                                  double acceptance, int n_samples) {
    const auto stats = log_mean_exp_stats(weights);
    Estimate e;
    e.value = stats.log_mean / n_spins;
    e.stderr_ = stats.jackknife_stderr / n_spins;
    e.n_samples = n_samples;
    e.acceptance_rate = acceptance;
    e.ess = stats.ess;
    e.status = stats.ess < 0.05 * n_samples ? EstimateStatus::high_variance : EstimateStatus::ok;
    return e;
}

}  // namespace detail

// Plain-importance estimate of (1/N) log of the path-average of e^{energy}.
// Optional reduction evaluates the energy through d basis coefficients.
inline Estimate mc_log_partition(const ModelParams& params, const DisorderMatrix& disorder,
                                 int n_samples, std::uint64_t seed, int reduction_d = 0,
                                 int threads = 0) {
    validate(params);
    if (disorder.n() != params.n) throw ValidationError("disorder size does not match n");
    if (n_samples < 100) throw ValidationError("need at least 100 samples");
    if (reduction_d < 0) throw ValidationError("reduction dimension must be >= 1 when set");
    std::vector<double> w(static_cast<std::size_t>(n_samples));
    parallel_for(static_cast<std::size_t>(n_samples), threads, [&](std::size_t s) {
        Rng rng(derive_seed(seed, stream::paths, s));
        const auto config = sample_config(params.n, params.h, rng);
        w[s] = reduction_d > 0
                   ? reduced_path_energy(config, disorder, params.beta, reduction_d)
                   : path_energy(config, disorder, params.beta);
    });
    return detail::log_mean_estimate(w, params.n, 1.0, n_samples);
}

// Same estimator with draws outside the restriction window dropped; kept
// normalization is over the full budget, so acceptance 1 reproduces the
// unrestricted value sample-for-sample.
inline Estimate restricted_mc_log_partition(const ModelParams& params,
                                            const DisorderMatrix& disorder,
                                            const RestrictionSpec& spec, int n_samples,
                                            std::uint64_t seed, bool reduced = false,
                                            int threads = 0) {
    validate(params);
    validate_restriction(spec);
    if (disorder.n() != params.n) throw ValidationError("disorder size does not match n");
    if (n_samples < 100) throw ValidationError("need at least 100 samples");
    std::vector<double> w(static_cast<std::size_t>(n_samples));
    std::vector<char> accepted(static_cast<std::size_t>(n_samples));
    parallel_for(static_cast<std::size_t>(n_samples), threads, [&](std::size_t s) {
        Rng rng(derive_seed(seed, stream::paths, s));
        const auto config = sample_config(params.n, params.h, rng);
        const bool ok = in_restricted_set(config, spec);
        accepted[s] = ok ? 1 : 0;
        if (!ok) {
            w[s] = neg_inf;
        } else {
            w[s] = reduced ? reduced_path_energy(config, disorder, params.beta, spec.dim_d)
                           : path_energy(config, disorder, params.beta);
        }
    });
    std::size_t n_acc = 0;
    for (char c : accepted) n_acc += static_cast<std::size_t>(c);
    if (n_acc == 0) throw NumericalError("restriction rejected every sample");
    return detail::log_mean_estimate(w, params.n,
                                     static_cast<double>(n_acc) / n_samples, n_samples);
}

}  // namespace qsk
