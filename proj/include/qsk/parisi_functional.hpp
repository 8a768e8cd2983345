#pragma once

#include <Eigen/Dense>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "qsk/errors.hpp"
#include "qsk/estimate.hpp"
#include "qsk/matrix_util.hpp"
#include "qsk/numeric.hpp"
#include "qsk/path_measure.hpp"
#include "qsk/rng.hpp"

namespace qsk {

// Step path of ordered PSD matrices: value gamma_j on [m_{j-1}, m_j), with
// gamma_0 = 0 and m_r = 1. The endpoint gamma_r is the self-overlap target.
struct DiscretePiPath {
    int d = 0;
    std::vector<double> weights;          // m_0 <= ... <= m_r = 1, in (0,1]
    std::vector<Eigen::MatrixXd> levels;  // gamma_0, ..., gamma_r

    int r() const { return static_cast<int>(weights.size()) - 1; }
    const Eigen::MatrixXd& endpoint() const { return levels.back(); }
};

inline void validate_pi_path(const DiscretePiPath& p, double increment_tol = 1e-10) {
    if (p.d < 1) throw ValidationError("pi path dimension must be >= 1");
    if (p.weights.empty() || p.weights.size() != p.levels.size())
        throw ValidationError("pi path needs matching weight and level counts, at least one each");
    double prev = 0.0;
    for (double m : p.weights) {
        if (!std::isfinite(m) || m <= 0.0 || m > 1.0)
            throw ValidationError("pi path weights must lie in (0,1]");
        if (m < prev) throw ValidationError("pi path weights must be nondecreasing");
        prev = m;
    }
    if (std::abs(p.weights.back() - 1.0) > 1e-12)
        throw ValidationError("last pi path weight must equal 1");
    for (const auto& g : p.levels) {
        if (g.rows() != p.d || g.cols() != p.d)
            throw ValidationError("pi path level has wrong dimensions");
        if (!g.allFinite()) throw ValidationError("pi path level has non-finite entries");
        if (!is_symmetric(g)) throw ValidationError("pi path levels must be symmetric");
    }
    if (p.levels.front().cwiseAbs().maxCoeff() > 1e-10)
        throw ValidationError("pi path must start at zero");
    for (std::size_t j = 1; j < p.levels.size(); ++j) {
        if (min_eigenvalue(p.levels[j] - p.levels[j - 1]) < -increment_tol)
            throw ValidationError("pi path increments must be positive semidefinite");
    }
    if (min_eigenvalue(p.levels.back()) < -increment_tol)
        throw ValidationError("pi path endpoint must be positive semidefinite");
    if (p.levels.back().trace() > 1.0 + 1e-10)
        throw ValidationError("pi path endpoint trace must be at most 1");
}

inline void validate_multiplier(const Eigen::MatrixXd& lam, int d) {
    if (lam.rows() != d || lam.cols() != d)
        throw ValidationError("multiplier has wrong dimensions");
    if (!lam.allFinite()) throw ValidationError("multiplier has non-finite entries");
    if (!is_symmetric(lam)) throw ValidationError("multiplier must be symmetric");
}

struct CavityFields {
    std::vector<Eigen::VectorXd> fields;  // X_1, ..., X_r
};

// Exact step integral of the squared Hilbert-Schmidt norm along the path.
inline double pi_hs_integral(const DiscretePiPath& p) {
    double acc = 0.0, prev = 0.0;
    for (std::size_t j = 0; j < p.levels.size(); ++j) {
        const double n2 = p.levels[j].squaredNorm();
        acc += (p.weights[j] - prev) * n2;
        prev = p.weights[j];
    }
    return acc;
}

// Step integral of the trace distance between two paths sharing one weight
// sequence.
inline double pi_trace_distance(const DiscretePiPath& a, const DiscretePiPath& b) {
    if (a.weights != b.weights)
        throw ValidationError("trace distance requires a shared weight sequence");
    double acc = 0.0, prev = 0.0;
    for (std::size_t j = 0; j < a.levels.size(); ++j) {
        acc += (a.weights[j] - prev) * trace_norm_sym(a.levels[j] - b.levels[j]);
        prev = a.weights[j];
    }
    return acc;
}

namespace detail {

inline double lse_vec(const Eigen::VectorXd& x) {
    const double mx = x.maxCoeff();
    if (!std::isfinite(mx)) return mx;
    return mx + std::log((x.array() - mx).exp().sum());
}

// Factors F_j with F_j F_j^T = 2 (gamma_j - gamma_{j-1}), one per level.
inline std::vector<Eigen::MatrixXd> increment_factors(const DiscretePiPath& p) {
    std::vector<Eigen::MatrixXd> fs;
    fs.reserve(p.levels.size() - 1);
    // tolerance matches the doubled increment: path validation admits
    // eigenvalues down to -1e-10 before scaling
    for (std::size_t j = 1; j < p.levels.size(); ++j)
        fs.push_back(psd_factor(2.0 * (p.levels[j] - p.levels[j - 1]), 2e-10,
                                "cavity field covariance"));
    return fs;
}

}  // namespace detail

// Finitely supported spin law on the unit ball of R^d: the terminal integral
// runs over weighted atoms. Covers the exact two-point law at d=1, a binned
// empirical law of first-coefficient projections, and explicit sample sets.
class SpinLaw {
  public:
    static SpinLaw two_point() {
        SpinLaw law;
        law.d_ = 1;
        law.points_.resize(1, 2);
        law.points_(0, 0) = 1.0;
        law.points_(0, 1) = -1.0;
        law.log_weights_.resize(2);
        law.log_weights_.setConstant(-std::log(2.0));
        return law;
    }

    static SpinLaw weighted(const Eigen::MatrixXd& points, const Eigen::VectorXd& weights) {
        if (points.cols() != weights.size() || points.cols() == 0)
            throw ValidationError("spin law needs one weight per atom");
        double total = 0.0;
        for (Eigen::Index k = 0; k < weights.size(); ++k) {
            if (!(weights[k] >= 0.0) || !std::isfinite(weights[k]))
                throw ValidationError("spin law weights must be finite and nonnegative");
            total += weights[k];
        }
        if (total <= 0.0) throw ValidationError("spin law weights must not all vanish");
        SpinLaw law;
        law.d_ = static_cast<int>(points.rows());
        law.points_ = points;
        law.log_weights_.resize(weights.size());
        for (Eigen::Index k = 0; k < weights.size(); ++k)
            law.log_weights_[k] = weights[k] > 0.0 ? std::log(weights[k] / total) : neg_inf;
        return law;
    }

    static SpinLaw sample_set(int d, double field_h, int n_atoms, std::uint64_t seed) {
        if (d < 1 || n_atoms < 1) throw ValidationError("spin law sample set needs d, atoms >= 1");
        Eigen::MatrixXd pts(d, n_atoms);
        Rng rng(derive_seed(seed, stream::law));
        for (int k = 0; k < n_atoms; ++k) {
            const auto v = project_d(sample_path(field_h, rng), d);
            for (int i = 0; i < d; ++i) pts(i, k) = v[static_cast<std::size_t>(i)];
        }
        SpinLaw law;
        law.d_ = d;
        law.points_ = pts;
        law.log_weights_.resize(n_atoms);
        law.log_weights_.setConstant(-std::log(static_cast<double>(n_atoms)));
        return law;
    }

    // Binned law of the first basis coefficient of sampled paths; the bin
    // table is built once from a fixed internal seed and cached to disk.
    static SpinLaw projection_histogram(double field_h, int bins = 512,
                                        long n_draws = 1000000) {
        if (field_h == 0.0) return two_point();
        if (bins < 2 || n_draws < 1000)
            throw ValidationError("projection histogram needs bins >= 2, draws >= 1000");
        std::vector<double> weights;
        if (!load_histogram(field_h, bins, n_draws, weights)) {
            weights.assign(static_cast<std::size_t>(bins), 0.0);
            Rng rng(derive_seed(std::bit_cast<std::uint64_t>(field_h), stream::histogram,
                                static_cast<std::uint64_t>(bins)));
            for (long i = 0; i < n_draws; ++i) {
                const double c = fourier_coeff(sample_path(field_h, rng), 1);
                int b = static_cast<int>((c + 1.0) * 0.5 * bins);
                b = std::min(std::max(b, 0), bins - 1);
                weights[static_cast<std::size_t>(b)] += 1.0;
            }
            for (auto& w : weights) w /= static_cast<double>(n_draws);
            store_histogram(field_h, bins, n_draws, weights);
        }
        Eigen::MatrixXd pts(1, bins);
        Eigen::VectorXd w(bins);
        for (int b = 0; b < bins; ++b) {
            pts(0, b) = -1.0 + (b + 0.5) * 2.0 / bins;
            w[b] = weights[static_cast<std::size_t>(b)];
        }
        return weighted(pts, w);
    }

    int d() const { return d_; }
    const Eigen::MatrixXd& points() const { return points_; }
    const Eigen::VectorXd& log_weights() const { return log_weights_; }

    // Mean atom, for diagnostics.
    Eigen::VectorXd mean() const {
        Eigen::VectorXd m = Eigen::VectorXd::Zero(d_);
        for (Eigen::Index k = 0; k < points_.cols(); ++k)
            m += std::exp(log_weights_[k]) * points_.col(k);
        return m;
    }

    // Precomputed per-atom quadratic terms for one multiplier; the linear
    // field part is supplied per call. This is the hot loop of every engine.
    struct Evaluator {
        Eigen::MatrixXd points;
        Eigen::VectorXd base;  // log w_k + v_k^T lambda v_k
        double beta = 0.0;

        double log_integral(const Eigen::VectorXd& field_sum) const {
            return detail::lse_vec(base + beta * (points.transpose() * field_sum));
        }
        double log_integral_zero_field() const { return detail::lse_vec(base); }
    };

    Evaluator evaluator(double beta, const Eigen::MatrixXd& lambda) const {
        validate_multiplier(lambda, d_);
        Evaluator ev;
        ev.points = points_;
        ev.beta = beta;
        ev.base = log_weights_;
        const Eigen::MatrixXd lp = lambda * points_;
        for (Eigen::Index k = 0; k < points_.cols(); ++k)
            ev.base[k] += points_.col(k).dot(lp.col(k));
        return ev;
    }

  private:
    static std::filesystem::path cache_dir() {
        if (const char* env = std::getenv("QSK_CACHE_DIR"); env && *env)
            return std::filesystem::path(env);
        return std::filesystem::path(".qsk_cache");
    }

    static std::filesystem::path cache_file(double h, int bins, long n_draws) {
        char name[96];
        std::snprintf(name, sizeof(name), "law_h%016llx_b%d_n%ld.v1.bin",
                      static_cast<unsigned long long>(std::bit_cast<std::uint64_t>(h)), bins,
                      n_draws);
        return cache_dir() / name;
    }

    static bool load_histogram(double h, int bins, long n_draws, std::vector<double>& out) {
        std::ifstream in(cache_file(h, bins, n_draws), std::ios::binary);
        if (!in) return false;
        std::uint64_t magic = 0, nb = 0;
        double stored_h = 0.0;
        in.read(reinterpret_cast<char*>(&magic), sizeof magic);
        in.read(reinterpret_cast<char*>(&nb), sizeof nb);
        in.read(reinterpret_cast<char*>(&stored_h), sizeof stored_h);
        if (!in || magic != k_magic || nb != static_cast<std::uint64_t>(bins) || stored_h != h)
            return false;
        out.resize(static_cast<std::size_t>(bins));
        in.read(reinterpret_cast<char*>(out.data()),
                static_cast<std::streamsize>(out.size() * sizeof(double)));
        return static_cast<bool>(in);
    }

    static void store_histogram(double h, int bins, long n_draws,
                                const std::vector<double>& weights) {
        std::error_code ec;
        std::filesystem::create_directories(cache_dir(), ec);
        const auto final_path = cache_file(h, bins, n_draws);
        const auto tmp_path = final_path.string() + ".tmp";
        {
            std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
            if (!out) return;  // cache is best-effort
            const std::uint64_t magic = k_magic, nb = static_cast<std::uint64_t>(bins);
            out.write(reinterpret_cast<const char*>(&magic), sizeof magic);
            out.write(reinterpret_cast<const char*>(&nb), sizeof nb);
            out.write(reinterpret_cast<const char*>(&h), sizeof h);
            out.write(reinterpret_cast<const char*>(weights.data()),
                      static_cast<std::streamsize>(weights.size() * sizeof(double)));
        }
        std::filesystem::rename(tmp_path, final_path, ec);
        if (ec) std::filesystem::remove(tmp_path, ec);
    }

    static constexpr std::uint64_t k_magic = 0x51534b4c415731ull;  // "QSKLAW1"

    int d_ = 0;
    Eigen::MatrixXd points_;
    Eigen::VectorXd log_weights_;
};

inline CavityFields sample_cavity_fields(const DiscretePiPath& path, Rng& rng) {
    validate_pi_path(path);
    const auto factors = detail::increment_factors(path);
    CavityFields out;
    out.fields.reserve(factors.size());
    for (const auto& f : factors) {
        Eigen::VectorXd xi(f.cols());
        for (Eigen::Index i = 0; i < xi.size(); ++i) xi[i] = rng.normal();
        out.fields.push_back(f * xi);
    }
    return out;
}

// log of the law-average of exp(beta <v, sum X_j> + v^T lambda v).
inline double y_terminal(const CavityFields& fields, const Eigen::MatrixXd& multiplier,
                         double beta, const SpinLaw& law) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(law.d());
    for (const auto& x : fields.fields) {
        if (x.size() != law.d()) throw ValidationError("cavity field dimension mismatch");
        sum += x;
    }
    return law.evaluator(beta, multiplier).log_integral(sum);
}

namespace detail {

constexpr double k_flat_weight_cutoff = 1e-6;

// (1/m) log of the average of e^{m y}; the m -> 0 limit is the plain mean.
inline double combine_level(const std::vector<double>& y, double m) {
    if (m < k_flat_weight_cutoff) return mean(y);
    double mx = neg_inf;
    for (double v : y) mx = std::max(mx, v);
    if (!std::isfinite(mx)) return mx;
    double s = 0.0;
    for (double v : y) s += std::exp(m * (v - mx));
    return mx + std::log(s / static_cast<double>(y.size())) / m;
}

struct PhiWorkspace {
    const std::vector<Eigen::MatrixXd>* factors = nullptr;
    const SpinLaw::Evaluator* evaluator = nullptr;
    const std::vector<int>* budget = nullptr;
    const std::vector<double>* weights = nullptr;
    std::uint64_t seed = 0;
    int r = 0;
    int d = 0;
};

// Y_j conditioned on the field sum accumulated so far. Node seeds depend only
// on (seed, level, flat index), so nearby parameter points share their draws.
inline double phi_recurse(const PhiWorkspace& ws, int j, const Eigen::VectorXd& field_sum,
                          std::uint64_t flat) {
    if (j == ws.r) return ws.evaluator->log_integral(field_sum);
    const int n = (*ws.budget)[static_cast<std::size_t>(j)];
    const auto& factor = (*ws.factors)[static_cast<std::size_t>(j)];
    std::vector<double> y(static_cast<std::size_t>(n));
    Eigen::VectorXd xi(factor.cols());
    for (int a = 0; a < n; ++a) {
        const std::uint64_t child = flat * static_cast<std::uint64_t>(n) +
                                    static_cast<std::uint64_t>(a);
        Rng rng(derive_seed(ws.seed, stream::cavity, static_cast<std::uint64_t>(j + 1), child));
        for (Eigen::Index i = 0; i < xi.size(); ++i) xi[i] = rng.normal();
        y[static_cast<std::size_t>(a)] = phi_recurse(ws, j + 1, field_sum + factor * xi, child);
    }
    return combine_level(y, (*ws.weights)[static_cast<std::size_t>(j)]);
}

}  // namespace detail

// Nested Monte Carlo estimate of the recursion head Y_0. The returned error
// combines a bootstrap over the root level with a first-order bias proxy for
// the log-of-mean transform.
inline Estimate parisi_phi(const DiscretePiPath& path, const Eigen::MatrixXd& multiplier,
                           double beta, const SpinLaw& law, const std::vector<int>& budget,
                           std::uint64_t seed) {
    validate_pi_path(path);
    validate_multiplier(multiplier, path.d);
    if (law.d() != path.d) throw ValidationError("spin law dimension does not match path");
    if (!(beta >= 0.0) || !std::isfinite(beta))
        throw ValidationError("beta must be finite and >= 0");
    const int r = path.r();
    if (static_cast<int>(budget.size()) != r)
        throw ValidationError("need one sample count per recursion level");
    for (int n : budget)
        if (n < 10) throw ValidationError("per-level sample counts must be at least 10");

    const auto factors = detail::increment_factors(path);
    const auto ev = law.evaluator(beta, multiplier);

    Estimate est;
    long total = 1;
    for (int n : budget) total *= n;
    est.n_samples = total;

    if (r == 0) {
        est.value = ev.log_integral_zero_field();
        return est;
    }

    // Evaluate the root level by hand so its per-draw values are available
    // for the bootstrap.
    detail::PhiWorkspace ws{&factors, &ev, &budget, &path.weights, seed, r, path.d};
    const int n0 = budget[0];
    std::vector<double> y1(static_cast<std::size_t>(n0));
    {
        Eigen::VectorXd xi(factors[0].cols());
        for (int a = 0; a < n0; ++a) {
            Rng rng(derive_seed(seed, stream::cavity, 1, static_cast<std::uint64_t>(a)));
            for (Eigen::Index i = 0; i < xi.size(); ++i) xi[i] = rng.normal();
            y1[static_cast<std::size_t>(a)] =
                detail::phi_recurse(ws, 1, factors[0] * xi, static_cast<std::uint64_t>(a));
        }
    }
    const double m0 = path.weights[0];
    est.value = detail::combine_level(y1, m0);

    const int n_boot = 200;
    Rng boot_rng(derive_seed(seed, stream::bootstrap));
    std::vector<double> resampled(static_cast<std::size_t>(n0));
    std::vector<double> boot_vals(static_cast<std::size_t>(n_boot));
    for (int b = 0; b < n_boot; ++b) {
        for (auto& v : resampled) {
            const auto idx = static_cast<std::size_t>(boot_rng.uniform() * n0);
            v = y1[std::min(idx, static_cast<std::size_t>(n0 - 1))];
        }
        boot_vals[static_cast<std::size_t>(b)] = detail::combine_level(resampled, m0);
    }
    const double boot_sd = std::sqrt(sample_variance(boot_vals));

    double bias = 0.0;
    if (m0 >= detail::k_flat_weight_cutoff) {
        double mx = neg_inf;
        for (double v : y1) mx = std::max(mx, m0 * v);
        double s1 = 0.0, s2 = 0.0;
        for (double v : y1) {
            const double w = std::exp(m0 * v - mx);
            s1 += w;
            s2 += w * w;
        }
        est.ess = s1 * s1 / s2;
        if (n0 > 1) {
            const double rel_var_of_mean = (n0 * s2 / (s1 * s1) - 1.0) / (n0 - 1);
            bias = rel_var_of_mean / (2.0 * m0);
            est.bias_estimate = -bias;  // log-of-mean reads low by about this much
        }
    } else {
        est.ess = static_cast<double>(n0);
    }
    est.stderr_ = boot_sd + bias;
    if (est.ess < 0.05 * n0) est.status = EstimateStatus::high_variance;
    return est;
}

// Full functional: recursion head plus the exact step integral of ||pi||^2,
// minus the endpoint terms in (rho, lambda).
inline Estimate functional_value(const Eigen::MatrixXd& rho, const DiscretePiPath& path,
                                 const Eigen::MatrixXd& multiplier, double beta,
                                 const SpinLaw& law, const std::vector<int>& budget,
                                 std::uint64_t seed) {
    if (rho.rows() != path.d || rho.cols() != path.d)
        throw ValidationError("rho has wrong dimensions");
    if ((rho - path.endpoint()).cwiseAbs().maxCoeff() > 1e-10)
        throw ValidationError("pi path endpoint does not match rho");
    Estimate est = parisi_phi(path, multiplier, beta, law, budget, seed);
    est.value += 0.5 * beta * beta * (pi_hs_integral(path) - rho.squaredNorm()) -
                 (multiplier * rho).trace();
    return est;
}

namespace detail {

struct CascadeChild {
    double log_weight;
    Eigen::VectorXd field_sum;
};

// Truncated Poisson-Dirichlet weights for one parent: the largest branch_cap
// atoms Gamma_k^{-1/m}, renormalized in log domain. Returns the estimated
// discarded mass as a fraction of the kept mass (0 for the degenerate limits).
inline double sample_pd_log_weights(double m, int cap, Rng& rng, std::vector<double>& logw) {
    logw.resize(static_cast<std::size_t>(cap));
    if (m >= 0.999) {
        // the small-atom limit: mass spreads uniformly over many atoms
        for (auto& w : logw) w = -std::log(static_cast<double>(cap));
        return 0.0;
    }
    if (m <= k_flat_weight_cutoff) {
        logw.assign(1, 0.0);
        return 0.0;
    }
    double gamma = 0.0;
    for (int k = 0; k < cap; ++k) {
        gamma += rng.exponential();
        logw[static_cast<std::size_t>(k)] = -std::log(gamma) / m;
    }
    const double log_total = log_sum_exp(logw);
    const double log_discarded =
        std::log(m / (1.0 - m)) + (m - 1.0) / m * std::log(gamma);
    for (auto& w : logw) w -= log_total;
    return std::exp(log_discarded - log_total);
}

}  // namespace detail

// Hierarchical-weights representation of the recursion head: log of the
// cascade-weighted terminal integrals, averaged over independent cascade
// draws. Agreement with parisi_phi is the cross-check both engines rest on.
inline Estimate rpc_phi_oracle(const DiscretePiPath& path, const Eigen::MatrixXd& multiplier,
                               double beta, const SpinLaw& law, int branch_cap, int n_outer,
                               std::uint64_t seed) {
    validate_pi_path(path);
    validate_multiplier(multiplier, path.d);
    if (law.d() != path.d) throw ValidationError("spin law dimension does not match path");
    const int r = path.r();
    if (r > 3) throw ValidationError("cascade oracle supports at most three levels");
    if (branch_cap < 1 || branch_cap > 64)
        throw ValidationError("branch cap must lie in [1, 64]");
    if (n_outer < 10) throw ValidationError("need at least 10 cascade draws");

    const auto factors = detail::increment_factors(path);
    const auto ev = law.evaluator(beta, multiplier);

    std::vector<double> draws(static_cast<std::size_t>(n_outer));
    double discarded_sum = 0.0;
    long pd_draws = 0;
    for (int t = 0; t < n_outer; ++t) {
        Rng rng(derive_seed(seed, stream::cascade, static_cast<std::uint64_t>(t)));
        std::vector<double> leaf_scores;
        // Depth-first walk; each parent draws its own weight list and each
        // node its own field increment.
        const std::function<void(int, double, const Eigen::VectorXd&)> walk =
            [&](int level, double log_nu, const Eigen::VectorXd& field_sum) {
                if (level == r) {
                    leaf_scores.push_back(log_nu + ev.log_integral(field_sum));
                    return;
                }
                std::vector<double> child_logw;
                discarded_sum += detail::sample_pd_log_weights(
                    path.weights[static_cast<std::size_t>(level)], branch_cap, rng, child_logw);
                ++pd_draws;
                const auto& factor = factors[static_cast<std::size_t>(level)];
                Eigen::VectorXd xi(factor.cols());
                for (std::size_t c = 0; c < child_logw.size(); ++c) {
                    for (Eigen::Index i = 0; i < xi.size(); ++i) xi[i] = rng.normal();
                    walk(level + 1, log_nu + child_logw[c], field_sum + factor * xi);
                }
            };
        walk(0, 0.0, Eigen::VectorXd::Zero(path.d));
        draws[static_cast<std::size_t>(t)] = log_sum_exp(leaf_scores);
    }

    Estimate est;
    est.value = mean(draws);
    est.stderr_ = sample_stderr(draws);
    est.n_samples = n_outer;
    est.ess = static_cast<double>(n_outer);
    if (pd_draws > 0 && discarded_sum / static_cast<double>(pd_draws) > 0.01)
        est.status = EstimateStatus::truncation_warning;
    return est;
}

struct PathPerturbationPair {
    DiscretePiPath path_a;
    DiscretePiPath path_b;
    Eigen::MatrixXd lambda_a;
    Eigen::MatrixXd lambda_b;
};

struct LipschitzReport {
    double phi_gap = 0.0;      // |Phi_a - Phi_b|
    double metric = 0.0;       // operator, trace, and step-integral distances
    double bound = 0.0;        // constant * metric
    double allowance = 0.0;    // statistical slack added to the bound
    double margin = 0.0;       // bound + allowance - phi_gap
    bool pass = false;
};

// Verifies the joint continuity bound |Phi_a - Phi_b| <= C * metric with
// C = 1 + beta^2/2, up to four combined standard errors of the estimates.
inline std::vector<LipschitzReport> lipschitz_check(const std::vector<PathPerturbationPair>& pairs,
                                                    double beta, const SpinLaw& law,
                                                    const std::vector<int>& budget,
                                                    std::uint64_t seed) {
    std::vector<LipschitzReport> out;
    out.reserve(pairs.size());
    const double constant = 1.0 + 0.5 * beta * beta;
    for (const auto& pair : pairs) {
        if (pair.path_a.weights != pair.path_b.weights)
            throw ValidationError("perturbation pairs must share their weight sequence");
        const auto ea = parisi_phi(pair.path_a, pair.lambda_a, beta, law, budget, seed);
        const auto eb = parisi_phi(pair.path_b, pair.lambda_b, beta, law, budget, seed);
        LipschitzReport rep;
        rep.phi_gap = std::abs(ea.value - eb.value);
        rep.metric = op_norm_sym(pair.lambda_a - pair.lambda_b) +
                     trace_norm_sym(pair.path_a.endpoint() - pair.path_b.endpoint()) +
                     pi_trace_distance(pair.path_a, pair.path_b);
        rep.bound = constant * rep.metric;
        rep.allowance =
            4.0 * std::sqrt(ea.stderr_ * ea.stderr_ + eb.stderr_ * eb.stderr_);
        rep.margin = rep.bound + rep.allowance - rep.phi_gap;
        rep.pass = rep.margin >= 0.0;
        out.push_back(rep);
    }
    return out;
}

// Discretizes a monotone matrix path into r steps at equal quantiles of its
// trace. The handle must be right-continuous with handle(0) = 0; sampling at
// the quantile times reproduces step inputs whose trace increments are equal.
inline DiscretePiPath discretize_path(const std::function<Eigen::MatrixXd(double)>& handle,
                                      int r) {
    if (r < 1) throw ValidationError("discretization needs at least one step");
    const Eigen::MatrixXd start = handle(0.0);
    const Eigen::MatrixXd end = handle(1.0);
    const int d = static_cast<int>(end.rows());
    if (start.cwiseAbs().maxCoeff() > 1e-10)
        throw ValidationError("path handle must start at zero");
    const double total = end.trace();
    if (!(total >= 0.0)) throw ValidationError("path handle endpoint must have trace >= 0");

    DiscretePiPath out;
    out.d = d;
    out.levels.push_back(Eigen::MatrixXd::Zero(d, d));
    std::vector<double> t_points{0.0};
    for (int j = 1; j <= r; ++j) {
        // earliest time at which the trace reaches the j-th quantile
        const double target = total * j / r - 1e-12;
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (lo + hi);
            (handle(mid).trace() >= target ? hi : lo) = mid;
        }
        t_points.push_back(hi);
        out.levels.push_back(j == r ? end : handle(hi));
    }
    for (int j = 0; j < r; ++j)
        out.weights.push_back(std::max(t_points[static_cast<std::size_t>(j + 1)], 1e-9));
    out.weights.push_back(1.0);
    for (std::size_t j = 1; j < out.weights.size(); ++j)
        out.weights[j] = std::max(out.weights[j], out.weights[j - 1]);
    validate_pi_path(out, 1e-8);
    return out;
}

}  // namespace qsk
