#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "qsk/errors.hpp"
#include "qsk/matrix_util.hpp"
#include "qsk/optimize.hpp"
#include "qsk/parallel.hpp"
#include "qsk/parisi_functional.hpp"
#include "qsk/rng.hpp"

namespace qsk {

struct SolverConfig {
    int r_levels = 1;          // free intermediate levels of the step path
    double lambda_box = 10.0;  // operator-norm bound on the multiplier search
    int max_iters = 400;       // objective evaluations per simplex stage
    double tolerance = 1e-4;
    long mc_budget = 2000;     // nested sampling budget during the search
    long final_budget = 20000; // fresh-seed budget for the reported value
    int dictionary_size = 32;
    int outer_candidates = 6;
    int m_rounds = 2;          // weight-grid sweeps interleaved with refinement
    std::uint64_t seed = 1;
    int threads = 0;
};

inline void validate_solver_config(const SolverConfig& c) {
    if (c.r_levels < 0) throw ValidationError("r_levels must be nonnegative");
    if (!(c.lambda_box > 0.0)) throw ValidationError("lambda_box must be positive");
    if (c.max_iters < 10) throw ValidationError("max_iters must be at least 10");
    if (!(c.tolerance > 0.0)) throw ValidationError("tolerance must be positive");
    if (c.mc_budget < 10 || c.final_budget < 10)
        throw ValidationError("sampling budgets must be at least 10");
    if (c.dictionary_size < 2) throw ValidationError("dictionary needs at least two atoms");
    if (c.outer_candidates < 1) throw ValidationError("need at least one outer candidate");
    if (c.m_rounds < 0) throw ValidationError("m_rounds must be nonnegative");
    if (c.threads < 0) throw ValidationError("threads must be nonnegative");
}

struct InnerResult {
    DiscretePiPath path;
    Eigen::MatrixXd multiplier;
    double value = 0.0;
    double stderr_ = 0.0;
    bool converged = false;
    bool feasible = true;            // final increment PSD at the optimum
    bool lambda_on_boundary = false; // multiplier pressed against the box
    double penalty = 0.0;            // residual infeasibility at the optimum
    long n_evals = 0;
};

namespace detail {

inline Eigen::VectorXd vech(const Eigen::MatrixXd& a) {
    const int d = static_cast<int>(a.rows());
    Eigen::VectorXd v(d * (d + 1) / 2);
    int k = 0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j <= i; ++j) v[k++] = a(i, j);
    return v;
}

inline Eigen::MatrixXd unvech(const Eigen::VectorXd& v, int d) {
    Eigen::MatrixXd a(d, d);
    int k = 0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j <= i; ++j) {
            a(i, j) = v[k];
            a(j, i) = v[k];
            ++k;
        }
    return a;
}

// Per-level sampling widths for the nested recursion estimator, root first.
// Deep levels use a fixed modest width so the root keeps most of the budget.
inline std::vector<int> level_budgets(int levels, long total) {
    std::vector<int> b(static_cast<std::size_t>(levels), 16);
    long deep = 1;
    for (int j = 1; j < levels; ++j) deep *= 16;
    if (levels == 2) {
        b[1] = 32;
        deep = 32;
    }
    b[0] = static_cast<int>(std::min<long>(std::max<long>(10, total / deep), 1L << 30));
    return b;
}

inline std::vector<double> weight_grid() {
    std::vector<double> g;
    for (int i = 1; i <= 19; ++i) g.push_back(0.05 * i);
    g.push_back(1.0);
    return g;
}

constexpr double k_penalty = 1e6;

struct InnerProblem {
    const Eigen::MatrixXd* rho;
    double beta;
    const SpinLaw* law;
    SolverConfig config;
    std::vector<int> budget;
    std::uint64_t crn_seed;
    int d;
    int q;  // free entries of one symmetric matrix

    // x stacks vech(S_1..S_r) then vech(lambda); increments are S_j^2 with
    // the last one pinned to rho - gamma_r. Infeasible points return a graded
    // penalty without touching the sampler.
    DiscretePiPath build_path(const Eigen::VectorXd& x, const std::vector<double>& m,
                              double* min_eig_out) const {
        const int r = config.r_levels;
        DiscretePiPath p;
        p.d = d;
        p.levels.resize(static_cast<std::size_t>(r) + 2);
        p.levels[0] = Eigen::MatrixXd::Zero(d, d);
        Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(d, d);
        for (int j = 0; j < r; ++j) {
            const Eigen::MatrixXd s = unvech(x.segment(j * q, q), d);
            gamma += s * s;
            p.levels[static_cast<std::size_t>(j) + 1] = gamma;
        }
        if (min_eig_out) *min_eig_out = min_eigenvalue(*rho - gamma);
        p.levels.back() = *rho;
        p.weights.assign(m.begin(), m.end());
        p.weights.push_back(1.0);
        return p;
    }

    // multipliers outside the box are clamped onto it; the leftover norm is
    // charged so optima sit on or inside the boundary
    Eigen::MatrixXd lambda_of(const Eigen::VectorXd& x, double* excess = nullptr) const {
        Eigen::MatrixXd lam = unvech(x.tail(q), d);
        const double lam_op = op_norm_sym(lam);
        if (excess) *excess = 0.0;
        if (lam_op > config.lambda_box) {
            lam *= config.lambda_box / lam_op;
            if (excess) *excess = lam_op - config.lambda_box;
        }
        return lam;
    }

    double objective(const Eigen::VectorXd& x, const std::vector<double>& m) const {
        double excess = 0.0;
        const Eigen::MatrixXd lam = lambda_of(x, &excess);
        double min_eig = 0.0;
        const DiscretePiPath p = build_path(x, m, &min_eig);
        if (min_eig < -1e-10) return k_penalty * (1.0 - min_eig);
        return functional_value(*rho, p, lam, beta, *law, budget, crn_seed).value + excess;
    }
};

}  // namespace detail

// Derivative-free minimization of the functional over the step path and the
// multiplier at fixed endpoint rho: simplex search on the increment factors
// and lambda, interleaved with sweeps of the level weights over a sorted
// grid, all under common random numbers. The reported value comes from a
// fresh-seed evaluation at the incumbent so the search minimum is not quoted.
inline InnerResult inner_infimum_with_law(const Eigen::MatrixXd& rho, double beta,
                                          const SpinLaw& law, const SolverConfig& config,
                                          std::uint64_t candidate_tag) {
    validate_solver_config(config);
    if (rho.rows() != rho.cols() || rho.rows() != law.d())
        throw ValidationError("endpoint dimension does not match the law");
    if (!is_symmetric(rho)) throw ValidationError("endpoint must be symmetric");
    if (min_eigenvalue(rho) < -1e-10) throw ValidationError("endpoint must be PSD");
    if (rho.trace() > 1.0 + 1e-10) throw ValidationError("endpoint trace exceeds one");
    if (!(beta >= 0.0) || !std::isfinite(beta))
        throw ValidationError("beta must be finite and nonnegative");

    const int d = static_cast<int>(rho.rows());
    const int r = config.r_levels;
    detail::InnerProblem prob;
    prob.rho = &rho;
    prob.beta = beta;
    prob.law = &law;
    prob.config = config;
    prob.budget = detail::level_budgets(r + 1, config.mc_budget);
    prob.crn_seed = derive_seed(config.seed, stream::optimizer, candidate_tag);
    prob.d = d;
    prob.q = d * (d + 1) / 2;

    // start from equal increments and a zero multiplier
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero((r + 1) * prob.q);
    if (r > 0) {
        // S with S^2 = rho/(r+1): equal increments along the path
        const Eigen::VectorXd vs = detail::vech(
            psd_factor(rho / static_cast<double>(r + 1), 1e-10, "endpoint split"));
        for (int j = 0; j < r; ++j) x0.segment(j * prob.q, prob.q) = vs;
    }
    std::vector<double> m(static_cast<std::size_t>(r) + 1, 1.0);

    Eigen::VectorXd best_x = x0;
    std::vector<double> best_m = m;
    double best_f = detail::k_penalty * 2.0;
    long evals = 0;
    const auto tracked = [&](const Eigen::VectorXd& x, const std::vector<double>& mm) {
        const double f = prob.objective(x, mm);
        ++evals;
        if (f < best_f) {
            best_f = f;
            best_x = x;
            best_m = mm;
        }
        return f;
    };

    bool converged = false;
    const auto run_stage = [&](int max_evals, double step) {
        const auto res = nelder_mead_restarts(
            [&](const Eigen::VectorXd& x) { return tracked(x, best_m); }, best_x, step,
            max_evals, config.tolerance);
        converged = res.converged;
    };

    if (r > 0) {
        // settle the multiplier against the pinned equal-increment start
        // first; with unit weights the levels collapse, so this subproblem
        // matches the level-free one and hands the joint stage a sane dual
        // point instead of dragging it through r extra dimensions
        nelder_mead_restarts(
            [&](const Eigen::VectorXd& y) {
                Eigen::VectorXd x = best_x;
                x.tail(prob.q) = y;
                return tracked(x, best_m);
            },
            best_x.tail(prob.q), 0.15, config.max_iters, config.tolerance);
    }
    run_stage(config.max_iters, 0.15);
    if (r > 0) {
        const auto grid = detail::weight_grid();
        for (int round = 0; round < config.m_rounds; ++round) {
            for (int j = 0; j <= r; ++j) {
                const double lo = j > 0 ? best_m[static_cast<std::size_t>(j) - 1] : 0.0;
                const double hi =
                    j < r ? best_m[static_cast<std::size_t>(j) + 1] : 1.0;
                for (double g : grid) {
                    if (g < lo || g > hi ||
                        g == best_m[static_cast<std::size_t>(j)])
                        continue;
                    auto cand = best_m;
                    cand[static_cast<std::size_t>(j)] = g;
                    tracked(best_x, cand);
                }
            }
            run_stage(config.max_iters / 2, 0.05);
        }
    }

    InnerResult out;
    out.n_evals = evals;
    out.converged = converged;
    double min_eig = 0.0;
    out.path = prob.build_path(best_x, best_m, &min_eig);
    out.multiplier = prob.lambda_of(best_x);
    out.feasible = min_eig >= -1e-10 && best_f < detail::k_penalty;
    out.penalty = out.feasible ? 0.0 : best_f;
    out.lambda_on_boundary = op_norm_sym(out.multiplier) >= 0.98 * config.lambda_box;
    if (!out.feasible) {
        out.value = best_f;
        out.stderr_ = 0.0;
        return out;
    }
    const auto fin = functional_value(rho, out.path, out.multiplier, beta, law,
                                      detail::level_budgets(r + 1, config.final_budget),
                                      derive_seed(config.seed, stream::final_eval,
                                                  candidate_tag));
    out.value = fin.value;
    out.stderr_ = fin.stderr_;
    return out;
}

// Support of the spin-projection law used by the solver: exact two-point law
// for classical one-dimensional spins, a cached histogram when a transverse
// field is present, and a sampled atom set in higher dimension. The sampled
// set doubles as the dictionary of the outer search.
inline SpinLaw solver_law(int d, double field_h, const SolverConfig& config) {
    if (d == 1 && field_h == 0.0) return SpinLaw::two_point();
    if (d == 1) return SpinLaw::projection_histogram(field_h);
    return SpinLaw::sample_set(d, field_h, config.dictionary_size,
                               derive_seed(config.seed, stream::dictionary));
}

inline InnerResult inner_infimum(const Eigen::MatrixXd& rho, double beta, double field_h,
                                 int d, const SolverConfig& config) {
    if (d < 1 || rho.rows() != d) throw ValidationError("dimension mismatch");
    if (field_h < 0.0) throw ValidationError("field must be nonnegative");
    return inner_infimum_with_law(rho, beta, solver_law(d, field_h, config), config, 0);
}

struct VariationalResult {
    double value = 0.0;
    double stderr_ = 0.0;
    Eigen::MatrixXd rho_star;
    DiscretePiPath path_star;
    Eigen::MatrixXd lambda_star;
    Eigen::VectorXd weights;     // simplex weights over the dictionary atoms
    Eigen::MatrixXd dictionary;  // d x K atom matrix the hull is built from
    bool inner_converged = false;
    bool outer_converged = false;
    bool lambda_on_boundary = false;
};

namespace detail {

inline Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
    const double mx = logits.maxCoeff();
    Eigen::VectorXd w = (logits.array() - mx).exp();
    return w / w.sum();
}

inline Eigen::MatrixXd hull_point(const Eigen::MatrixXd& atoms, const Eigen::VectorXd& w) {
    const int d = static_cast<int>(atoms.rows());
    Eigen::MatrixXd rho = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index k = 0; k < atoms.cols(); ++k)
        rho += w[k] * atoms.col(k) * atoms.col(k).transpose();
    return rho;
}

}  // namespace detail

// Outer maximization over endpoints in the convex hull of dictionary atoms:
// seeded simplex candidates are scored in parallel by the inner minimizer,
// the best one is refined by simplex search on softmax logits, and the
// winner is re-solved at full budget.
inline VariationalResult outer_supremum(double beta, double field_h, int d,
                                        const SolverConfig& config) {
    validate_solver_config(config);
    if (d < 1) throw ValidationError("dimension must be at least one");
    if (field_h < 0.0) throw ValidationError("field must be nonnegative");
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw ValidationError("beta must be finite and nonnegative");

    const SpinLaw law = solver_law(d, field_h, config);
    VariationalResult out;

    if (d == 1) {
        // scalar endpoint: the hull of squared atoms is an interval, searched
        // by golden section under a shared common-random-number tag
        double q_lo = 1.0, q_hi = 0.0;
        for (Eigen::Index k = 0; k < law.points().cols(); ++k) {
            const double s = law.points()(0, k) * law.points()(0, k);
            q_lo = std::min(q_lo, s);
            q_hi = std::max(q_hi, s);
        }
        const auto value_at = [&](double qv) {
            return inner_infimum_with_law(Eigen::MatrixXd::Constant(1, 1, qv), beta, law,
                                          config, 0xBEEF)
                .value;
        };
        double a = q_lo, b = q_hi;
        if (b - a > 1e-12) {
            const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
            double c1 = b - invphi * (b - a), c2 = a + invphi * (b - a);
            double f1 = value_at(c1), f2 = value_at(c2);
            for (int it = 0; it < 48 && b - a > 1e-10; ++it) {
                if (f1 > f2) {  // keep the larger side: this is a maximization
                    b = c2;
                    c2 = c1;
                    f2 = f1;
                    c1 = b - invphi * (b - a);
                    f1 = value_at(c1);
                } else {
                    a = c1;
                    c1 = c2;
                    f1 = f2;
                    c2 = a + invphi * (b - a);
                    f2 = value_at(c2);
                }
            }
        }
        double q_star = 0.5 * (a + b);
        // the law's own second moment is the matched endpoint; like the
        // uniform candidate of the d >= 2 branch it is always tried, which
        // keeps the maximum exact when the section lands on a flat top
        double q_matched = 0.0;
        for (Eigen::Index k = 0; k < law.points().cols(); ++k)
            q_matched += std::exp(law.log_weights()[k]) * law.points()(0, k) * law.points()(0, k);
        if (std::abs(q_matched - q_star) > 1e-12 &&
            value_at(q_matched) > value_at(q_star))
            q_star = q_matched;
        out.dictionary = law.points();
        out.weights = law.log_weights().array().exp();
        out.rho_star = Eigen::MatrixXd::Constant(1, 1, q_star);
        const auto inner = inner_infimum_with_law(out.rho_star, beta, law, config, 0);
        out.value = inner.value;
        out.stderr_ = inner.stderr_;
        out.path_star = inner.path;
        out.lambda_star = inner.multiplier;
        out.inner_converged = inner.converged;
        out.outer_converged = true;
        out.lambda_on_boundary = inner.lambda_on_boundary;
        return out;
    }

    const Eigen::MatrixXd atoms = law.points();
    const int K = static_cast<int>(atoms.cols());

    std::vector<Eigen::VectorXd> logits(static_cast<std::size_t>(config.outer_candidates));
    logits[0] = Eigen::VectorXd::Zero(K);
    for (int c = 1; c < config.outer_candidates; ++c) {
        Rng rng(derive_seed(config.seed, stream::optimizer, 0xCA0D,
                            static_cast<std::uint64_t>(c)));
        Eigen::VectorXd l(K);
        for (int k = 0; k < K; ++k) l[k] = std::log(rng.exponential());
        logits[static_cast<std::size_t>(c)] = l;
    }

    std::vector<double> cand_value(logits.size());
    parallel_for(logits.size(), config.threads, [&](std::size_t c) {
        const auto rho = detail::hull_point(atoms, detail::softmax(logits[c]));
        cand_value[c] = inner_infimum_with_law(rho, beta, law, config,
                                               static_cast<std::uint64_t>(c) + 1)
                            .value;
    });
    std::size_t best_c = 0;
    for (std::size_t c = 1; c < cand_value.size(); ++c)
        if (cand_value[c] > cand_value[best_c]) best_c = c;

    // refine the winning weights; shared inner tag keeps the surface smooth
    SolverConfig light = config;
    light.max_iters = std::max(10, config.max_iters / 4);
    light.final_budget = light.mc_budget;
    light.m_rounds = std::min(light.m_rounds, 1);
    const auto outer_obj = [&](const Eigen::VectorXd& l) {
        const auto rho = detail::hull_point(atoms, detail::softmax(l));
        return -inner_infimum_with_law(rho, beta, law, light, 0xBEEF).value;
    };
    const auto refined = nelder_mead(outer_obj, logits[best_c], 0.4,
                                     std::max(10, config.max_iters / 2), config.tolerance);
    Eigen::VectorXd final_logits = logits[best_c];
    if (-refined.value > cand_value[best_c]) final_logits = refined.x;

    out.dictionary = atoms;
    out.weights = detail::softmax(final_logits);
    out.rho_star = detail::hull_point(atoms, out.weights);
    const auto inner = inner_infimum_with_law(out.rho_star, beta, law, config, 0);
    out.value = inner.value;
    out.stderr_ = inner.stderr_;
    out.path_star = inner.path;
    out.lambda_star = inner.multiplier;
    out.inner_converged = inner.converged;
    out.outer_converged = refined.converged;
    out.lambda_on_boundary = inner.lambda_on_boundary;
    return out;
}

struct TrendPoint {
    int d = 0;
    bool ok = false;
    std::string error;
    VariationalResult result;
};

// Runs the outer problem across increasing dimensions; failures are captured
// per point so one bad cell does not abort the sweep.
inline std::vector<TrendPoint> d_trend(double beta, double field_h,
                                       const std::vector<int>& d_list,
                                       const SolverConfig& config) {
    if (d_list.empty()) throw ValidationError("dimension list is empty");
    for (std::size_t i = 1; i < d_list.size(); ++i)
        if (d_list[i] <= d_list[i - 1])
            throw ValidationError("dimension list must be strictly increasing");
    std::vector<TrendPoint> out;
    out.reserve(d_list.size());
    for (int d : d_list) {
        TrendPoint p;
        p.d = d;
        try {
            p.result = outer_supremum(beta, field_h, d, config);
            p.ok = true;
        } catch (const std::exception& e) {
            p.error = e.what();
        }
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace qsk
