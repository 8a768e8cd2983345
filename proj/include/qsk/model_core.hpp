#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "qsk/errors.hpp"
#include "qsk/numeric.hpp"
#include "qsk/parallel.hpp"
#include "qsk/rng.hpp"

namespace qsk {

// Hard ceiling on the spin count for anything that touches the 2^n state space.
inline constexpr int k_default_site_cap = 14;

struct ModelParams {
    int n = 1;          // number of spins
    double beta = 0.0;  // coupling strength in front of the disorder term
    double h = 0.0;     // transverse field strength
};

inline void validate(const ModelParams& p, int site_cap = k_default_site_cap) {
    if (p.n < 1) throw ValidationError("site count must be >= 1");
    if (p.n > site_cap)
        throw CapacityError("site count " + std::to_string(p.n) + " exceeds cap " +
                            std::to_string(site_cap));
    if (!std::isfinite(p.beta) || p.beta < 0.0)
        throw ValidationError("beta must be finite and >= 0");
    if (!std::isfinite(p.h) || p.h < 0.0)
        throw ValidationError("transverse field must be finite and >= 0");
}

// Gaussian couplings g_ij, all n^2 ordered pairs kept (including i == j).
class DisorderMatrix {
public:
    DisorderMatrix() = default;

    static DisorderMatrix sample(int n, std::uint64_t seed) {
        if (n < 1) throw ValidationError("disorder size must be >= 1");
        DisorderMatrix g;
        g.n_ = n;
        g.seed_ = seed;
        g.values_.resize(static_cast<std::size_t>(n) * n);
        Rng rng(seed);
        for (auto& v : g.values_) v = rng.normal();
        return g;
    }

    static DisorderMatrix from_values(int n, std::vector<double> row_major) {
        if (n < 1) throw ValidationError("disorder size must be >= 1");
        if (row_major.size() != static_cast<std::size_t>(n) * n)
            throw ValidationError("disorder payload has wrong size");
        for (double v : row_major)
            if (!std::isfinite(v)) throw ValidationError("disorder entries must be finite");
        DisorderMatrix g;
        g.n_ = n;
        g.seed_ = 0;
        g.values_ = std::move(row_major);
        return g;
    }

    int n() const { return n_; }
    std::uint64_t seed() const { return seed_; }
    double operator()(int i, int j) const { return values_[static_cast<std::size_t>(i) * n_ + j]; }
    const std::vector<double>& values() const { return values_; }

private:
    int n_ = 0;
    std::uint64_t seed_ = 0;
    std::vector<double> values_;
};

// z-basis diagonal of the coupling term: entry s is (beta/sqrt(n)) sum_ij g_ij tau_i tau_j
// where tau_i = +1 when bit i of s is clear. Kept as a plain vector; the full
// 2^n x 2^n matrix is only materialized when an eigensolve needs it.
inline std::vector<double> interaction_diagonal(const ModelParams& p, const DisorderMatrix& g,
                                                int site_cap = k_default_site_cap) {
    validate(p, site_cap);
    if (g.n() != p.n) throw ValidationError("disorder size does not match site count");
    const int n = p.n;
    const std::size_t dim = std::size_t{1} << n;
    const double scale = p.beta / std::sqrt(static_cast<double>(n));
    std::vector<double> diag(dim);
    std::vector<double> tau(static_cast<std::size_t>(n));
    for (std::size_t s = 0; s < dim; ++s) {
        for (int i = 0; i < n; ++i) tau[static_cast<std::size_t>(i)] = ((s >> i) & 1u) ? -1.0 : 1.0;
        double e = 0.0;
        for (int i = 0; i < n; ++i) {
            double row = 0.0;
            for (int j = 0; j < n; ++j) row += g(i, j) * tau[static_cast<std::size_t>(j)];
            e += tau[static_cast<std::size_t>(i)] * row;
        }
        diag[s] = scale * e;
    }
    return diag;
}

// Dense Hamiltonian: interaction diagonal plus transverse-field entries h on
// every pair of states that differ in exactly one bit.
inline Eigen::MatrixXd build_hamiltonian(const ModelParams& p, const DisorderMatrix& g,
                                         int site_cap = k_default_site_cap) {
    const std::vector<double> diag = interaction_diagonal(p, g, site_cap);
    const std::size_t dim = diag.size();
    Eigen::MatrixXd ham = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim),
                                                static_cast<Eigen::Index>(dim));
    for (std::size_t s = 0; s < dim; ++s) ham(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s)) = diag[s];
    if (p.h != 0.0) {
        for (std::size_t s = 0; s < dim; ++s)
            for (int i = 0; i < p.n; ++i)
                ham(static_cast<Eigen::Index>(s ^ (std::size_t{1} << i)), static_cast<Eigen::Index>(s)) += p.h;
    }
    return ham;
}

struct SpectralResult {
    int n = 0;
    double beta = 0.0;
    double h = 0.0;
    std::uint64_t seed = 0;
    double log_partition = 0.0;
    double ground_energy = 0.0;  // top eigenvalue; tr e^H is anchored there
    double normalized_free_energy = 0.0;
};

// log(2 cosh h) without overflow for large h.
inline double log_two_cosh(double h) { return h + std::log1p(std::exp(-2.0 * h)); }

inline double normalized_free_energy(double log_partition, const ModelParams& p) {
    return log_partition / static_cast<double>(p.n) - log_two_cosh(p.h);
}

// Exact log partition function by full diagonalization. With h == 0 the
// Hamiltonian is already diagonal, so no matrix is built.
inline SpectralResult log_partition_ed(const ModelParams& p, const DisorderMatrix& g,
                                       int site_cap = k_default_site_cap) {
    double lp;
    double ground;
    if (p.h == 0.0) {
        const std::vector<double> diag = interaction_diagonal(p, g, site_cap);
        lp = log_sum_exp(diag);
        ground = *std::max_element(diag.begin(), diag.end());
    } else {
        const Eigen::MatrixXd ham = build_hamiltonian(p, g, site_cap);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ham, Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success) throw NumericalError("eigensolver did not converge");
        const Eigen::VectorXd& ev = es.eigenvalues();
        std::vector<double> evs(ev.data(), ev.data() + ev.size());
        lp = log_sum_exp(evs);
        ground = ev.maxCoeff();
    }
    if (!std::isfinite(lp)) throw NumericalError("log partition is not finite");
    SpectralResult r;
    r.n = p.n;
    r.beta = p.beta;
    r.h = p.h;
    r.seed = g.seed();
    r.log_partition = lp;
    r.ground_energy = ground;
    r.normalized_free_energy = normalized_free_energy(lp, p);
    return r;
}

struct QuenchedResult {
    double mean_value = 0.0;
    double stderr_ = 0.0;
    int n_requested = 0;
    int n_succeeded = 0;
    std::vector<double> values;  // per draw index; NaN marks a failed draw
    std::vector<int> failed_draws;
    std::vector<std::string> failure_messages;
};

// Disorder average of the normalized free energy. Draw i uses the stream
// derived from (seed, disorder, i); draws run in parallel and are reduced in
// index order so the result does not depend on scheduling.
inline QuenchedResult quenched_free_energy(const ModelParams& p, int n_disorder,
                                           std::uint64_t seed, int threads = 0,
                                           int site_cap = k_default_site_cap) {
    validate(p, site_cap);
    if (n_disorder < 1) throw ValidationError("need at least one disorder draw");
    QuenchedResult out;
    out.n_requested = n_disorder;
    out.values.assign(static_cast<std::size_t>(n_disorder),
                      std::numeric_limits<double>::quiet_NaN());
    std::vector<std::string> errors(static_cast<std::size_t>(n_disorder));
    parallel_for(static_cast<std::size_t>(n_disorder), threads, [&](std::size_t i) {
        try {
            const auto g = DisorderMatrix::sample(p.n, derive_seed(seed, stream::disorder, i));
            out.values[i] = log_partition_ed(p, g, site_cap).normalized_free_energy;
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    std::vector<double> good;
    good.reserve(static_cast<std::size_t>(n_disorder));
    for (int i = 0; i < n_disorder; ++i) {
        if (std::isnan(out.values[static_cast<std::size_t>(i)])) {
            out.failed_draws.push_back(i);
            out.failure_messages.push_back(errors[static_cast<std::size_t>(i)]);
        } else {
            good.push_back(out.values[static_cast<std::size_t>(i)]);
        }
    }
    if (good.empty()) throw NumericalError("every disorder draw failed");
    out.n_succeeded = static_cast<int>(good.size());
    out.mean_value = mean(good);
    out.stderr_ = sample_stderr(good);
    return out;
}

namespace detail {

// Entries scale out into logc so repeated products of the all-positive
// transfer matrix never overflow.
struct ScaledMatrix {
    Eigen::MatrixXd m;
    double logc = 0.0;
    void normalize() {
        const double c = m.maxCoeff();
        if (!(c > 0.0) || !std::isfinite(c))
            throw NumericalError("transfer matrix degenerated during powering");
        m /= c;
        logc += std::log(c);
    }
};

}  // namespace detail

// First-order split-product approximation of the log partition function:
// the coupling factor is diagonal and the field factor has the closed form
// cosh^(n-k) sinh^k over bit distance k, so one step is assembled exactly and
// then raised to the step count by square-and-multiply.
inline double trotter_log_partition(const ModelParams& p, const DisorderMatrix& g,
                                    long n_steps, int site_cap = k_default_site_cap) {
    if (n_steps < 1) throw ValidationError("step count must be >= 1");
    const std::vector<double> diag = interaction_diagonal(p, g, site_cap);
    if (p.h == 0.0) return log_sum_exp(diag);  // split is exact, all factors diagonal

    const int n = p.n;
    const std::size_t dim = diag.size();
    const double ch = std::cosh(p.h / static_cast<double>(n_steps));
    const double sh = std::sinh(p.h / static_cast<double>(n_steps));
    std::vector<double> chp(static_cast<std::size_t>(n) + 1, 1.0);
    std::vector<double> shp(static_cast<std::size_t>(n) + 1, 1.0);
    for (int k = 1; k <= n; ++k) {
        chp[static_cast<std::size_t>(k)] = chp[static_cast<std::size_t>(k - 1)] * ch;
        shp[static_cast<std::size_t>(k)] = shp[static_cast<std::size_t>(k - 1)] * sh;
    }
    detail::ScaledMatrix base;
    base.m.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t s = 0; s < dim; ++s) {
        const double row_scale = std::exp(diag[s] / static_cast<double>(n_steps));
        for (std::size_t t = 0; t < dim; ++t) {
            const int k = std::popcount(s ^ t);
            base.m(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)) =
                row_scale * chp[static_cast<std::size_t>(n - k)] * shp[static_cast<std::size_t>(k)];
        }
    }
    base.normalize();

    detail::ScaledMatrix acc;
    bool have_acc = false;
    long e = n_steps;
    while (e > 0) {
        if (e & 1) {
            if (!have_acc) {
                acc = base;
                have_acc = true;
            } else {
                acc.m = (acc.m * base.m).eval();
                acc.logc += base.logc;
                acc.normalize();
            }
        }
        e >>= 1;
        if (e > 0) {
            base.m = (base.m * base.m).eval();
            base.logc *= 2.0;
            base.normalize();
        }
    }
    const double tr = acc.m.trace();
    if (!(tr > 0.0) || !std::isfinite(tr))
        throw NumericalError("split-product trace is not positive");
    const double lp = std::log(tr) + acc.logc;
    if (!std::isfinite(lp)) throw NumericalError("split-product log partition is not finite");
    return lp;
}

}  // namespace qsk
