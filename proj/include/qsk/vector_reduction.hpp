#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "qsk/errors.hpp"
#include "qsk/estimate.hpp"
#include "qsk/matrix_util.hpp"
#include "qsk/model_core.hpp"
#include "qsk/numeric.hpp"
#include "qsk/path_measure.hpp"
#include "qsk/rng.hpp"

namespace qsk {

// N vectors in the unit ball of R^d, the image of spin paths under the first
// d basis coefficients.
struct VectorConfig {
    int d = 0;
    std::vector<Eigen::VectorXd> vectors;
    int size() const { return static_cast<int>(vectors.size()); }
};

inline void validate_vectors(const VectorConfig& c) {
    if (c.d < 1) throw ValidationError("vector dimension must be >= 1");
    if (c.vectors.empty()) throw ValidationError("vector configuration must be nonempty");
    for (const auto& v : c.vectors) {
        if (v.size() != c.d) throw ValidationError("vector length does not match dimension");
        if (!v.allFinite()) throw ValidationError("vector entries must be finite");
    }
}

inline Eigen::VectorXd to_eigen(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline VectorConfig project_config(const SpinConfig& config, int d) {
    VectorConfig out;
    out.d = d;
    out.vectors.reserve(config.paths.size());
    for (const auto& p : config.paths) out.vectors.push_back(to_eigen(project_d(p, d)));
    return out;
}

// (1/N) sum_i |a_i><b_i| as a d x d matrix.
inline Eigen::MatrixXd overlap(const VectorConfig& a, const VectorConfig& b) {
    validate_vectors(a);
    validate_vectors(b);
    if (a.d != b.d || a.size() != b.size())
        throw ValidationError("overlap requires matching N and d");
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(a.d, a.d);
    for (int i = 0; i < a.size(); ++i)
        q.noalias() += a.vectors[static_cast<std::size_t>(i)] *
                       b.vectors[static_cast<std::size_t>(i)].transpose();
    return q / a.size();
}

inline Eigen::MatrixXd self_overlap(const VectorConfig& a) { return overlap(a, a); }

inline Eigen::VectorXd sample_pd(double field_h, int d, Rng& rng) {
    return to_eigen(project_d(sample_path(field_h, rng), d));
}

// Explicit form of the Gaussian energy process on R^{dN}:
// (beta/sqrt(N)) sum_{i,j} g_ij <v_i, v_j>.
inline double gaussian_vector_energy(const VectorConfig& config, const DisorderMatrix& disorder,
                                     double beta) {
    validate_vectors(config);
    const int n = config.size();
    if (disorder.n() != n) throw ValidationError("configuration size does not match disorder");
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            acc += disorder(i, j) * config.vectors[static_cast<std::size_t>(i)].dot(
                                        config.vectors[static_cast<std::size_t>(j)]);
    return beta / std::sqrt(static_cast<double>(n)) * acc;
}

// Squared Hilbert-Schmidt norm of the full (untruncated) overlap operator of
// two path configurations, via the pairwise L2 inner products.
inline double path_overlap_hs_sq(const SpinConfig& a, const SpinConfig& b) {
    const int n = a.size();
    if (n < 1 || b.size() != n) throw ValidationError("configurations must share a size >= 1");
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k)
            acc += l2_inner(a.paths[static_cast<std::size_t>(i)],
                            a.paths[static_cast<std::size_t>(k)]) *
                   l2_inner(b.paths[static_cast<std::size_t>(i)],
                            b.paths[static_cast<std::size_t>(k)]);
    return acc / (static_cast<double>(n) * static_cast<double>(n));
}

struct PushforwardReport {
    Estimate via_paths;
    Estimate via_vectors;
    double z_score = 0.0;
    double combined_stderr = 0.0;
};

// Estimates (1/N) log of the d-reduced partition function two ways: sampling
// paths and projecting, and sampling the projected law directly. The two
// draws see the same integrand law, so the gap is pure sampling noise.
inline PushforwardReport pushforward_identity_check(const ModelParams& params,
                                                    const DisorderMatrix& disorder, int d,
                                                    int n_samples, std::uint64_t seed,
                                                    int threads = 0) {
    validate(params);
    if (d < 1) throw ValidationError("reduction dimension must be >= 1");
    if (n_samples < 100) throw ValidationError("need at least 100 samples");
    if (disorder.n() != params.n) throw ValidationError("disorder size does not match n");

    std::vector<double> w_paths(static_cast<std::size_t>(n_samples));
    std::vector<double> w_vecs(static_cast<std::size_t>(n_samples));
    parallel_for(static_cast<std::size_t>(n_samples), threads, [&](std::size_t s) {
        Rng rp(derive_seed(seed, stream::paths, s));
        const auto config = sample_config(params.n, params.h, rp);
        w_paths[s] = reduced_path_energy(config, disorder, params.beta, d);

        Rng rv(derive_seed(seed, stream::cavity, s));
        VectorConfig vc;
        vc.d = d;
        vc.vectors.reserve(static_cast<std::size_t>(params.n));
        for (int i = 0; i < params.n; ++i) vc.vectors.push_back(sample_pd(params.h, d, rv));
        w_vecs[s] = gaussian_vector_energy(vc, disorder, params.beta);
    });

    PushforwardReport rpt;
    rpt.via_paths = detail::log_mean_estimate(w_paths, params.n, 1.0, n_samples);
    rpt.via_vectors = detail::log_mean_estimate(w_vecs, params.n, 1.0, n_samples);
    rpt.combined_stderr = std::sqrt(rpt.via_paths.stderr_ * rpt.via_paths.stderr_ +
                                    rpt.via_vectors.stderr_ * rpt.via_vectors.stderr_);
    const double gap = rpt.via_paths.value - rpt.via_vectors.value;
    rpt.z_score = rpt.combined_stderr > 0.0 ? gap / rpt.combined_stderr : (gap == 0.0 ? 0.0 : inf);
    return rpt;
}

}  // namespace qsk
