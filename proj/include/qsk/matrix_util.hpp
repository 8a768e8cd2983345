#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "qsk/errors.hpp"

namespace qsk {

inline bool is_symmetric(const Eigen::MatrixXd& a, double tol = 1e-12) {
    if (a.rows() != a.cols()) return false;
    return (a - a.transpose()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, a.cwiseAbs().maxCoeff());
}

inline Eigen::VectorXd sym_eigenvalues(const Eigen::MatrixXd& a) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("symmetric eigensolver failed");
    return es.eigenvalues();
}

// Sum of singular values. Fine for the small overlap matrices used here.
inline double nuclear_norm(const Eigen::MatrixXd& a) {
    return Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues().sum();
}

inline double hs_norm(const Eigen::MatrixXd& a) { return a.norm(); }

inline double op_norm_sym(const Eigen::MatrixXd& a) {
    return sym_eigenvalues(a).cwiseAbs().maxCoeff();
}

// Trace norm of a symmetric matrix (sum of |eigenvalue|).
inline double trace_norm_sym(const Eigen::MatrixXd& a) {
    return sym_eigenvalues(a).cwiseAbs().sum();
}

// Factor M with M M^T = a for symmetric positive semidefinite a, via
// eigendecomposition. Eigenvalues below -neg_tol are an error; values in
// [-neg_tol, 0) are clamped to zero.
inline Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& a, double neg_tol,
                                  const std::string& what) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed in " + what);
    Eigen::VectorXd ev = es.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev[i] < -neg_tol)
            throw ValidationError(what + ": matrix has eigenvalue " + std::to_string(ev[i]) +
                                  " below -" + std::to_string(neg_tol));
        if (ev[i] < 0.0) ev[i] = 0.0;
    }
    // symmetric square root: continuous in the input, unlike V sqrt(L)
    return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

inline double min_eigenvalue(const Eigen::MatrixXd& a) { return sym_eigenvalues(a).minCoeff(); }

}  // namespace qsk
