#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "qsk/errors.hpp"

namespace qsk {

struct OptimResult {
    Eigen::VectorXd x;
    double value = 0.0;
    int n_evals = 0;
    bool converged = false;
};

// Nelder-Mead on a fixed right-angled start simplex. Everything is
// deterministic: same objective, start, and budget give the same iterates.
inline OptimResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                               const Eigen::VectorXd& x0, double step, int max_evals,
                               double tol) {
    if (step <= 0.0 || tol <= 0.0) throw ValidationError("step and tolerance must be positive");
    if (max_evals < 1) throw ValidationError("evaluation budget must be positive");
    const int n = static_cast<int>(x0.size());
    OptimResult out;
    if (n == 0) {
        out.x = x0;
        out.value = f(x0);
        out.n_evals = 1;
        out.converged = true;
        return out;
    }

    std::vector<Eigen::VectorXd> xs;
    std::vector<double> fs;
    int evals = 0;
    const auto eval = [&](const Eigen::VectorXd& x) {
        ++evals;
        return f(x);
    };

    xs.push_back(x0);
    fs.push_back(eval(x0));
    for (int i = 0; i < n && evals < max_evals; ++i) {
        Eigen::VectorXd v = x0;
        v[i] += step;
        xs.push_back(v);
        fs.push_back(eval(v));
    }

    const auto order = [&]() {
        for (std::size_t i = 1; i < xs.size(); ++i)
            for (std::size_t j = i; j > 0 && fs[j] < fs[j - 1]; --j) {
                std::swap(fs[j], fs[j - 1]);
                std::swap(xs[j], xs[j - 1]);
            }
    };
    order();

    bool converged = false;
    while (evals < max_evals && xs.size() == static_cast<std::size_t>(n) + 1) {
        if (fs.back() - fs.front() < tol) {
            converged = true;
            break;
        }
        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (std::size_t i = 0; i + 1 < xs.size(); ++i) centroid += xs[i];
        centroid /= static_cast<double>(n);

        const Eigen::VectorXd xr = centroid + (centroid - xs.back());
        const double fr = eval(xr);
        if (fr < fs.front()) {
            const Eigen::VectorXd xe = centroid + 2.0 * (centroid - xs.back());
            const double fe = evals < max_evals ? eval(xe) : fr;
            if (fe < fr) {
                xs.back() = xe;
                fs.back() = fe;
            } else {
                xs.back() = xr;
                fs.back() = fr;
            }
        } else if (fr < fs[xs.size() - 2]) {
            xs.back() = xr;
            fs.back() = fr;
        } else {
            const bool outside = fr < fs.back();
            const Eigen::VectorXd base = outside ? xr : xs.back();
            const Eigen::VectorXd xc = centroid + 0.5 * (base - centroid);
            const double fc = evals < max_evals ? eval(xc) : fr;
            if (fc < (outside ? fr : fs.back())) {
                xs.back() = xc;
                fs.back() = fc;
            } else {
                // shrink toward the best vertex
                for (std::size_t i = 1; i < xs.size() && evals < max_evals; ++i) {
                    xs[i] = xs[0] + 0.5 * (xs[i] - xs[0]);
                    fs[i] = eval(xs[i]);
                }
            }
        }
        order();
    }

    out.x = xs.front();
    out.value = fs.front();
    out.n_evals = evals;
    out.converged = converged;
    return out;
}

// Repeats the search from the incumbent with a shrunken simplex until the
// evaluation budget runs out or a restart fails to improve.
inline OptimResult nelder_mead_restarts(const std::function<double(const Eigen::VectorXd&)>& f,
                                        const Eigen::VectorXd& x0, double step, int max_evals,
                                        double tol, int restarts = 2) {
    OptimResult best = nelder_mead(f, x0, step, max_evals, tol);
    double cur_step = step;
    for (int k = 0; k < restarts && best.n_evals < max_evals; ++k) {
        cur_step *= 0.25;
        const auto next =
            nelder_mead(f, best.x, cur_step, max_evals - best.n_evals, tol);
        const int used = best.n_evals + next.n_evals;
        const bool improved = next.value < best.value;
        if (improved) best = next;
        best.n_evals = used;
        if (!improved) break;
    }
    return best;
}

}  // namespace qsk
