#pragma once

#include <string>

namespace qsk {

inline constexpr const char* k_version = "0.1.0";

enum class EstimateStatus {
    ok,
    high_variance,        // effective sample size fell below 5% of the budget
    truncation_warning,   // discarded cascade weight mass exceeded 1%
};

inline const char* to_string(EstimateStatus s) {
    switch (s) {
        case EstimateStatus::high_variance: return "high_variance";
        case EstimateStatus::truncation_warning: return "truncation_warning";
        default: return "ok";
    }
}

inline EstimateStatus estimate_status_from_string(const std::string& s) {
    if (s == "high_variance") return EstimateStatus::high_variance;
    if (s == "truncation_warning") return EstimateStatus::truncation_warning;
    return EstimateStatus::ok;
}

// Monte Carlo estimate with its statistical error and sampling diagnostics.
struct Estimate {
    double value = 0.0;
    double stderr_ = 0.0;
    long n_samples = 0;
    double acceptance_rate = 1.0;
    EstimateStatus status = EstimateStatus::ok;
    double ess = 0.0;            // effective sample size of the exponential weights
    double bias_estimate = 0.0;  // first-order bias proxy folded into stderr_ where noted
};

}  // namespace qsk
