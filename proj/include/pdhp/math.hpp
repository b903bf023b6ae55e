#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace pdhp {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kInvSqrt2Pi = 0.3989422804014326779399461;
inline constexpr double kInvSqrt2 = 0.7071067811865475244008444;

// standard normal density scaled to a Gaussian with mean mu, width sigma
inline double gaussian_pdf(double x, double mu, double sigma) {
    const double z = (x - mu) / sigma;
    return kInvSqrt2Pi / sigma * std::exp(-0.5 * z * z);
}

// standard normal CDF
inline double normal_cdf(double z) {
    return 0.5 * std::erfc(-z * kInvSqrt2);
}

inline double log_sum_exp(std::span<const double> xs) {
    double m = kNegInf;
    for (double x : xs) m = std::max(m, x);
    if (m == kNegInf) return kNegInf;
    double s = 0.0;
    for (double x : xs) s += std::exp(x - m);
    return m + std::log(s);
}

// Normalizes log weights into probabilities in place; returns log of the
// normalizer. All -inf input is an error for the caller to avoid.
inline double normalize_log_weights(std::span<double> logw) {
    const double lse = log_sum_exp(logw);
    if (lse == kNegInf) throw std::domain_error("normalize_log_weights: all weights are zero");
    for (double& x : logw) x = std::exp(x - lse);
    return lse;
}

} // namespace pdhp
