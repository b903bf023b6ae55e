#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace pdhp {

// lambda^r with the exact special cases the reduction identities rely on:
// r == 1 returns lambda bitwise, r == 0 returns 1 (including 0^0).
inline double powr(double lambda, double r) {
    if (r == 0.0) return 1.0;
    if (r == 1.0) return lambda;
    return std::pow(lambda, r);
}

namespace detail {
inline void check_prior_args(std::span<const double> lambdas, double r, double lambda0) {
    if (!(lambda0 > 0.0) || !std::isfinite(lambda0))
        throw std::invalid_argument("cluster prior: lambda0 must be positive and finite");
    if (!(r >= 0.0) || !std::isfinite(r))
        throw std::invalid_argument("cluster prior: r must be non-negative and finite");
    for (double l : lambdas)
        if (!(l >= 0.0) || !std::isfinite(l))
            throw std::invalid_argument("cluster prior: intensities must be non-negative and finite");
}
} // namespace detail

// Allocation probabilities over existing clusters plus one trailing entry for
// a new cluster: p_c = lambda_c^r / (lambda0 + sum lambda^r), p_new =
// lambda0 / (lambda0 + sum lambda^r). A rescaled path handles lambda^r
// overflow: weights are divided by max(lambda)^r, which only shifts the
// normalizer.
inline std::vector<double> pdhp_weights(std::span<const double> lambdas, double r, double lambda0) {
    detail::check_prior_args(lambdas, r, lambda0);
    const std::size_t n = lambdas.size();
    std::vector<double> out(n + 1);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = powr(lambdas[i], r);
        sum += out[i];
    }
    double denom = sum + lambda0;
    if (std::isfinite(denom) && denom > 0.0) {
        for (std::size_t i = 0; i < n; ++i) out[i] /= denom;
        out[n] = lambda0 / denom;
        return out;
    }
    const double lmax = *std::max_element(lambdas.begin(), lambdas.end());
    sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = powr(lambdas[i] / lmax, r);
        sum += out[i];
    }
    const double scaled0 = lambda0 / powr(lmax, r); // may underflow to 0: new-cluster mass vanishes
    denom = sum + scaled0;
    for (std::size_t i = 0; i < n; ++i) out[i] /= denom;
    out[n] = scaled0 / denom;
    return out;
}

// Dirichlet-Hawkes prior: weights proportional to the intensities themselves.
inline std::vector<double> dhp_weights(std::span<const double> lambdas, double lambda0) {
    detail::check_prior_args(lambdas, 1.0, lambda0);
    const std::size_t n = lambdas.size();
    std::vector<double> out(n + 1);
    double sum = 0.0;
    for (double l : lambdas) sum += l;
    const double denom = sum + lambda0;
    for (std::size_t i = 0; i < n; ++i) out[i] = lambdas[i] / denom;
    out[n] = lambda0 / denom;
    return out;
}

// Powered Chinese restaurant process over occupied-table counts: the same
// functional form as pdhp_weights with counts in place of intensities and a
// concentration alpha0 in place of lambda0. r = 1 is the classic seating
// rule, r = 0 spreads mass uniformly over occupied tables.
inline std::vector<double> pcrp_weights(std::span<const double> counts, double r, double alpha0) {
    for (double c : counts)
        if (!(c >= 1.0))
            throw std::invalid_argument("cluster prior: table counts must be >= 1");
    return pdhp_weights(counts, r, alpha0);
}

// Chinese restaurant process: seating probability proportional to table size.
inline std::vector<double> crp_weights(std::span<const double> counts, double alpha0) {
    for (double c : counts)
        if (!(c >= 1.0))
            throw std::invalid_argument("cluster prior: table counts must be >= 1");
    return dhp_weights(counts, alpha0);
}

// Uniform process: every existing cluster weighted 1, new cluster lambda0.
inline std::vector<double> uniform_weights(std::size_t n_clusters, double lambda0) {
    if (!(lambda0 > 0.0) || !std::isfinite(lambda0))
        throw std::invalid_argument("cluster prior: lambda0 must be positive and finite");
    std::vector<double> out(n_clusters + 1);
    const double denom = static_cast<double>(n_clusters) + lambda0;
    for (std::size_t i = 0; i < n_clusters; ++i) out[i] = 1.0 / denom;
    out[n_clusters] = lambda0 / denom;
    return out;
}

} // namespace pdhp
