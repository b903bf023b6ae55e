#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "pdhp/math.hpp"

namespace pdhp {

// Fixed vector of Gaussian kernel functions kappa(t). Each entry is a
// normalized density in the time lag, so a weight vector alpha measures
// expected offspring counts per entry and sum(alpha) is the branching ratio.
struct KernelBasis {
    std::vector<double> means;   // lag of each bump, hours
    std::vector<double> sigmas;  // width of each bump, hours

    KernelBasis() = default;
    KernelBasis(std::vector<double> mu, std::vector<double> sigma)
        : means(std::move(mu)), sigmas(std::move(sigma)) {
        validate();
    }

    void validate() const {
        if (means.empty() || means.size() != sigmas.size())
            throw std::invalid_argument("KernelBasis: means/sigmas must be non-empty and equal length");
        for (double m : means)
            if (!std::isfinite(m) || m < 0.0)
                throw std::invalid_argument("KernelBasis: means must be finite and non-negative");
        for (double s : sigmas)
            if (!std::isfinite(s) || s <= 0.0)
                throw std::invalid_argument("KernelBasis: sigmas must be finite and positive");
    }

    std::size_t size() const { return means.size(); }

    // kappa_l evaluated at lag (zero for negative lags: kernels are causal)
    double density(std::size_t l, double lag) const {
        if (lag < 0.0) return 0.0;
        return gaussian_pdf(lag, means[l], sigmas[l]);
    }

    // integral of kappa_l over lags [a, b]; the kernel is causal, so any
    // negative part of the interval contributes nothing
    double mass(std::size_t l, double a, double b) const {
        if (a < 0.0) a = 0.0;
        if (b <= a) return 0.0;
        return normal_cdf((b - means[l]) / sigmas[l]) - normal_cdf((a - means[l]) / sigmas[l]);
    }

    // mass of kappa_l remaining beyond lag a
    double tail_mass(std::size_t l, double a) const {
        if (a < 0.0) a = 0.0;
        return normal_cdf((means[l] - a) / sigmas[l]);
    }

    // max of kappa_l over the lag interval [a, b]; the bump peaks at mu_l
    double max_density(std::size_t l, double a, double b) const {
        if (a <= means[l] && means[l] <= b) return kInvSqrt2Pi / sigmas[l];
        const double edge = (means[l] < a) ? a : b;
        return density(l, std::max(edge, 0.0));
    }

    // lag beyond which every entry's remaining mass is negligible
    double horizon(double n_sigmas = 10.0) const {
        double h = 0.0;
        for (std::size_t l = 0; l < size(); ++l) h = std::max(h, means[l] + n_sigmas * sigmas[l]);
        return h;
    }
};

// Presets. Synthetic laboratory: three narrow bumps at 3, 7 and 11 hours.
// Reddit-scale streams: twelve bumps spanning half an hour to one week.
inline KernelBasis synthetic_kernel_basis() {
    return KernelBasis({3.0, 7.0, 11.0}, {0.5, 0.5, 0.5});
}

inline KernelBasis reddit_kernel_basis() {
    return KernelBasis(
        {0.5, 1.0, 4.0, 8.0, 12.0, 24.0, 48.0, 72.0, 96.0, 120.0, 144.0, 168.0},
        {1.0, 1.0, 3.0, 8.0, 12.0, 12.0, 24.0, 24.0, 24.0, 24.0, 24.0, 24.0});
}

} // namespace pdhp
