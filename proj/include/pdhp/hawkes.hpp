#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "pdhp/kernels.hpp"
#include "pdhp/math.hpp"
#include "pdhp/rng.hpp"

namespace pdhp {

// Raised when every candidate alpha vector has zero likelihood for a cluster.
struct degenerate_cluster_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Ordered event times of one cluster. Duplicate or non-increasing arrivals are
// jittered forward by 1e-6 h per collision so stored times are strictly
// increasing (deterministic: k-th consecutive duplicate lands at t + k*1e-6).
// Old events can be truncated away; the dropped prefix stays counted.
class EventHistory {
public:
    static constexpr double kJitter = 1e-6;

    // time the event will actually carry, after jitter against the last entry
    double resolve_time(double t) const {
        if (total_ > 0 && t <= last_) return last_ + kJitter;
        return t;
    }

    // append a pre-resolved time; enforces strict ordering
    void append(double t) {
        if (!std::isfinite(t)) throw std::invalid_argument("EventHistory: non-finite event time");
        if (total_ > 0 && t <= last_)
            throw std::invalid_argument("EventHistory: event times must be strictly increasing after jitter");
        times_.push_back(t);
        last_ = t;
        ++total_;
    }

    // drop retained events strictly older than cutoff; returns the dropped times
    std::vector<double> truncate_before(double cutoff) {
        std::vector<double> dropped;
        while (head_ < times_.size() && times_[head_] < cutoff) {
            dropped.push_back(times_[head_]);
            ++head_;
        }
        if (head_ > 1024 && head_ * 2 > times_.size()) {
            times_.erase(times_.begin(), times_.begin() + static_cast<std::ptrdiff_t>(head_));
            head_ = 0;
        }
        return dropped;
    }

    std::span<const double> retained() const {
        return {times_.data() + head_, times_.size() - head_};
    }

    bool retained_empty() const { return head_ == times_.size(); }
    std::size_t retained_count() const { return times_.size() - head_; }
    std::size_t total_count() const { return total_; }
    double last_time() const {
        if (total_ == 0) throw std::logic_error("EventHistory: empty");
        return last_;
    }
    bool empty() const { return total_ == 0; }

private:
    std::vector<double> times_;
    std::size_t head_ = 0;
    std::size_t total_ = 0;
    double last_ = 0.0;
};

// Candidate kernel-weight vectors, row-major n_samples x dim. Drawn once per
// run and shared read-only by every cluster and particle.
struct AlphaSampleSet {
    std::size_t dim = 0;
    std::vector<double> data;

    std::size_t count() const { return dim == 0 ? 0 : data.size() / dim; }
    std::span<const double> row(std::size_t s) const { return {data.data() + s * dim, dim}; }

    static AlphaSampleSet draw(std::size_t n_samples, std::size_t dim, double alpha_max, Rng& rng) {
        if (n_samples == 0 || dim == 0) throw std::invalid_argument("AlphaSampleSet: empty shape");
        if (!(alpha_max > 0.0)) throw std::invalid_argument("AlphaSampleSet: alpha_max must be positive");
        AlphaSampleSet set;
        set.dim = dim;
        set.data.resize(n_samples * dim);
        for (double& v : set.data) v = rng.uniform(0.0, alpha_max);
        return set;
    }
};

inline void check_alpha(std::span<const double> alpha, const KernelBasis& basis) {
    if (alpha.size() != basis.size())
        throw std::invalid_argument("alpha length does not match kernel basis");
    for (double a : alpha)
        if (!std::isfinite(a) || a < 0.0)
            throw std::invalid_argument("alpha entries must be finite and non-negative");
}

// out[l] = sum_{t_i < t} kappa_l(t - t_i)
inline void basis_response(std::span<const double> history, const KernelBasis& basis, double t,
                           std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (double ti : history) {
        if (ti >= t) break;
        const double lag = t - ti;
        for (std::size_t l = 0; l < basis.size(); ++l) out[l] += basis.density(l, lag);
    }
}

// out[l] = sum_{t_i} integral of kappa_l(t - t_i) dt over [t0, t1]
inline void basis_mass(std::span<const double> history, const KernelBasis& basis, double t0, double t1,
                       std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (double ti : history) {
        for (std::size_t l = 0; l < basis.size(); ++l) out[l] += basis.mass(l, t0 - ti, t1 - ti);
    }
}

// Hawkes intensity at time t given the history and one weight vector (events/hour).
inline double intensity(std::span<const double> history, std::span<const double> alpha,
                        const KernelBasis& basis, double t) {
    if (!std::isfinite(t)) throw std::invalid_argument("intensity: non-finite evaluation time");
    check_alpha(alpha, basis);
    double rate = 0.0;
    for (double ti : history) {
        if (ti >= t) break;
        const double lag = t - ti;
        for (std::size_t l = 0; l < basis.size(); ++l) rate += alpha[l] * basis.density(l, lag);
    }
    return rate;
}

// Integral of the intensity over [t0, t1]; closed form via the normal CDF.
inline double compensator(std::span<const double> history, std::span<const double> alpha,
                          const KernelBasis& basis, double t0, double t1) {
    if (!std::isfinite(t0) || !std::isfinite(t1)) throw std::invalid_argument("compensator: non-finite window");
    if (t1 < t0) throw std::invalid_argument("compensator: t1 < t0");
    check_alpha(alpha, basis);
    double total = 0.0;
    for (double ti : history) {
        for (std::size_t l = 0; l < basis.size(); ++l) total += alpha[l] * basis.mass(l, t0 - ti, t1 - ti);
    }
    return total;
}

// Per-sample running log-likelihood of one cluster's point process: for each
// candidate alpha vector, the sum of log intensities at observed events minus
// the compensator since the cluster opened. The opening event (and any event
// arriving when no history is retained) contributes no intensity factor; it is
// the innovation draw.
class HawkesAccumulator {
public:
    HawkesAccumulator() = default;
    HawkesAccumulator(std::size_t n_samples, std::size_t dim, double t_open)
        : log_intensity_sums_(n_samples, 0.0),
          compensator_totals_(n_samples, 0.0),
          scratch_(dim, 0.0),
          last_time_(t_open) {}

    double last_time() const { return last_time_; }
    std::size_t n_samples() const { return log_intensity_sums_.size(); }

    double log_intensity_sum(std::size_t s) const { return log_intensity_sums_[s]; }
    double compensator_total(std::size_t s) const { return compensator_totals_[s]; }

    // log L(alpha_s | history up to last_time); -inf once any event had zero
    // intensity under sample s
    double log_likelihood(std::size_t s) const {
        return log_intensity_sums_[s] - compensator_totals_[s];
    }

    // Advance every sample's compensator to t without an event.
    void advance(std::span<const double> history, const AlphaSampleSet& samples,
                 const KernelBasis& basis, double t) {
        if (t < last_time_) throw std::invalid_argument("HawkesAccumulator: time moved backwards");
        if (t == last_time_) return;
        basis_mass(history, basis, last_time_, t, scratch_);
        add_compensator(samples);
        last_time_ = t;
    }

    // Account an event at t_new; history is the retained strictly-earlier history.
    void observe_event(std::span<const double> history, const AlphaSampleSet& samples,
                       const KernelBasis& basis, double t_new) {
        advance(history, samples, basis, t_new);
        if (history.empty()) return; // opening or re-opening event: innovation draw
        basis_response(history, basis, t_new, scratch_);
        const std::size_t dim = samples.dim;
        for (std::size_t s = 0; s < log_intensity_sums_.size(); ++s) {
            const double* a = samples.data.data() + s * dim;
            double rate = 0.0;
            for (std::size_t l = 0; l < dim; ++l) rate += a[l] * scratch_[l];
            log_intensity_sums_[s] += (rate > 0.0) ? std::log(rate) : kNegInf;
        }
    }

    // Fold a truncated event's remaining kernel mass into the compensator, once.
    void freeze_event(double t_event, const AlphaSampleSet& samples, const KernelBasis& basis) {
        for (std::size_t l = 0; l < scratch_.size(); ++l)
            scratch_[l] = basis.tail_mass(l, last_time_ - t_event);
        add_compensator(samples);
    }

    // Gibbs redraw: index proportional to exp(log_likelihood), in log space.
    std::size_t sample_index(Rng& rng) const {
        double m = kNegInf;
        for (std::size_t s = 0; s < n_samples(); ++s) m = std::max(m, log_likelihood(s));
        if (m == kNegInf)
            throw degenerate_cluster_error("all alpha samples have zero likelihood");
        double total = 0.0;
        for (std::size_t s = 0; s < n_samples(); ++s) total += std::exp(log_likelihood(s) - m);
        const double u = rng.uniform() * total;
        double cum = 0.0;
        for (std::size_t s = 0; s + 1 < n_samples(); ++s) {
            cum += std::exp(log_likelihood(s) - m);
            if (u < cum) return s;
        }
        return n_samples() - 1;
    }

    // best-likelihood sample; ties broken by the lowest index
    std::size_t map_index() const {
        std::size_t best = 0;
        double best_ll = kNegInf;
        for (std::size_t s = 0; s < n_samples(); ++s) {
            const double ll = log_likelihood(s);
            if (ll > best_ll) {
                best_ll = ll;
                best = s;
            }
        }
        if (best_ll == kNegInf)
            throw degenerate_cluster_error("all alpha samples have zero likelihood");
        return best;
    }

private:
    void add_compensator(const AlphaSampleSet& samples) {
        const std::size_t dim = samples.dim;
        for (std::size_t s = 0; s < compensator_totals_.size(); ++s) {
            const double* a = samples.data.data() + s * dim;
            double inc = 0.0;
            for (std::size_t l = 0; l < dim; ++l) inc += a[l] * scratch_[l];
            compensator_totals_[s] += inc;
        }
    }

    std::vector<double> log_intensity_sums_;
    std::vector<double> compensator_totals_;
    std::vector<double> scratch_;
    double last_time_ = 0.0;
};

} // namespace pdhp
