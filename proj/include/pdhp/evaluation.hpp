#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "pdhp/kernels.hpp"

namespace pdhp {

namespace detail {
// dense ids in order of first appearance, so relabeling is deterministic
template <class T>
std::vector<std::size_t> relabel(std::span<const T> labels, std::size_t& n_out) {
    std::map<T, std::size_t> ids;
    std::vector<std::size_t> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto [it, fresh] = ids.emplace(labels[i], ids.size());
        out[i] = it->second;
        (void)fresh;
    }
    n_out = ids.size();
    return out;
}
} // namespace detail

// counts[i][j] = number of positions with a-label i and b-label j (dense ids)
template <class A, class B>
std::vector<std::vector<std::uint64_t>> contingency(std::span<const A> a, std::span<const B> b) {
    if (a.size() != b.size()) throw std::invalid_argument("contingency: label vectors differ in length");
    if (a.empty()) throw std::invalid_argument("contingency: empty labelings");
    std::size_t ka = 0, kb = 0;
    const auto da = detail::relabel(a, ka);
    const auto db = detail::relabel(b, kb);
    std::vector<std::vector<std::uint64_t>> counts(ka, std::vector<std::uint64_t>(kb, 0));
    for (std::size_t i = 0; i < a.size(); ++i) ++counts[da[i]][db[i]];
    return counts;
}

// Shannon entropy of the label distribution divided by log of the number of
// distinct labels; 0 when everything sits in one cluster.
template <class T>
double normalized_entropy(std::span<const T> labels) {
    if (labels.empty()) throw std::invalid_argument("normalized_entropy: empty labeling");
    std::size_t k = 0;
    const auto dense = detail::relabel(labels, k);
    if (k == 1) return 0.0;
    std::vector<std::uint64_t> counts(k, 0);
    for (std::size_t d : dense) ++counts[d];
    const double n = static_cast<double>(labels.size());
    double h = 0.0;
    for (std::uint64_t c : counts) {
        const double p = static_cast<double>(c) / n;
        h -= p * std::log(p);
    }
    return h / std::log(static_cast<double>(k));
}

// Normalized mutual information with geometric-mean normalization. Two
// one-cluster partitions count as identical (1); a one-cluster partition
// against a split one carries no information (0).
template <class A, class B>
double nmi(std::span<const A> a, std::span<const B> b) {
    const auto counts = contingency(a, b);
    const std::size_t ka = counts.size(), kb = counts[0].size();
    const double n = static_cast<double>(a.size());
    std::vector<double> ra(ka, 0.0), cb(kb, 0.0);
    for (std::size_t i = 0; i < ka; ++i)
        for (std::size_t j = 0; j < kb; ++j) {
            ra[i] += static_cast<double>(counts[i][j]);
            cb[j] += static_cast<double>(counts[i][j]);
        }
    double ha = 0.0, hb = 0.0, mi = 0.0;
    for (double v : ra)
        if (v > 0.0) ha -= (v / n) * std::log(v / n);
    for (double v : cb)
        if (v > 0.0) hb -= (v / n) * std::log(v / n);
    for (std::size_t i = 0; i < ka; ++i)
        for (std::size_t j = 0; j < kb; ++j) {
            const double nij = static_cast<double>(counts[i][j]);
            if (nij > 0.0) mi += (nij / n) * std::log(nij * n / (ra[i] * cb[j]));
        }
    if (ha <= 0.0 || hb <= 0.0) return (ka == 1 && kb == 1) ? 1.0 : 0.0;
    return mi / std::sqrt(ha * hb);
}

// NMI against textual truth minus NMI against temporal truth: positive when
// predictions track content, negative when they track dynamics.
template <class P, class T>
double delta_nmi(std::span<const P> pred, std::span<const T> textual, std::span<const T> temporal) {
    return nmi(pred, textual) - nmi(pred, temporal);
}

// sum_v min(p_v, q_v) for two probability vectors
inline double vocab_overlap(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw std::invalid_argument("vocab_overlap: dimension mismatch");
    double sp = 0.0, sq = 0.0, s = 0.0;
    for (std::size_t v = 0; v < p.size(); ++v) {
        if (!(p[v] >= 0.0) || !(q[v] >= 0.0)) throw std::invalid_argument("vocab_overlap: negative entries");
        sp += p[v];
        sq += q[v];
        s += std::min(p[v], q[v]);
    }
    if (std::abs(sp - 1.0) > 1e-6 || std::abs(sq - 1.0) > 1e-6)
        throw std::invalid_argument("vocab_overlap: inputs must sum to 1");
    return s;
}

// Minimal-cost assignment (shortest augmenting path with potentials). cost is
// n x m with n <= m; returns the matched column of each row.
inline std::vector<std::size_t> hungarian_min(const std::vector<std::vector<double>>& cost) {
    const std::size_t n = cost.size();
    if (n == 0) throw std::invalid_argument("hungarian_min: empty cost matrix");
    const std::size_t m = cost[0].size();
    if (n > m) throw std::invalid_argument("hungarian_min: needs rows <= cols");
    for (const auto& row : cost)
        if (row.size() != m) throw std::invalid_argument("hungarian_min: ragged cost matrix");
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0), minv(m + 1, 0.0);
    std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::vector<char> used(m + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            std::size_t j1 = 0;
            double delta = inf;
            for (std::size_t j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> row_to_col(n, 0);
    for (std::size_t j = 1; j <= m; ++j)
        if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
    return row_to_col;
}

// Mean absolute error between fitted and true kernel weights after matching
// fitted clusters to true clusters by maximum document overlap. Pairs whose
// overlap is zero are excluded; NaN if nothing matches.
inline double alpha_mae(std::span<const std::uint32_t> pred_labels,
                        const std::vector<std::vector<double>>& pred_alphas,
                        std::span<const std::int64_t> true_labels,
                        const std::vector<std::vector<double>>& true_alphas) {
    if (pred_labels.size() != true_labels.size())
        throw std::invalid_argument("alpha_mae: label vectors differ in length");
    if (pred_labels.empty()) throw std::invalid_argument("alpha_mae: empty labelings");
    const std::size_t kp = pred_alphas.size(), kt = true_alphas.size();
    std::vector<std::vector<double>> overlap(kp, std::vector<double>(kt, 0.0));
    for (std::size_t i = 0; i < pred_labels.size(); ++i) {
        const std::size_t a = pred_labels[i];
        const std::int64_t b = true_labels[i];
        if (a >= kp || b < 0 || static_cast<std::size_t>(b) >= kt)
            throw std::invalid_argument("alpha_mae: label outside alpha table");
        overlap[a][static_cast<std::size_t>(b)] += 1.0;
    }
    // Hungarian wants rows <= cols; transpose when fitted clusters outnumber true ones.
    const bool transposed = kp > kt;
    const std::size_t rows = transposed ? kt : kp, cols = transposed ? kp : kt;
    std::vector<std::vector<double>> cost(rows, std::vector<double>(cols, 0.0));
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            cost[i][j] = -(transposed ? overlap[j][i] : overlap[i][j]);
    const auto match = hungarian_min(cost);
    double total = 0.0;
    std::size_t n_pairs = 0;
    for (std::size_t i = 0; i < rows; ++i) {
        const std::size_t a = transposed ? match[i] : i;
        const std::size_t b = transposed ? i : match[i];
        if (overlap[a][b] <= 0.0) continue;
        const auto& pa = pred_alphas[a];
        const auto& ta = true_alphas[b];
        if (pa.size() != ta.size()) throw std::invalid_argument("alpha_mae: alpha dimension mismatch");
        double err = 0.0;
        for (std::size_t l = 0; l < pa.size(); ++l) err += std::abs(pa[l] - ta[l]);
        total += err / static_cast<double>(pa.size());
        ++n_pairs;
    }
    if (n_pairs == 0) return std::numeric_limits<double>::quiet_NaN();
    return total / static_cast<double>(n_pairs);
}

// Regular samples of a Hawkes intensity over [t0, t1].
struct IntensityGrid {
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<double> values;

    double mass() const {
        double s = 0.0;
        for (double v : values) s += v;
        return s * dt;
    }
};

inline IntensityGrid intensity_grid(std::span<const double> events, std::span<const double> alpha,
                                    const KernelBasis& basis, double t0, double t1, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("intensity_grid: dt must be positive");
    if (!(t1 >= t0)) throw std::invalid_argument("intensity_grid: t1 < t0");
    if (alpha.size() != basis.size()) throw std::invalid_argument("intensity_grid: alpha length mismatch");
    const double horizon = basis.horizon(10.0);
    IntensityGrid grid;
    grid.t0 = t0;
    grid.dt = dt;
    const std::size_t n = static_cast<std::size_t>(std::floor((t1 - t0) / dt)) + 1;
    grid.values.resize(n, 0.0);
    std::size_t lo = 0;
    for (std::size_t g = 0; g < n; ++g) {
        const double t = t0 + static_cast<double>(g) * dt;
        while (lo < events.size() && events[lo] <= t - horizon) ++lo;
        double val = 0.0;
        for (std::size_t i = lo; i < events.size(); ++i) {
            if (events[i] >= t) break;
            const double lag = t - events[i];
            for (std::size_t l = 0; l < basis.size(); ++l) val += alpha[l] * basis.density(l, lag);
        }
        grid.values[g] = val;
    }
    return grid;
}

// sum_j min(a[j], b[j - k]) over indices where both sides exist
inline double sum_min_at_offset(std::span<const double> a, std::span<const double> b, std::ptrdiff_t k) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, k);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(a.size()),
                                                       static_cast<std::ptrdiff_t>(b.size()) + k);
    double s = 0.0;
    for (std::ptrdiff_t j = lo; j < hi; ++j) s += std::min(a[j], b[j - k]);
    return s;
}

enum class OverlapMode { min_over_mean, min_over_max };

// Overlap of two intensity profiles sampled at the same dt. min_over_mean is
// the default: integral of the pointwise minimum over the mean of the two
// masses. min_over_max divides by the integral of the pointwise maximum.
inline double intensity_overlap(const IntensityGrid& a, const IntensityGrid& b,
                                OverlapMode mode = OverlapMode::min_over_mean) {
    if (!(a.dt > 0.0) || std::abs(a.dt - b.dt) > 1e-12 * a.dt)
        throw std::invalid_argument("intensity_overlap: grids must share dt");
    const double koff = (b.t0 - a.t0) / a.dt;
    const double kround = std::round(koff);
    if (std::abs(koff - kround) > 1e-6)
        throw std::invalid_argument("intensity_overlap: grid origins not aligned to dt");
    double sa = 0.0, sb = 0.0;
    for (double v : a.values) sa += v;
    for (double v : b.values) sb += v;
    if (sa <= 0.0 || sb <= 0.0) return 0.0;
    const double smin = sum_min_at_offset(a.values, b.values, static_cast<std::ptrdiff_t>(kround));
    if (mode == OverlapMode::min_over_mean) return 2.0 * smin / (sa + sb);
    return smin / (sa + sb - smin);
}

} // namespace pdhp
