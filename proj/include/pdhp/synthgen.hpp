#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pdhp/evaluation.hpp"
#include "pdhp/hawkes.hpp"
#include "pdhp/kernels.hpp"
#include "pdhp/rng.hpp"
#include "pdhp/text.hpp"

namespace pdhp {

struct GeneratorConfig {
    std::size_t n_clusters = 2;
    std::uint32_t vocab_size = 1000;
    std::uint32_t doc_length = 20;
    double t_end = 300.0;          // per-cluster simulation window, hours
    double mu = 0.05;              // immigrant rate per cluster, events/hour
    double target_branching = 0.98;
    double vocab_overlap = 0.0;     // pairwise sum-min of word distributions
    double intensity_overlap = 0.0; // pairwise min-over-mean of intensity profiles
    double decorrelation = 0.0;     // fraction of docs whose text comes from a random cluster
    double grid_dt = 0.05;
    double overlap_tolerance = 0.05;
    std::uint64_t seed = 1;
    std::size_t max_events = 200000;
    KernelBasis basis = synthetic_kernel_basis();

    void validate() const {
        if (n_clusters == 0) throw std::invalid_argument("GeneratorConfig: need at least one cluster");
        if (vocab_size < n_clusters) throw std::invalid_argument("GeneratorConfig: vocabulary smaller than cluster count");
        if (doc_length == 0) throw std::invalid_argument("GeneratorConfig: doc_length must be positive");
        if (!(t_end > 0.0)) throw std::invalid_argument("GeneratorConfig: t_end must be positive");
        if (!(mu > 0.0)) throw std::invalid_argument("GeneratorConfig: mu must be positive");
        if (!(target_branching > 0.0) || target_branching > 0.995)
            throw std::invalid_argument("GeneratorConfig: branching must lie in (0, 0.995]");
        if (vocab_overlap < 0.0 || vocab_overlap > 1.0)
            throw std::invalid_argument("GeneratorConfig: vocab_overlap must lie in [0, 1]");
        if (intensity_overlap < 0.0 || intensity_overlap > 1.0)
            throw std::invalid_argument("GeneratorConfig: intensity_overlap must lie in [0, 1]");
        if (decorrelation < 0.0 || decorrelation > 1.0)
            throw std::invalid_argument("GeneratorConfig: decorrelation must lie in [0, 1]");
        if (!(grid_dt > 0.0)) throw std::invalid_argument("GeneratorConfig: grid_dt must be positive");
        if (!(overlap_tolerance > 0.0)) throw std::invalid_argument("GeneratorConfig: overlap_tolerance must be positive");
        basis.validate();
    }
};

struct GeneratedCluster {
    std::vector<double> alpha;
    std::vector<double> vocab;
    std::vector<double> events; // shifted, ascending
    double shift = 0.0;
};

struct SynthDataset {
    std::vector<Document> docs; // time-sorted, true_temporal/true_textual filled in
    std::vector<GeneratedCluster> clusters;
    double achieved_vocab_overlap = 0.0;     // worst adjacent pair
    double achieved_intensity_overlap = 0.0; // worst adjacent pair deviation target
};

namespace detail {

// Ogata thinning with a piecewise-constant bound recomputed every window; the
// Gaussian kernels are not monotone so the bound uses each kernel's maximum
// over the window.
inline std::vector<double> simulate_hawkes(double mu, std::span<const double> alpha,
                                           const KernelBasis& basis, double t_end, Rng& rng,
                                           std::size_t max_events) {
    const double horizon = basis.horizon(10.0);
    const double window = 0.5;
    std::vector<double> events;
    std::size_t lo = 0;
    double t = 0.0;
    while (t < t_end) {
        const double wend = std::min(t + window, t_end);
        while (lo < events.size() && events[lo] <= t - horizon) ++lo;
        double bound = mu;
        for (std::size_t i = lo; i < events.size(); ++i) {
            const double a = t - events[i], b = wend - events[i];
            for (std::size_t l = 0; l < basis.size(); ++l)
                bound += alpha[l] * basis.max_density(l, a, b);
        }
        const double cand = t + rng.exponential(bound);
        if (cand >= wend) {
            t = wend;
            continue;
        }
        double lam = mu;
        for (std::size_t i = lo; i < events.size(); ++i) {
            const double lag = cand - events[i];
            for (std::size_t l = 0; l < basis.size(); ++l) lam += alpha[l] * basis.density(l, lag);
        }
        if (rng.uniform() * bound <= lam) {
            events.push_back(cand);
            if (events.size() > max_events)
                throw std::runtime_error("simulate_hawkes: event budget exceeded (process near-critical?)");
        }
        t = cand;
    }
    return events;
}

// symmetric Dirichlet(1) draw via normalized exponentials
inline std::vector<double> dirichlet_flat(std::size_t n, Rng& rng) {
    std::vector<double> out(n);
    double total = 0.0;
    for (double& v : out) {
        v = rng.exponential(1.0);
        total += v;
    }
    for (double& v : out) v /= total;
    return out;
}

// Word distributions with exact pairwise overlap: a shared component scaled by
// the target plus per-cluster components on disjoint vocabulary blocks. The
// pointwise minimum of any two is the shared part alone, so sum-min equals the
// target for every pair.
inline std::vector<std::vector<double>> build_vocab_dists(std::uint32_t vocab_size, std::size_t n_clusters,
                                                          double overlap, Rng& rng) {
    std::vector<std::vector<double>> dists(n_clusters);
    std::vector<double> shared;
    if (overlap > 0.0) shared = dirichlet_flat(vocab_size, rng);
    const std::uint32_t block = vocab_size / static_cast<std::uint32_t>(n_clusters);
    for (std::size_t c = 0; c < n_clusters; ++c) {
        std::vector<double> d(vocab_size, 0.0);
        if (overlap < 1.0) {
            const std::uint32_t begin = static_cast<std::uint32_t>(c) * block;
            const std::uint32_t end = (c + 1 == n_clusters) ? vocab_size : begin + block;
            const auto part = dirichlet_flat(end - begin, rng);
            for (std::uint32_t v = begin; v < end; ++v) d[v] = (1.0 - overlap) * part[v - begin];
        }
        if (overlap > 0.0)
            for (std::uint32_t v = 0; v < vocab_size; ++v) d[v] += overlap * shared[v];
        dists[c] = std::move(d);
    }
    return dists;
}

// inverse-CDF token sampler
class CdfSampler {
public:
    explicit CdfSampler(std::span<const double> probs) : cum_(probs.size()) {
        double run = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            run += probs[i];
            cum_[i] = run;
        }
    }
    std::uint32_t draw(Rng& rng) const {
        const double u = rng.uniform() * cum_.back();
        const auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
        const std::size_t idx = static_cast<std::size_t>(it - cum_.begin());
        return static_cast<std::uint32_t>(std::min(idx, cum_.size() - 1));
    }

private:
    std::vector<double> cum_;
};

} // namespace detail

// Generate a labeled stream: one Hawkes event cascade per cluster, rigid time
// shifts enforcing the pairwise intensity-overlap target, word distributions
// enforcing the vocabulary-overlap target exactly, and optional decorrelation
// of text from dynamics.
inline SynthDataset generate(const GeneratorConfig& cfg) {
    cfg.validate();
    SynthDataset out;
    out.clusters.resize(cfg.n_clusters);

    Rng alpha_rng(derive_seed(cfg.seed, "gen-alpha"));
    for (std::size_t c = 0; c < cfg.n_clusters; ++c) {
        std::vector<double> a(cfg.basis.size());
        double total = 0.0;
        for (double& v : a) {
            v = alpha_rng.uniform_pos();
            total += v;
        }
        for (double& v : a) v *= cfg.target_branching / total;
        out.clusters[c].alpha = std::move(a);
    }

    Rng vocab_rng(derive_seed(cfg.seed, "gen-vocab"));
    auto dists = detail::build_vocab_dists(cfg.vocab_size, cfg.n_clusters, cfg.vocab_overlap, vocab_rng);
    for (std::size_t c = 0; c < cfg.n_clusters; ++c) out.clusters[c].vocab = std::move(dists[c]);

    for (std::size_t c = 0; c < cfg.n_clusters; ++c) {
        Rng ev_rng(derive_seed(cfg.seed, "gen-events", c));
        out.clusters[c].events =
            detail::simulate_hawkes(cfg.mu, out.clusters[c].alpha, cfg.basis, cfg.t_end, ev_rng, cfg.max_events);
        if (out.clusters[c].events.empty())
            throw std::runtime_error("generate: cluster produced no events; raise mu or t_end");
    }

    // rigid shifts against the previous cluster to hit the intensity-overlap target
    const double horizon = cfg.basis.horizon(10.0);
    std::vector<IntensityGrid> grids(cfg.n_clusters);
    for (std::size_t c = 0; c < cfg.n_clusters; ++c)
        grids[c] = intensity_grid(out.clusters[c].events, out.clusters[c].alpha, cfg.basis, 0.0,
                                  cfg.t_end + horizon, cfg.grid_dt);

    double worst_dev = 0.0;
    for (std::size_t c = 1; c < cfg.n_clusters; ++c) {
        const auto& prev = grids[c - 1].values;
        const auto& cur = grids[c].values;
        const std::ptrdiff_t prev_off =
            static_cast<std::ptrdiff_t>(std::llround(out.clusters[c - 1].shift / cfg.grid_dt));
        double sp = 0.0, sc = 0.0;
        for (double v : prev) sp += v;
        for (double v : cur) sc += v;
        auto overlap_at = [&](std::ptrdiff_t k) {
            const double smin = sum_min_at_offset(prev, cur, k - prev_off);
            return 2.0 * smin / (sp + sc);
        };
        // Forward scan for the smallest shift whose realized overlap lands
        // within tolerance of the target; curves stay interleaved instead of
        // being pushed apart further than necessary. Beyond `reach` the
        // supports are disjoint, so a zero target always terminates the scan.
        const std::ptrdiff_t reach = static_cast<std::ptrdiff_t>(prev.size() + cur.size()) + 1;
        std::ptrdiff_t best_k = prev_off;
        double best_err = std::numeric_limits<double>::infinity();
        for (std::ptrdiff_t k = prev_off; k <= prev_off + reach; k += 16) {
            const double err = std::abs(overlap_at(k) - cfg.intensity_overlap);
            if (err < best_err) {
                best_err = err;
                best_k = k;
            }
            if (err <= cfg.overlap_tolerance) break;
        }
        for (std::ptrdiff_t k = std::max(prev_off, best_k - 16); k <= best_k + 16; ++k) {
            const double err = std::abs(overlap_at(k) - cfg.intensity_overlap);
            if (err < best_err) {
                best_err = err;
                best_k = k;
            }
        }
        const double achieved = overlap_at(best_k);
        if (best_err > cfg.overlap_tolerance)
            throw std::runtime_error("generate: intensity-overlap target unreachable within tolerance; "
                                     "closest achievable " + std::to_string(achieved));
        out.clusters[c].shift = static_cast<double>(best_k) * cfg.grid_dt;
        worst_dev = std::max(worst_dev, std::abs(achieved - cfg.intensity_overlap));
        out.achieved_intensity_overlap = achieved;
    }
    if (cfg.n_clusters == 1) out.achieved_intensity_overlap = 1.0;

    // normalize the earliest shifted time to zero
    double t_min = 0.0;
    for (const auto& cl : out.clusters) t_min = std::min(t_min, cl.shift);
    for (auto& cl : out.clusters) {
        cl.shift -= t_min;
        for (double& e : cl.events) e += cl.shift;
    }

    double worst_vocab = 1.0;
    for (std::size_t c = 1; c < cfg.n_clusters; ++c)
        worst_vocab = std::min(worst_vocab, vocab_overlap(out.clusters[c - 1].vocab, out.clusters[c].vocab));
    out.achieved_vocab_overlap = cfg.n_clusters > 1 ? worst_vocab : 1.0;

    // merge, order by time, then draw text
    std::vector<std::pair<double, std::uint32_t>> merged;
    for (std::size_t c = 0; c < cfg.n_clusters; ++c)
        for (double e : out.clusters[c].events) merged.emplace_back(e, static_cast<std::uint32_t>(c));
    std::sort(merged.begin(), merged.end());

    std::vector<detail::CdfSampler> samplers;
    samplers.reserve(cfg.n_clusters);
    for (const auto& cl : out.clusters) samplers.emplace_back(cl.vocab);

    Rng text_rng(derive_seed(cfg.seed, "gen-text"));
    std::vector<std::uint32_t> tokens(cfg.doc_length);
    out.docs.reserve(merged.size());
    for (const auto& [time, temporal] : merged) {
        std::uint32_t textual = temporal;
        if (cfg.decorrelation > 0.0 && text_rng.uniform() < cfg.decorrelation)
            textual = static_cast<std::uint32_t>(text_rng.uniform_index(cfg.n_clusters));
        for (auto& tok : tokens) tok = samplers[textual].draw(text_rng);
        Document doc = make_document(time, tokens);
        doc.true_temporal = static_cast<std::int64_t>(temporal);
        doc.true_textual = static_cast<std::int64_t>(textual);
        out.docs.push_back(std::move(doc));
    }
    return out;
}

} // namespace pdhp
