#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pdhp/hawkes.hpp"
#include "pdhp/kernels.hpp"
#include "pdhp/math.hpp"
#include "pdhp/prior.hpp"
#include "pdhp/rng.hpp"
#include "pdhp/text.hpp"

namespace pdhp {

struct SmcConfig {
    double r = 1.0;
    double lambda0 = 0.1;
    double theta0 = 1.0;
    std::uint32_t vocab_size = 1000;
    std::size_t n_particles = 8;
    std::size_t n_alpha_samples = 2000;
    double alpha_max = 1.0;
    // particles below this weight are replaced; <= 0 means 1 / (2 n_particles)
    double omega_threshold = -1.0;
    double horizon_sigmas = 10.0;
    std::uint64_t seed = 1;
    KernelBasis basis = synthetic_kernel_basis();

    void validate() const {
        if (!(r >= 0.0) || !std::isfinite(r)) throw std::invalid_argument("SmcConfig: r must be >= 0");
        if (!(lambda0 > 0.0)) throw std::invalid_argument("SmcConfig: lambda0 must be positive");
        if (!(theta0 > 0.0)) throw std::invalid_argument("SmcConfig: theta0 must be positive");
        if (vocab_size == 0) throw std::invalid_argument("SmcConfig: vocab_size must be positive");
        if (n_particles == 0) throw std::invalid_argument("SmcConfig: need at least one particle");
        if (n_alpha_samples == 0) throw std::invalid_argument("SmcConfig: need at least one alpha sample");
        if (!(alpha_max > 0.0)) throw std::invalid_argument("SmcConfig: alpha_max must be positive");
        if (!(horizon_sigmas > 0.0)) throw std::invalid_argument("SmcConfig: horizon_sigmas must be positive");
        basis.validate();
    }
};

// One cluster inside one particle: its event times, the per-sample Hawkes
// likelihood state, its word counts, and the currently sampled alpha index.
struct ClusterState {
    EventHistory history;
    HawkesAccumulator acc;
    ClusterTextStats text;
    std::size_t alpha_idx = 0;
    double t_open = 0.0;
};

struct Particle {
    std::vector<ClusterState> clusters;
    std::vector<std::uint32_t> assignments;
    double weight = 1.0;
};

struct ClusterSummary {
    std::size_t id = 0;
    std::uint32_t n_docs = 0;
    std::uint64_t n_words = 0;
    double t_open = 0.0;
    double t_last = 0.0;
    std::vector<double> map_alpha;
};

// Sequential Monte Carlo filter over cluster assignments. Documents arrive in
// time order; each particle keeps its own clustering hypothesis, samples the
// new document's cluster from the normalized product of the intensity-powered
// allocation prior and the text predictive, then redraws that cluster's alpha
// from the precomputed candidate set. Particle weights track the per-document
// marginal likelihood; low-weight particles are replaced by copies of
// particles drawn by weight and all weights reset uniform.
class SmcEngine {
public:
    explicit SmcEngine(const SmcConfig& cfg) : cfg_(cfg), rng_(derive_seed(cfg.seed, "smc-filter")) {
        cfg_.validate();
        if (cfg_.omega_threshold <= 0.0)
            cfg_.omega_threshold = 1.0 / (2.0 * static_cast<double>(cfg_.n_particles));
        Rng alpha_rng(derive_seed(cfg_.seed, "alpha-samples"));
        samples_ = AlphaSampleSet::draw(cfg_.n_alpha_samples, cfg_.basis.size(), cfg_.alpha_max, alpha_rng);
        horizon_ = cfg_.basis.horizon(cfg_.horizon_sigmas);
        particles_.resize(cfg_.n_particles);
        for (auto& p : particles_) p.weight = 1.0 / static_cast<double>(cfg_.n_particles);
        empty_text_ = ClusterTextStats(cfg_.vocab_size);
    }

    const SmcConfig& config() const { return cfg_; }
    const AlphaSampleSet& alpha_samples() const { return samples_; }
    std::size_t n_docs() const { return n_docs_; }
    double last_time() const { return last_time_; }
    const std::vector<Particle>& particles() const { return particles_; }

    void observe(const Document& doc) {
        if (!std::isfinite(doc.time)) throw std::invalid_argument("SmcEngine: non-finite document time");
        if (n_docs_ > 0 && doc.time < last_time_)
            throw std::invalid_argument("SmcEngine: stream times must be non-decreasing");
        log_weights_.resize(particles_.size());
        for (std::size_t p = 0; p < particles_.size(); ++p) {
            const double log_marginal = process(particles_[p], doc);
            log_weights_[p] = std::log(particles_[p].weight) + log_marginal;
        }
        normalize_log_weights(log_weights_);
        for (std::size_t p = 0; p < particles_.size(); ++p) particles_[p].weight = log_weights_[p];
        resample_if_needed();
        last_time_ = doc.time;
        ++n_docs_;
    }

    std::size_t best_particle_index() const {
        std::size_t best = 0;
        for (std::size_t p = 1; p < particles_.size(); ++p)
            if (particles_[p].weight > particles_[best].weight) best = p;
        return best;
    }

    // per-document cluster ids of the highest-weight particle
    std::vector<std::uint32_t> labels() const { return particles_[best_particle_index()].assignments; }

    // Advance the best particle's accumulators to the stream clock and report
    // its clusters with maximum-likelihood alpha vectors. Idempotent.
    std::vector<ClusterSummary> finalize() {
        Particle& best = particles_[best_particle_index()];
        std::vector<ClusterSummary> out;
        out.reserve(best.clusters.size());
        for (std::size_t c = 0; c < best.clusters.size(); ++c) {
            ClusterState& cs = best.clusters[c];
            cs.acc.advance(cs.history.retained(), samples_, cfg_.basis, last_time_);
            ClusterSummary s;
            s.id = c;
            s.n_docs = cs.text.n_docs();
            s.n_words = cs.text.total();
            s.t_open = cs.t_open;
            s.t_last = cs.history.last_time();
            const auto row = samples_.row(cs.acc.map_index());
            s.map_alpha.assign(row.begin(), row.end());
            out.push_back(std::move(s));
        }
        return out;
    }

private:
    double process(Particle& particle, const Document& doc) {
        const std::size_t n_clusters = particle.clusters.size();
        lambda_scratch_.resize(n_clusters);
        for (std::size_t c = 0; c < n_clusters; ++c) {
            const ClusterState& cs = particle.clusters[c];
            lambda_scratch_[c] = intensity(cs.history.retained(), samples_.row(cs.alpha_idx), cfg_.basis, doc.time);
        }
        const std::vector<double> prior = pdhp_weights(lambda_scratch_, cfg_.r, cfg_.lambda0);
        logpost_scratch_.resize(n_clusters + 1);
        for (std::size_t c = 0; c < n_clusters; ++c) {
            logpost_scratch_[c] = prior[c] > 0.0
                ? std::log(prior[c]) + log_predictive(doc, particle.clusters[c].text, cfg_.theta0)
                : kNegInf;
        }
        logpost_scratch_[n_clusters] = std::log(prior[n_clusters]) + log_predictive(doc, empty_text_, cfg_.theta0);
        const double log_marginal = normalize_log_weights(logpost_scratch_);
        const std::size_t chosen = rng_.categorical(logpost_scratch_);

        if (chosen == n_clusters) {
            ClusterState cs;
            cs.acc = HawkesAccumulator(samples_.count(), samples_.dim, doc.time);
            cs.text = ClusterTextStats(cfg_.vocab_size);
            cs.t_open = doc.time;
            cs.history.append(doc.time);
            cs.text.add(doc);
            cs.alpha_idx = cs.acc.sample_index(rng_);
            particle.clusters.push_back(std::move(cs));
        } else {
            ClusterState& cs = particle.clusters[chosen];
            const double t_eff = cs.history.resolve_time(doc.time);
            for (double dropped : cs.history.truncate_before(t_eff - horizon_))
                cs.acc.freeze_event(dropped, samples_, cfg_.basis);
            cs.acc.observe_event(cs.history.retained(), samples_, cfg_.basis, t_eff);
            cs.history.append(t_eff);
            cs.text.add(doc);
            cs.alpha_idx = cs.acc.sample_index(rng_);
        }
        particle.assignments.push_back(static_cast<std::uint32_t>(chosen));
        return log_marginal;
    }

    void resample_if_needed() {
        low_scratch_.clear();
        for (std::size_t p = 0; p < particles_.size(); ++p)
            if (particles_[p].weight < cfg_.omega_threshold) low_scratch_.push_back(p);
        if (low_scratch_.empty()) return;
        weight_scratch_.resize(particles_.size());
        for (std::size_t p = 0; p < particles_.size(); ++p) weight_scratch_[p] = particles_[p].weight;
        // snapshot sources before any replacement lands
        std::vector<Particle> replacements;
        replacements.reserve(low_scratch_.size());
        for (std::size_t i = 0; i < low_scratch_.size(); ++i)
            replacements.push_back(particles_[rng_.categorical(weight_scratch_)]);
        for (std::size_t i = 0; i < low_scratch_.size(); ++i)
            particles_[low_scratch_[i]] = std::move(replacements[i]);
        for (auto& p : particles_) p.weight = 1.0 / static_cast<double>(particles_.size());
    }

    SmcConfig cfg_;
    Rng rng_;
    AlphaSampleSet samples_;
    ClusterTextStats empty_text_;
    double horizon_ = 0.0;
    double last_time_ = -std::numeric_limits<double>::infinity();
    std::size_t n_docs_ = 0;
    std::vector<Particle> particles_;
    std::vector<double> lambda_scratch_;
    std::vector<double> logpost_scratch_;
    std::vector<double> log_weights_;
    std::vector<double> weight_scratch_;
    std::vector<std::size_t> low_scratch_;
};

} // namespace pdhp
