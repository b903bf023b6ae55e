#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "pdhp/smc.hpp"
#include "pdhp/synthgen.hpp"

using pdhp::Document;
using pdhp::SmcConfig;
using pdhp::SmcEngine;

namespace {

// small, fast engine configuration for unit-level checks
SmcConfig small_config() {
    SmcConfig cfg;
    cfg.vocab_size = 60;
    cfg.n_particles = 4;
    cfg.n_alpha_samples = 150;
    cfg.lambda0 = 0.1;
    cfg.theta0 = 1.0;
    cfg.seed = 12;
    return cfg;
}

std::vector<Document> tiny_stream() {
    pdhp::GeneratorConfig gen;
    gen.n_clusters = 2;
    gen.vocab_size = 60;
    gen.doc_length = 12;
    gen.t_end = 60.0;
    gen.mu = 0.15;
    gen.target_branching = 0.85;
    gen.vocab_overlap = 0.0;
    gen.intensity_overlap = 0.0;
    gen.seed = 91;
    return pdhp::generate(gen).docs;
}

} // namespace

TEST_CASE("engine state stays consistent while streaming") {
    const auto docs = tiny_stream();
    SmcEngine engine(small_config());
    for (const auto& doc : docs) {
        engine.observe(doc);
        double total = 0.0;
        for (const auto& p : engine.particles()) {
            total += p.weight;
            REQUIRE(p.assignments.size() == engine.n_docs());
            for (std::uint32_t c : p.assignments) REQUIRE(c < p.clusters.size());
            for (const auto& cl : p.clusters) REQUIRE(cl.text.n_docs() >= 1);
        }
        REQUIRE(total == Catch::Approx(1.0).epsilon(1e-9));
    }
    REQUIRE(engine.n_docs() == docs.size());
    REQUIRE(engine.labels().size() == docs.size());
}

TEST_CASE("same seed, same stream, same output") {
    const auto docs = tiny_stream();
    SmcEngine a(small_config()), b(small_config());
    for (const auto& doc : docs) {
        a.observe(doc);
        b.observe(doc);
    }
    REQUIRE(a.labels() == b.labels());
    for (std::size_t p = 0; p < a.particles().size(); ++p)
        REQUIRE(a.particles()[p].weight == b.particles()[p].weight);
    auto sa = a.finalize();
    auto sb = b.finalize();
    REQUIRE(sa.size() == sb.size());
    for (std::size_t i = 0; i < sa.size(); ++i) REQUIRE(sa[i].map_alpha == sb[i].map_alpha);
}

TEST_CASE("well-separated clusters are recovered") {
    const auto docs = tiny_stream();
    SmcEngine engine(small_config());
    for (const auto& doc : docs) engine.observe(doc);
    const auto labels = engine.labels();
    std::vector<std::int64_t> truth;
    for (const auto& doc : docs) truth.push_back(doc.true_temporal);
    const double score =
        pdhp::nmi(std::span<const std::uint32_t>(labels), std::span<const std::int64_t>(truth));
    REQUIRE(score > 0.8);
}

TEST_CASE("out-of-order documents are rejected") {
    SmcEngine engine(small_config());
    engine.observe(pdhp::make_document(5.0, std::vector<std::uint32_t>{1, 2, 3}));
    REQUIRE_THROWS_AS(engine.observe(pdhp::make_document(4.0, std::vector<std::uint32_t>{1, 2, 3})),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(engine.observe(pdhp::make_document(std::nan(""), std::vector<std::uint32_t>{1})),
                      std::invalid_argument);
}

TEST_CASE("identical timestamps are absorbed by jitter") {
    SmcEngine engine(small_config());
    for (int i = 0; i < 12; ++i)
        engine.observe(pdhp::make_document(3.0, std::vector<std::uint32_t>{1, 2, 3, 4}));
    REQUIRE(engine.n_docs() == 12);
    for (const auto& p : engine.particles())
        for (const auto& c : p.clusters) {
            const auto r = c.history.retained();
            for (std::size_t i = 1; i < r.size(); ++i) REQUIRE(r[i] > r[i - 1]);
        }
}

TEST_CASE("finalize is idempotent and reports sane summaries") {
    const auto docs = tiny_stream();
    SmcEngine engine(small_config());
    for (const auto& doc : docs) engine.observe(doc);
    const auto first = engine.finalize();
    const auto second = engine.finalize();
    REQUIRE(first.size() == second.size());
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < first.size(); ++i) {
        REQUIRE(first[i].map_alpha == second[i].map_alpha);
        REQUIRE(first[i].map_alpha.size() == engine.config().basis.size());
        REQUIRE(first[i].n_docs >= 1);
        REQUIRE(first[i].t_open <= first[i].t_last);
        assigned += first[i].n_docs;
    }
    REQUIRE(assigned == docs.size());
}

TEST_CASE("particle weights respect the replacement threshold") {
    const auto docs = tiny_stream();
    auto cfg = small_config();
    cfg.omega_threshold = -1.0; // default: 1 / (2 n_particles)
    SmcEngine engine(cfg);
    const double threshold = 1.0 / (2.0 * static_cast<double>(cfg.n_particles));
    for (const auto& doc : docs) {
        engine.observe(doc);
        for (const auto& p : engine.particles()) REQUIRE(p.weight >= threshold * 1e-12);
        // after any replacement pass no particle sits below the threshold;
        // weights are either fresh-uniform or all above it
        bool any_below = false;
        for (const auto& p : engine.particles()) any_below = any_below || p.weight < threshold;
        REQUIRE_FALSE(any_below);
    }
}

TEST_CASE("config validation fires") {
    SmcConfig cfg = small_config();
    cfg.r = -1.0;
    REQUIRE_THROWS_AS(SmcEngine(cfg), std::invalid_argument);
    cfg = small_config();
    cfg.n_particles = 0;
    REQUIRE_THROWS_AS(SmcEngine(cfg), std::invalid_argument);
    cfg = small_config();
    cfg.lambda0 = 0.0;
    REQUIRE_THROWS_AS(SmcEngine(cfg), std::invalid_argument);
}
