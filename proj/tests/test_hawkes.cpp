#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "pdhp/hawkes.hpp"
#include "pdhp/rng.hpp"

using pdhp::AlphaSampleSet;
using pdhp::EventHistory;
using pdhp::HawkesAccumulator;
using pdhp::KernelBasis;
using pdhp::Rng;

namespace {

std::vector<double> sorted_times(Rng& rng, std::size_t n, double t_end) {
    std::vector<double> ts(n);
    for (double& t : ts) t = rng.uniform(0.0, t_end);
    std::sort(ts.begin(), ts.end());
    return ts;
}

} // namespace

TEST_CASE("history jitters duplicates deterministically") {
    EventHistory h;
    h.append(h.resolve_time(5.0));
    h.append(h.resolve_time(5.0));
    h.append(h.resolve_time(5.0));
    const auto r = h.retained();
    REQUIRE(r.size() == 3);
    REQUIRE(r[0] == 5.0);
    REQUIRE(r[1] == Catch::Approx(5.0 + 1e-6).epsilon(1e-15));
    REQUIRE(r[2] == Catch::Approx(5.0 + 2e-6).epsilon(1e-15));
    REQUIRE_THROWS_AS(h.append(4.0), std::invalid_argument);
}

TEST_CASE("truncation drops the old prefix but keeps the bookkeeping") {
    EventHistory h;
    for (int i = 0; i < 10; ++i) h.append(static_cast<double>(i));
    const auto dropped = h.truncate_before(4.5);
    REQUIRE(dropped == std::vector<double>{0.0, 1.0, 2.0, 3.0, 4.0});
    REQUIRE(h.retained_count() == 5);
    REQUIRE(h.retained()[0] == 5.0);
    REQUIRE(h.total_count() == 10);
    REQUIRE(h.last_time() == 9.0);
}

TEST_CASE("last event time survives full truncation and compaction") {
    EventHistory h;
    for (int i = 0; i < 3000; ++i) h.append(static_cast<double>(i));
    (void)h.truncate_before(3000.0);
    REQUIRE(h.retained_empty());
    REQUIRE(h.total_count() == 3000);
    REQUIRE(h.last_time() == 2999.0);
    REQUIRE(h.resolve_time(100.0) == Catch::Approx(2999.0 + 1e-6).epsilon(1e-15));
}

TEST_CASE("intensity is the weighted sum of kernel responses") {
    const auto basis = pdhp::synthetic_kernel_basis();
    const std::vector<double> events{1.0, 2.5};
    const std::vector<double> alpha{0.2, 0.3, 0.1};
    const double t = 6.0;
    double expected = 0.0;
    for (double e : events)
        for (std::size_t l = 0; l < basis.size(); ++l) expected += alpha[l] * basis.density(l, t - e);
    REQUIRE(pdhp::intensity(events, alpha, basis, t) == Catch::Approx(expected).epsilon(1e-15));
    // only strictly earlier events count
    REQUIRE(pdhp::intensity(events, alpha, basis, 1.0) == 0.0);
    REQUIRE_THROWS_AS(pdhp::intensity(events, alpha, basis, std::nan("")), std::invalid_argument);
    REQUIRE_THROWS_AS(pdhp::intensity(events, std::vector<double>{0.1}, basis, 1.0), std::invalid_argument);
}

TEST_CASE("compensator agrees with quadrature of the intensity") {
    const KernelBasis basis({1.5, 4.0}, {0.3, 0.9});
    Rng rng(77);
    for (int rep = 0; rep < 10; ++rep) {
        const auto events = sorted_times(rng, 8, 10.0);
        const std::vector<double> alpha{rng.uniform(0.0, 0.6), rng.uniform(0.0, 0.6)};
        const double t0 = rng.uniform(0.0, 6.0);
        const double t1 = t0 + rng.uniform(0.5, 8.0);
        const double quad = oracle::integrate(
            [&](double t) { return pdhp::intensity(events, alpha, basis, t); }, t0, t1, 1e-11);
        const double closed = pdhp::compensator(events, alpha, basis, t0, t1);
        REQUIRE(closed == Catch::Approx(quad).margin(1e-7));
    }
    REQUIRE_THROWS_AS(pdhp::compensator({}, std::vector<double>{0.1, 0.1}, basis, 2.0, 1.0),
                      std::invalid_argument);
}

TEST_CASE("alpha sample sets are rectangular draws in range") {
    Rng rng(3);
    const auto set = AlphaSampleSet::draw(50, 3, 0.8, rng);
    REQUIRE(set.count() == 50);
    REQUIRE(set.dim == 3);
    for (double v : set.data) {
        REQUIRE(v >= 0.0);
        REQUIRE(v < 0.8);
    }
    REQUIRE_THROWS_AS(AlphaSampleSet::draw(0, 3, 0.8, rng), std::invalid_argument);
    REQUIRE_THROWS_AS(AlphaSampleSet::draw(10, 3, 0.0, rng), std::invalid_argument);
}

TEST_CASE("incremental accumulator matches the batch recomputation") {
    const auto basis = pdhp::synthetic_kernel_basis();
    Rng rng(123);
    const auto samples = AlphaSampleSet::draw(20, basis.size(), 1.0, rng);

    auto events = sorted_times(rng, 40, 60.0);
    const double t_open = events.front();
    const double t_final = 70.0;

    SECTION("without truncation") {
        EventHistory h;
        HawkesAccumulator acc(samples.count(), samples.dim, t_open);
        for (double e : events) {
            acc.observe_event(h.retained(), samples, basis, e);
            h.append(e);
        }
        acc.advance(h.retained(), samples, basis, t_final);
        for (std::size_t s = 0; s < samples.count(); ++s) {
            const double batch = oracle::batch_hawkes_loglik(events, samples.row(s), basis, t_open, t_final);
            REQUIRE(acc.log_likelihood(s) == Catch::Approx(batch).epsilon(1e-10));
        }
    }

    SECTION("with truncation the error stays far below tolerance") {
        const double horizon = basis.horizon(10.0);
        EventHistory h;
        HawkesAccumulator acc(samples.count(), samples.dim, t_open);
        for (double e : events) {
            for (double dropped : h.truncate_before(e - horizon)) acc.freeze_event(dropped, samples, basis);
            acc.observe_event(h.retained(), samples, basis, e);
            h.append(e);
        }
        for (double dropped : h.truncate_before(t_final - horizon)) acc.freeze_event(dropped, samples, basis);
        acc.advance(h.retained(), samples, basis, t_final);
        for (std::size_t s = 0; s < samples.count(); ++s) {
            const double batch = oracle::batch_hawkes_loglik(events, samples.row(s), basis, t_open, t_final);
            REQUIRE(acc.log_likelihood(s) == Catch::Approx(batch).epsilon(1e-10));
        }
    }
}

TEST_CASE("opening and re-opening events carry no intensity factor") {
    const auto basis = pdhp::synthetic_kernel_basis();
    Rng rng(5);
    const auto samples = AlphaSampleSet::draw(10, basis.size(), 1.0, rng);
    const double horizon = basis.horizon(10.0);

    EventHistory h;
    HawkesAccumulator acc(samples.count(), samples.dim, 0.0);
    acc.observe_event(h.retained(), samples, basis, 0.0);
    h.append(0.0);
    for (std::size_t s = 0; s < samples.count(); ++s) REQUIRE(acc.log_intensity_sum(s) == 0.0);

    // a second event far beyond the horizon joins after full truncation
    const double t2 = horizon + 100.0;
    for (double dropped : h.truncate_before(t2 - horizon)) acc.freeze_event(dropped, samples, basis);
    REQUIRE(h.retained_empty());
    acc.observe_event(h.retained(), samples, basis, t2);
    h.append(t2);
    for (std::size_t s = 0; s < samples.count(); ++s) {
        REQUIRE(acc.log_intensity_sum(s) == 0.0);
        REQUIRE(std::isfinite(acc.log_likelihood(s)));
        // the compensator by now holds each sample's full branching mass of the first event
        const auto a = samples.row(s);
        double branching = 0.0;
        for (double v : a) branching += v;
        REQUIRE(acc.compensator_total(s) <= branching + 1e-12);
    }
}

TEST_CASE("advancing time only lowers the likelihood") {
    const auto basis = pdhp::synthetic_kernel_basis();
    Rng rng(8);
    const auto samples = AlphaSampleSet::draw(5, basis.size(), 1.0, rng);
    EventHistory h;
    HawkesAccumulator acc(samples.count(), samples.dim, 0.0);
    acc.observe_event(h.retained(), samples, basis, 0.0);
    h.append(0.0);
    const double before = acc.log_likelihood(0);
    acc.advance(h.retained(), samples, basis, 5.0);
    const double after = acc.log_likelihood(0);
    REQUIRE(after <= before);
    REQUIRE_THROWS_AS(acc.advance(h.retained(), samples, basis, 1.0), std::invalid_argument);
}

TEST_CASE("degenerate clusters are surfaced, not hidden") {
    // a basis so narrow that an event far from the history underflows every
    // sample's intensity to zero
    const KernelBasis basis({0.1}, {0.01});
    Rng rng(4);
    const auto samples = AlphaSampleSet::draw(8, basis.size(), 1.0, rng);
    EventHistory h;
    HawkesAccumulator acc(samples.count(), samples.dim, 0.0);
    acc.observe_event(h.retained(), samples, basis, 0.0);
    h.append(0.0);
    acc.observe_event(h.retained(), samples, basis, 50.0); // 4990 sigma away
    h.append(50.0);
    REQUIRE_THROWS_AS(acc.sample_index(rng), pdhp::degenerate_cluster_error);
    REQUIRE_THROWS_AS(acc.map_index(), pdhp::degenerate_cluster_error);
}

TEST_CASE("gibbs draws favor high-likelihood samples and map breaks ties low") {
    const auto basis = pdhp::synthetic_kernel_basis();
    Rng rng(21);
    const auto samples = AlphaSampleSet::draw(100, basis.size(), 1.0, rng);

    // a fresh accumulator has identical (zero) log likelihoods: map returns 0
    HawkesAccumulator fresh(samples.count(), samples.dim, 0.0);
    REQUIRE(fresh.map_index() == 0);

    // after many events the posterior concentrates, so the map sample keeps winning
    Rng sim(99);
    EventHistory h;
    HawkesAccumulator acc(samples.count(), samples.dim, 0.0);
    double t = 0.0;
    for (int i = 0; i < 200; ++i) {
        t += sim.exponential(2.0);
        const double e = h.resolve_time(t);
        acc.observe_event(h.retained(), samples, basis, e);
        h.append(e);
    }
    const std::size_t map = acc.map_index();
    std::size_t counts = 0;
    for (int i = 0; i < 50; ++i)
        if (acc.sample_index(rng) == map) ++counts;
    REQUIRE(counts > 10); // the dominant sample keeps winning
}
