#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "censmax/composite_likelihood.hpp"
#include "censmax/error.hpp"
#include "censmax/log.hpp"
#include "censmax/rng.hpp"
#include "censmax/simulation.hpp"

using namespace censmax;

namespace {
using Pairs = std::vector<std::pair<std::uint32_t, std::uint32_t>>;

CensoredSample sample_of(std::vector<double> t, std::vector<double> x, double u, std::vector<int> b = {}) {
    return CensoredSample::make(std::move(t), std::move(x), u, std::move(b));
}

CensoredSample random_sample(std::uint64_t seed, std::size_t n, double u, bool blocks) {
    Rng rng(seed);
    std::vector<double> t, x;
    std::vector<int> b;
    double time = 0;
    for (std::size_t i = 0; i < n; ++i) {
        time += rng.uniform(0.05, 2.0);
        t.push_back(time);
        x.push_back(std::max(u, gev_quantile(rng.uniform(), {0, 1, 0.2})));
        if (blocks) b.push_back(static_cast<int>(i * 4 / n));
    }
    return sample_of(t, x, u, b);
}
}  // namespace

TEST_CASE("pair plans") {
    const auto s = sample_of({1, 2, 3, 4}, {0, 0, 0, 0}, -1);
    CHECK(build_pair_plan(s, PairStrategy::IndexWindow, 1).pairs == Pairs{{0, 1}, {1, 2}, {2, 3}});
    const auto g = sample_of({0, 0.5, 3}, {0, 0, 0}, -1);
    CHECK(build_pair_plan(g, PairStrategy::TimeWindow, 1).pairs == Pairs{{0, 1}});
    CHECK(build_pair_plan(g, PairStrategy::IndexWindow, 1).pairs == Pairs{{0, 1}, {1, 2}});
    CHECK(build_pair_plan(s, PairStrategy::IndexWindow, 2).pairs.size() == 5);

    CHECK_THROWS_AS(build_pair_plan(s, PairStrategy::IndexWindow, 0), ConfigError);
    CHECK_THROWS_AS(build_pair_plan(s, PairStrategy::IndexWindow, 1.5), ConfigError);
    CHECK_THROWS_AS(build_pair_plan(s, PairStrategy::TimeWindow, 0), ConfigError);

    // Blocks are never bridged.
    const auto b = sample_of({0, 1, 0, 1}, {0, 0, 0, 0}, -1, {7, 7, 9, 9});
    CHECK(build_pair_plan(b, PairStrategy::IndexWindow, 3).pairs == Pairs{{0, 1}, {2, 3}});
    CHECK(build_pair_plan(b, PairStrategy::TimeWindow, 5).pairs == Pairs{{0, 1}, {2, 3}});
}

TEST_CASE("plan invariants") {
    for (int seed = 0; seed < 20; ++seed) {
        const auto s = random_sample(seed, 60, -kXiSwitch, true);
        for (auto strategy : {PairStrategy::IndexWindow, PairStrategy::TimeWindow}) {
            const auto plan = build_pair_plan(s, strategy, 3);
            std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
            for (auto [i, j] : plan.pairs) {
                CHECK(i < j);
                CHECK(s.block_ids[i] == s.block_ids[j]);
                CHECK(seen.insert({i, j}).second);
            }
        }
    }
    // Regular sampling: both strategies coincide for K_time = K_index * step.
    std::vector<double> t, x;
    for (int i = 0; i < 40; ++i) {
        t.push_back(0.5 * i);
        x.push_back(0.0);
    }
    const auto r = sample_of(t, x, -1);
    for (int K = 1; K <= 4; ++K) {
        CHECK(build_pair_plan(r, PairStrategy::IndexWindow, K).pairs ==
              build_pair_plan(r, PairStrategy::TimeWindow, 0.5 * K).pairs);
    }
}

TEST_CASE("sample validation") {
    CHECK_THROWS_AS(sample_of({0, 1}, {0.5, 0.2}, 0.3), CensoringError);
    CHECK_THROWS_AS(sample_of({0, 1, 2}, {1, 1}, 0), DataError);
    CHECK_THROWS_AS(sample_of({1, 0}, {1, 1}, 0), DataError);
    CHECK_THROWS_AS(sample_of({0, 1, 2}, {1, 1, 1}, 0, {1, 2, 1}), DataError);
    int warnings = 0;
    ScopedWarningSink sink([&](std::string_view) { ++warnings; });
    const auto s = sample_of({0, 1, 1, 2}, {1, 2, 3, 4}, 0);
    CHECK(s.size() == 3);
    CHECK(s.dropped_ties == 1);
    CHECK(s.values[1] == 2);
    CHECK(warnings == 1);
}

TEST_CASE("independent likelihood") {
    const SmithParams p{{0, 1, 0.2}, 0.5};
    const double u = 0.7;
    const auto all_censored = sample_of({0, 1, 2, 3, 4}, {u, u, u, u, u}, u);
    CHECK(independent_loglik(p, all_censored) == doctest::Approx(5 * gev_log_cdf(u, p.margin)).epsilon(1e-14));
    const auto single = sample_of({0}, {1.5}, u);
    CHECK(independent_loglik(p, single) == doctest::Approx(gev_logpdf(1.5, p.margin)).epsilon(1e-14));

    const auto s = random_sample(3, 50, u, false);
    SmithParams q = p;
    q.nu = 0.1;
    const double a = independent_loglik(q, s);
    q.nu = 10;
    CHECK(independent_loglik(q, s) == a);

    // Margin that excludes an observation from the support.
    const auto far = sample_of({0, 1}, {u, 50.0}, u);
    CHECK(independent_loglik(SmithParams{{0, 1, -0.5}, 1}, far) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("pairwise likelihood") {
    const SmithParams p{{0, 1, 0.2}, 0.5};
    const double u = 0.3;
    const auto two = sample_of({0, 0.7}, {1.1, u}, u);
    CHECK(pairwise_loglik(p, two, build_pair_plan(two, PairStrategy::IndexWindow, 1)) ==
          doctest::Approx(censored_pair_logdensity(1.1, u, 0.7, SmithParams{p.margin, p.nu, u})).epsilon(1e-14));
    CHECK(pairwise_loglik(p, two, PairWeightPlan{}) == 0.0);

    const auto three = sample_of({0, 1, 2.5}, {0.9, 1.7, 0.5}, -10);
    const SmithParams indep{{0, 1, 0.2}, 1e-6};
    CHECK(pairwise_loglik(indep, three, build_pair_plan(three, PairStrategy::IndexWindow, 2)) ==
          doctest::Approx(2 * independent_loglik(indep, three)).epsilon(1e-9));
}

TEST_CASE("markov likelihood identity") {
    const SmithParams p{{0, 1, 0.2}, 0.8};
    const auto two = sample_of({0, 1}, {1.2, 0.3}, 0.3);
    CHECK(markov_loglik(p, two) ==
          doctest::Approx(censored_pair_logdensity(1.2, 0.3, 1.0, SmithParams{p.margin, p.nu, 0.3})).epsilon(1e-14));

    for (int seed = 0; seed < 10; ++seed) {
        const auto s = random_sample(100 + seed, 50, 0.5, seed % 2 == 0);
        const double pl1 = pairwise_loglik(p, s, build_pair_plan(s, PairStrategy::IndexWindow, 1));
        CHECK(std::fabs(markov_loglik(p, s) - (pl1 - interior_independent_loglik(p, s))) < 1e-9);
    }

    const auto s = random_sample(7, 30, -10, false);
    const SmithParams indep{{0, 1, 0.2}, 1e-6};
    CHECK(markov_loglik(indep, s) == doctest::Approx(independent_loglik(indep, s)).epsilon(1e-9));

    // A block with a single observation contributes its marginal term.
    const auto lone = sample_of({0, 1, 0}, {1.0, 2.0, 1.5}, 0.5, {1, 1, 2});
    const auto first = sample_of({0, 1}, {1.0, 2.0}, 0.5);
    CHECK(markov_loglik(p, lone) ==
          doctest::Approx(markov_loglik(p, first) + censored_marginal_logdensity(1.5, 0.5, p.margin)).epsilon(1e-13));
}

TEST_CASE("objectives are invariant under block permutation") {
    const SmithParams p{{0, 1, 0.1}, 0.6};
    const auto s = random_sample(11, 40, 0.4, true);
    // Reverse block order, keeping each block's content.
    std::vector<double> t, x;
    std::vector<int> b;
    const auto ranges = s.blocks();
    for (auto it = ranges.rbegin(); it != ranges.rend(); ++it) {
        for (std::size_t i = it->first; i < it->second; ++i) {
            t.push_back(s.times[i]);
            x.push_back(s.values[i]);
            b.push_back(s.block_ids[i]);
        }
    }
    const auto r = sample_of(t, x, s.u, b);
    CHECK(independent_loglik(p, r) == doctest::Approx(independent_loglik(p, s)).epsilon(1e-12));
    CHECK(markov_loglik(p, r) == doctest::Approx(markov_loglik(p, s)).epsilon(1e-12));
    for (auto st : {PairStrategy::IndexWindow, PairStrategy::TimeWindow}) {
        CHECK(pairwise_loglik(p, r, build_pair_plan(r, st, 2)) ==
              doctest::Approx(pairwise_loglik(p, s, build_pair_plan(s, st, 2))).epsilon(1e-12));
    }
}

TEST_CASE("pairwise likelihood is continuous in nu across the guards") {
    const auto s = random_sample(5, 40, 0.4, false);
    const auto plan = build_pair_plan(s, PairStrategy::TimeWindow, 3);
    double min_dt = 1e9, max_dt = 0;
    for (auto [i, j] : plan.pairs) {
        min_dt = std::min(min_dt, s.times[j] - s.times[i]);
        max_dt = std::max(max_dt, s.times[j] - s.times[i]);
    }
    // nu values putting the smallest lag just either side of the independence guard.
    const double nu_edge = min_dt / kAIndep;
    const SmithParams lo{{0, 1, 0.1}, nu_edge * (1 - 1e-7)}, hi{{0, 1, 0.1}, nu_edge * (1 + 1e-7)};
    CHECK(pairwise_loglik(lo, s, plan) == doctest::Approx(pairwise_loglik(hi, s, plan)).epsilon(1e-9));
    double prev = pairwise_loglik(SmithParams{{0, 1, 0.1}, 1e-3}, s, plan);
    for (double nu = 1e-3; nu < 10; nu *= 1.05) {
        const double v = pairwise_loglik(SmithParams{{0, 1, 0.1}, nu}, s, plan);
        CHECK(std::isfinite(v));
        CHECK(std::fabs(v - prev) < 0.25 * std::max(1.0, std::fabs(prev)));
        prev = v;
    }
    (void)max_dt;
}

TEST_CASE("infeasible parameters give minus infinity") {
    const auto s = random_sample(9, 20, 0.2, false);
    SmithParams bad{{0, -1, 0.1}, 0.5};
    CHECK(independent_loglik(bad, s) == -std::numeric_limits<double>::infinity());
    SmithParams bad_nu{{0, 1, 0.1}, -0.5};
    CHECK(pairwise_loglik(bad_nu, s, build_pair_plan(s, PairStrategy::IndexWindow, 1)) ==
          -std::numeric_limits<double>::infinity());
}
