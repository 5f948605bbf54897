#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "censmax/error.hpp"
#include "censmax/extremal_analysis.hpp"
#include "censmax/rng.hpp"
#include "censmax/validation.hpp"

using namespace censmax;

namespace {

TimeSeries regular_series(std::vector<double> values) {
    TimeSeries s;
    s.values = std::move(values);
    for (std::size_t i = 0; i < s.values.size(); ++i) s.times.push_back(static_cast<double>(i));
    return s;
}

double normal_quantile_oracle(double p) {
    double lo = -40, hi = 40;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (0.5 * std::erfc(-mid / std::sqrt(2.0)) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("up-crossings and runs") {
    const auto s = regular_series({1, 5, 1, 5});
    CHECK(upcrossings(s, 3) == 2);
    const auto above = cluster_lengths(s, 3, Side::Above);
    REQUIRE(above.size() == 2);
    CHECK(above[0].n_obs == 1);
    CHECK(above[1].n_obs == 1);
    CHECK(above[0].days == 0.0);

    const auto low = regular_series({0, 1, 2, 1, 0});
    CHECK(upcrossings(low, 10) == 0);
    const auto below = cluster_lengths(low, 10, Side::Below);
    REQUIRE(below.size() == 1);
    CHECK(below[0].n_obs == 5);
    CHECK(below[0].days == 4.0);

    // Runs stop at block boundaries.
    TimeSeries blocked{{0, 1, 0, 1}, {5, 5, 5, 5}, {1, 1, 2, 2}};
    CHECK(cluster_lengths(blocked, 3, Side::Above).size() == 2);
    CHECK(cluster_maxima(regular_series({4, 7, 1, 6, 2}), 3) == std::vector<double>{7, 6});

    // Irregular times: day length is the span of the run.
    TimeSeries irr{{0, 0.5, 2.5, 3}, {0, 5, 6, 0}, {}};
    const auto runs = cluster_lengths(irr, 3, Side::Above);
    REQUIRE(runs.size() == 1);
    CHECK(runs[0].n_obs == 2);
    CHECK(runs[0].days == doctest::Approx(2.0));
}

TEST_CASE("cluster statistics") {
    const auto st = cluster_stats(regular_series({1, 5, 5, 1, 1, 5, 1}), 3);
    CHECK(st.n_upcrossings == 2);
    CHECK(st.n_clusters == 2);
    CHECK(st.mean_cluster_length == doctest::Approx(1.5));
    CHECK(st.mean_gap_length == doctest::Approx(4.0 / 3.0));
    CHECK(st.mean_cluster_length >= 0);
}

TEST_CASE("AR1 clusters shrink to single points far in the tail") {
    const auto ar = simulate_reference({ReferenceModelSpec::Kind::AR1, 0.2}, SamplingScheme::regular(1, 100000), 3);
    const double level = empirical_quantile(ar.values, 0.999);
    const auto st = cluster_stats(ar, level);
    CHECK(st.n_clusters > 50);
    CHECK(std::fabs(st.mean_cluster_length - 1.0) < 0.1);
}

TEST_CASE("cluster return levels from a record") {
    Rng rng(5);
    std::normal_distribution<double> nd;
    TimeSeries s;
    for (int i = 0; i < 365 * 1000; ++i) {
        s.times.push_back(i);
        s.values.push_back(nd(rng));
    }
    const std::vector<double> T{2, 10, 100, 1000};
    const auto L = cluster_return_levels(s, 1000, T);
    for (std::size_t k = 1; k < L.size(); ++k) CHECK(L[k] >= L[k - 1]);
    CHECK(L.back() == doctest::Approx(*std::max_element(s.values.begin(), s.values.end())));
    CHECK(std::fabs(L[2] - normal_quantile_oracle(1.0 - 1.0 / 36500.0)) < 0.25);

    CHECK_THROWS_AS(cluster_return_levels(s, 1000, {1e-3}), InsufficientSimulationError);
    CHECK_THROWS_AS(cluster_return_levels(s, 1000, {-1}), ConfigError);
}

TEST_CASE("return levels of a fitted process") {
    const SmithParams theta{{0, 1, 0.1}, 0.5, 1.0};
    const auto scheme = SamplingScheme::regular(1, 365);
    const auto L = return_levels(theta, scheme, {5, 20, 100}, 500, 9);
    REQUIRE(L.size() == 3);
    CHECK(L[0] <= L[1]);
    CHECK(L[1] <= L[2]);
    CHECK(return_levels(theta, scheme, {5, 20, 100}, 500, 9) == L);

    // Nearly independent margin: levels follow the GEV quantile of 365 T draws.
    const SmithParams indep{{0, 1, 0}, 1e-3, 1.0};
    const double q = return_level(indep, scheme, 50, 2000, 4);
    CHECK(std::fabs(q - gev_quantile(1.0 - 1.0 / (365.0 * 50.0), indep.margin)) < 0.3);

    const auto layout = simulation_layout(scheme, 200, 4, {});
    CHECK(layout.size() == 200 * 365);

    TimeSeries blocks{{0, 1, 2, 0, 1}, {0, 0, 0, 0, 0}, {7, 7, 7, 8, 8}};
    const auto tiled = tile_blocks(blocks, 3);
    CHECK(tiled.size() == 8);
    std::vector<int> ids = tiled.block_ids;
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    CHECK(ids.size() == 3);
}

TEST_CASE("POT baseline") {
    Rng rng(17);
    std::exponential_distribution<double> ex(1.0);
    TimeSeries s;
    for (int i = 0; i < 200000; ++i) {
        s.times.push_back(i);
        s.values.push_back(ex(rng));
    }
    const double u = empirical_quantile(s.values, 0.9);
    const auto p = pot_fit(s, u, 0);
    CHECK(std::fabs(p.gpd.xi) < 0.05);
    CHECK(p.lambda * static_cast<double>(p.n_obs) + static_cast<double>(p.n_exceed) ==
          static_cast<double>(p.n_obs));
    const auto below = std::count_if(s.values.begin(), s.values.end(), [&](double v) { return v <= u; });
    CHECK(p.lambda == static_cast<double>(below) / static_cast<double>(s.size()));
    CHECK(p.n_below == static_cast<std::size_t>(below));

    const auto p3 = pot_fit(s, u, 3);
    CHECK(p3.n_clusters < p.n_clusters);
    CHECK(p3.r_gap == 3);
    const double q10 = pot_return_level(p3, 365, 10);
    const double q100 = pot_return_level(p3, 365, 100);
    CHECK(q100 > q10);

    CHECK_THROWS_AS(pot_fit(regular_series({0, 1, 2, 3, 4, 5}), 4.5), DataError);
}

TEST_CASE("QQ pairs") {
    std::vector<double> a{3, 1, 2, 5, 4, 9, 7};
    for (const auto& q : qq_data(a, a, 5)) CHECK(q.a == q.b);
    const GevMargin m{1, 2, 0.2};
    const auto qm = qq_data(a, m, 4);
    REQUIRE(qm.size() == 4);
    for (const auto& q : qm) {
        CHECK(q.b == doctest::Approx(gev_quantile(q.p, m)));
        CHECK(q.a == doctest::Approx(empirical_quantile(a, q.p)));
    }
    CHECK(qm[0].p == doctest::Approx(0.2));

    Rng rng(1);
    std::normal_distribution<double> nd;
    std::vector<double> x(10000), y(10000);
    for (auto& v : x) v = nd(rng);
    for (auto& v : y) v = nd(rng);
    double worst = 0;
    for (const auto& q : qq_data(x, y, 9)) worst = std::max(worst, std::fabs(q.a - q.b));
    CHECK(worst < 0.08);
    CHECK_THROWS_AS(qq_data(std::vector<double>{}, a, 3), DataError);
}

TEST_CASE("parametric bootstrap") {
    const GevMargin m{0, 1, 0.1};
    auto times = make_times(SamplingScheme::regular(1, 2 * 365), 0);
    const auto x = simulate_smith(times, m, 0.5, 21);
    const double u = empirical_quantile(x.values, 0.9);
    const auto cs = apply_censoring(x, u);
    const auto f = fit(cs, EstimatorSpec::mple());

    BootstrapOptions o;
    o.B = 12;
    o.seed = 3;
    o.sim_years = 100;
    o.return_periods = {10, 20};
    o.level = 0.9;
    const auto a = parametric_bootstrap(f, x, o);
    const auto b = parametric_bootstrap(f, x, o);
    CHECK(a.B == 12);
    CHECK(a.n_used + a.n_dropped == 12);
    REQUIRE(a.intervals.size() == 6);
    CHECK(a.intervals[0].name == "mu");
    CHECK(a.intervals[3].name == "nu");
    CHECK(a.intervals[4].name == "q10");
    CHECK(a.intervals[5].name == "q20");
    CHECK(a.derived_names == std::vector<std::string>{"q10", "q20"});
    for (std::size_t k = 0; k < a.intervals.size(); ++k) {
        CHECK(a.intervals[k].lo <= a.intervals[k].hi);
        CHECK(a.intervals[k].lo == b.intervals[k].lo);
        CHECK(a.intervals[k].hi == b.intervals[k].hi);
    }
    CHECK(a.theta_samples == b.theta_samples);

    o.fix_xi = true;
    o.B = 4;
    const auto c = parametric_bootstrap(f, x, o);
    CHECK(c.xi_fixed);
    for (const auto& t : c.theta_samples) CHECK(t[2] == f.theta.margin.xi);

    o.B = 0;
    CHECK_THROWS_AS(parametric_bootstrap(f, x, o), ConfigError);
}
