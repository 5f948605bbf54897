#include <doctest.h>

#include <cmath>
#include <limits>

#include "censmax/error.hpp"
#include "censmax/optimize.hpp"

using namespace censmax;

TEST_CASE("nelder-mead on smooth problems") {
    auto quad = [](std::span<const double> x) { return (x[0] - 1) * (x[0] - 1) + 4 * (x[1] + 2) * (x[1] + 2) + 3; };
    const auto r = nelder_mead(quad, {0, 0}, {0.5, 0.5}, {});
    CHECK(r.converged);
    CHECK(r.x[0] == doctest::Approx(1).epsilon(1e-4));
    CHECK(r.x[1] == doctest::Approx(-2).epsilon(1e-4));
    CHECK(r.f == doctest::Approx(3).epsilon(1e-8));

    auto rosen = [](std::span<const double> x) {
        return 100 * (x[1] - x[0] * x[0]) * (x[1] - x[0] * x[0]) + (1 - x[0]) * (1 - x[0]);
    };
    SimplexOptions o;
    o.max_evals = 20000;
    o.restarts = 3;
    const auto s = nelder_mead(rosen, {-1.2, 1}, {0.3, 0.3}, o);
    CHECK(s.x[0] == doctest::Approx(1).epsilon(1e-3));
    CHECK(s.x[1] == doctest::Approx(1).epsilon(1e-3));
}

TEST_CASE("nelder-mead handles infeasible regions and never worsens the start") {
    auto f = [](std::span<const double> x) {
        if (x[0] < 0) return std::numeric_limits<double>::infinity();
        return std::fabs(x[0] - 0.2) + 1.0;
    };
    const auto r = nelder_mead(f, {0.2}, {1.0}, {});
    CHECK(r.f <= 1.0);
    const auto q = nelder_mead(f, {3.0}, {1.0}, {});
    CHECK(q.f <= f(std::vector<double>{3.0}));
    CHECK(q.x[0] >= 0.0);

    auto nan_start = [](std::span<const double>) { return std::numeric_limits<double>::quiet_NaN(); };
    CHECK_THROWS_AS(nelder_mead(nan_start, {0.0}, {1.0}, {}), NumericalError);
}

TEST_CASE("nelder-mead stops at the evaluation budget") {
    SimplexOptions o;
    o.max_evals = 30;
    o.restarts = 0;
    auto f = [](std::span<const double> x) { return std::cos(3 * x[0]) + x[0] * x[0] + x[1] * x[1]; };
    const auto r = nelder_mead(f, {2, 2}, {0.01, 0.01}, o);
    CHECK(r.n_evals <= 40);
}

TEST_CASE("golden section") {
    const auto r = golden_section_min([](double x) { return (x - 0.7) * (x - 0.7); }, -3, 3, 1e-9, 61);
    CHECK(r.x == doctest::Approx(0.7).epsilon(1e-6));
    CHECK_FALSE(r.used_grid);

    // Two wells; golden section alone would settle in the shallow one.
    auto g = [](double x) { return std::min((x + 2) * (x + 2) + 0.5, 3 * (x - 2.2) * (x - 2.2)); };
    const auto m = golden_section_min(g, -3, 3, 1e-9, 61);
    CHECK(m.x == doctest::Approx(2.2).epsilon(1e-5));
    CHECK(m.f == doctest::Approx(0.0).epsilon(1e-9));

    // Monotone objective: the minimum is at the boundary.
    const auto b = golden_section_min([](double x) { return x; }, -1, 4, 1e-9, 61);
    CHECK(b.x == doctest::Approx(-1).epsilon(1e-6));
}
