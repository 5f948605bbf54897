#include <doctest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>

#include "censmax/distributions.hpp"
#include "censmax/error.hpp"
#include "censmax/rng.hpp"

using namespace censmax;
using boost::math::quadrature::exp_sinh;
using boost::math::quadrature::gauss_kronrod;
using boost::math::quadrature::tanh_sinh;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// Integral of exp(logpdf) over the margin's support.
double pdf_mass(const GevMargin& m) {
    auto f = [&](double x) { return std::exp(gev_logpdf(x, m)); };
    const double lo = m.lower_bound(), hi = m.upper_bound();
    if (std::isfinite(lo)) return exp_sinh<double>().integrate([&](double s) { return f(lo + s); }, 0.0, kInf);
    if (std::isfinite(hi)) return exp_sinh<double>().integrate([&](double s) { return f(hi - s); }, 0.0, kInf);
    return gauss_kronrod<double, 61>::integrate(f, -kInf, kInf, 15, 1e-12);
}
}  // namespace

TEST_CASE("gev cdf closed-form values") {
    CHECK(gev_cdf(0.0, {0, 1, 0}) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(gev_cdf(2.5, {2.5, 3.0, -0.4}) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(gev_cdf(-1.0, {-1.0, 0.2, 0.7}) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    const double expect = std::exp(-std::pow(1.3, -1.0 / 0.3));
    CHECK(gev_cdf(1.0, {0, 1, 0.3}) == doctest::Approx(expect).epsilon(1e-13));
    CHECK(gev_cdf(1.0, {0, 1, 0.3}) == doctest::Approx(0.6590).epsilon(1e-4));

    // The density integrated from the lower bound to 1 reproduces the cdf.
    const GevMargin m{0, 1, 0.3};
    const double mass =
        tanh_sinh<double>().integrate([&](double x) { return std::exp(gev_logpdf(x, m)); }, m.lower_bound(), 1.0);
    CHECK(mass == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("gev cdf clamps outside the support") {
    CHECK(gev_cdf(-10.0, {0, 1, 0.5}) == 0.0);
    CHECK(gev_cdf(10.0, {0, 1, -0.5}) == 1.0);
    CHECK(gev_logpdf(10.0, {0, 1, -0.5}) == -kInf);
    CHECK(gev_logpdf(-10.0, {0, 1, 0.5}) == -kInf);
}

TEST_CASE("gev logpdf values and total mass") {
    CHECK(gev_logpdf(0.0, {0, 1, 0}) == doctest::Approx(-1.0).epsilon(1e-14));
    for (const GevMargin& m : {GevMargin{0, 1, 0.3}, GevMargin{1, 2, 0}, GevMargin{-1, 0.5, -0.3}}) {
        CHECK(pdf_mass(m) == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("gev quantile") {
    CHECK(gev_quantile(std::exp(-1.0), {1.7, 2, 0.2}) == doctest::Approx(1.7).epsilon(1e-12));
    CHECK(gev_quantile(0.99, {0, 1, 0}) == doctest::Approx(-std::log(-std::log(0.99))).epsilon(1e-13));
    CHECK(gev_quantile(0.99, {0, 1, 0}) == doctest::Approx(4.6001).epsilon(1e-4));
    CHECK(gev_quantile(1.0 - 1.0 / 7300.0, {0, 1, 0}) == doctest::Approx(8.896).epsilon(1e-3));

    // Bisection on the cdf as an independent inverse.
    const GevMargin m{0, 1, 0.3};
    double lo = -3.0, hi = 100.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (gev_cdf(mid, m) < 0.9 ? lo : hi) = mid;
    }
    CHECK(gev_quantile(0.9, m) == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-10));

    CHECK_THROWS_AS(gev_quantile(0.0, m), DomainError);
    CHECK_THROWS_AS(gev_quantile(1.0, m), DomainError);
    CHECK_THROWS_AS(gev_cdf(0.0, {0, 0.0, 0}), DomainError);
    CHECK_THROWS_AS(gev_logpdf(0.0, {0, -1.0, 0}), DomainError);
}

TEST_CASE("gpd cdf and density") {
    CHECK(gpd_cdf(0.0, {0, 1, 0.2}) == 0.0);
    CHECK(gpd_cdf(3.0, {3.0, 2, -0.2}) == 0.0);
    CHECK(gpd_cdf(1.0, {0, 1, 0}) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
    CHECK(gpd_cdf(1.0, {0, 1, 0.5}) == doctest::Approx(1.0 - std::pow(1.5, -2.0)).epsilon(1e-14));
    CHECK(gpd_cdf(1.0, {0, 1, 0.5}) == doctest::Approx(0.5556).epsilon(1e-4));
    CHECK(gpd_cdf(-1.0, {0, 1, 0.5}) == 0.0);
    CHECK(gpd_cdf(5.0, {0, 1, -0.5}) == 1.0);
    CHECK(gpd_logpdf(-1.0, {0, 1, 0.5}) == -kInf);
    CHECK_THROWS_AS(gpd_cdf(1.0, {0, 0.0, 0}), DomainError);

    for (const GpdMargin& g : {GpdMargin{0, 1, 0.3}, GpdMargin{2, 0.5, 0}, GpdMargin{0, 1, -0.4}}) {
        auto f = [&](double x) { return std::exp(gpd_logpdf(x, g)); };
        const double mass = g.xi < 0 ? tanh_sinh<double>().integrate(f, g.mu_threshold, g.mu_threshold - g.sigma / g.xi)
                                     : exp_sinh<double>().integrate(f, g.mu_threshold, kInf);
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(gpd_cdf(gpd_quantile(0.7, g), g) == doctest::Approx(0.7).epsilon(1e-12));
    }
}

TEST_CASE("frechet transform") {
    CHECK(to_frechet(0.4, {0.4, 2, 0.1}) == doctest::Approx(1.0).epsilon(1e-14));
    const GevMargin m{0, 1, 0.3};
    CHECK(from_frechet(to_frechet(2.7, m), m) == doctest::Approx(2.7).epsilon(1e-9));
    const double x5 = gev_quantile(std::exp(-1.0 / 5.0), m);
    CHECK(to_frechet(x5, m) == doctest::Approx(5.0).epsilon(1e-10));
    CHECK_THROWS_AS(to_frechet(-10.0, m), TransformDomainError);
    CHECK_THROWS_AS(to_frechet(10.0, {0, 1, -0.5}), TransformDomainError);

    // log dz/dx against a central difference of z.
    for (double x : {-1.0, 0.0, 2.0, 6.0}) {
        const FrechetPoint fp = frechet_point(x, m);
        const double h = 1e-6;
        const double dz = (to_frechet(x + h, m) - to_frechet(x - h, m)) / (2 * h);
        CHECK(fp.log_z == doctest::Approx(std::log(to_frechet(x, m))).epsilon(1e-12));
        CHECK(std::exp(fp.log_dzdx) == doctest::Approx(dz).epsilon(1e-7));
    }
    CHECK(frechet_point(-10.0, m).log_z == -kInf);
    CHECK(frechet_point(10.0, {0, 1, -0.5}).log_z == kInf);
}

TEST_CASE("censored marginal density") {
    CHECK(censored_marginal_logdensity(0.0, 0.0, {0, 1, 0}) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(censored_marginal_logdensity(1.0, 0.0, {0, 1, 0}) == gev_logpdf(1.0, {0, 1, 0}));
    CHECK_THROWS_AS(censored_marginal_logdensity(-0.1, 0.0, {0, 1, 0}), CensoringError);

    for (const GevMargin& m : {GevMargin{0, 1, 0}, GevMargin{0, 1, 0.3}, GevMargin{1, 2, -0.2}}) {
        const double u = gev_quantile(0.8, m);
        const double atom = std::exp(censored_marginal_logdensity(u, u, m));
        auto f = [&](double y) { return std::exp(censored_marginal_logdensity(y, u, m)); };
        const double line = std::isfinite(m.upper_bound()) ? tanh_sinh<double>().integrate(f, u, m.upper_bound())
                                                           : exp_sinh<double>().integrate(f, u, kInf);
        CHECK(atom + line == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("gev invariants on random grids") {
    Rng rng(2024);
    for (int k = 0; k < 200; ++k) {
        const GevMargin m{rng.uniform(-3, 3), rng.uniform(0.1, 4), rng.uniform(-0.9, 0.9)};
        double prev = 0.0;
        for (int i = 0; i <= 60; ++i) {
            const double x = m.mu + m.sigma * (-6.0 + 0.25 * i);
            const double F = gev_cdf(x, m);
            CHECK(F >= 0.0);
            CHECK(F <= 1.0);
            CHECK(F >= prev);
            prev = F;
            if (F > 1e-12 && F < 1 - 1e-12) {
                const double q = gev_quantile(F, m);
                CHECK(std::fabs(gev_cdf(q, m) - F) <= 1e-13);
                if (F > 1e-6 && F < 1 - 1e-6) CHECK(std::fabs(q - x) <= 1e-8 * std::max(1.0, std::fabs(x)));
            }
        }
    }
}

TEST_CASE("gumbel continuity at xi near zero") {
    for (double x = -4.0; x <= 12.0; x += 0.1) {
        CHECK(std::fabs(gev_cdf(x, {0.3, 1.4, 1e-9}) - gev_cdf(x, {0.3, 1.4, 0})) < 1e-6);
        CHECK(std::fabs(gev_cdf(x, {0.3, 1.4, -1e-9}) - gev_cdf(x, {0.3, 1.4, 0})) < 1e-6);
    }
}

TEST_CASE("gev tail above u is the matched gpd") {
    // With sigma_u = sigma + xi (u - mu), P(X <= x | X > u) for the GEV tail in
    // the limit, and exactly for the Poisson-GPD representation:
    // 1 - [1 + xi (x-u)/sigma_u]^{-1/xi} = 1 - (-log F(x)) / (-log F(u)).
    for (const GevMargin& m : {GevMargin{0, 1, 0.3}, GevMargin{2, 0.7, 0}, GevMargin{0, 1, -0.25}}) {
        const double u = gev_quantile(0.9, m);
        const GpdMargin g{u, m.sigma + m.xi * (u - m.mu), m.xi};
        for (double p : {0.05, 0.3, 0.6, 0.9, 0.99}) {
            const double x = gpd_quantile(p, g);
            const double ratio = gev_log_cdf(x, m) / gev_log_cdf(u, m);
            CHECK(gpd_cdf(x, g) == doctest::Approx(1.0 - ratio).epsilon(1e-9));
        }
    }
}
