#include "censmax/smith_pairwise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "censmax/error.hpp"

namespace censmax {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogHalf = -0.69314718055994530942;

double log_add(double a, double b) noexcept {
    if (a == -kInf) return b;
    if (b == -kInf) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(-std::fabs(a - b)));
}

void check_dependence_args(double z1, double z2, double dt, double nu) {
    if (!(z1 > 0.0) || !(z2 > 0.0)) throw DomainError("exponent_V: Frechet arguments must be positive");
    if (!(nu > 0.0) || !std::isfinite(nu)) throw DomainError("exponent_V: nu must be positive and finite");
    if (!(dt >= 0.0)) throw DomainError("exponent_V: time lag must be non-negative");
}

// V and the log of its derivative factors at (log z1, log z2).
struct ExponentTerms {
    double V;
    double log_mV1;    // log(-dV/dz1)
    double log_mV2;    // log(-dV/dz2)
    double log_mixed;  // log(dV/dz1 * dV/dz2 - d2V/dz1dz2)
};

ExponentTerms exponent_terms(double lz1, double lz2, double a) noexcept {
    if (a >= kAIndep) {
        return {std::exp(-lz1) + std::exp(-lz2), -2.0 * lz1, -2.0 * lz2, -2.0 * (lz1 + lz2)};
    }
    if (a <= kADep) {
        const double lmin = std::min(lz1, lz2);
        double l1 = -kInf, l2 = -kInf;
        if (lz1 < lz2) {
            l1 = -2.0 * lz1;
        } else if (lz1 > lz2) {
            l2 = -2.0 * lz2;
        } else {
            l1 = kLogHalf - 2.0 * lz1;
            l2 = l1;
        }
        return {std::exp(-lmin), l1, l2, -kInf};
    }
    const double w = 0.5 * a + (lz2 - lz1) / a;
    const double v = a - w;
    const double lPw = log_std_normal_cdf(w);
    const double lPv = log_std_normal_cdf(v);
    const double V = std::exp(lPw - lz1) + std::exp(lPv - lz2);
    const double mixed = log_add(lPw + lPv - 2.0 * lz1 - 2.0 * lz2,
                                 log_std_normal_pdf(w) - std::log(a) - 2.0 * lz1 - lz2);
    return {V, lPw - 2.0 * lz1, lPv - 2.0 * lz2, mixed};
}

}  // namespace

bool SmithParams::valid() const noexcept {
    return margin.valid() && nu > 0.0 && std::isfinite(nu) && !std::isnan(u) && u != kInf;
}

void SmithParams::validate() const {
    margin.validate();
    if (!(nu > 0.0) || !std::isfinite(nu)) {
        std::ostringstream os;
        os << "Smith parameters: nu must be positive and finite, got " << nu;
        throw DomainError(os.str());
    }
    if (std::isnan(u) || u == kInf) throw DomainError("Smith parameters: threshold must be a number or -inf");
}

double std_normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double log_std_normal_cdf(double x) noexcept {
    if (x > 0.0) return std::log1p(-0.5 * std::erfc(x / std::numbers::sqrt2));
    if (x > -30.0) return std::log(0.5 * std::erfc(-x / std::numbers::sqrt2));
    // Mills-ratio expansion: Phi(x) ~ phi(x)/|x| * (1 - 1/x^2 + 3/x^4 - 15/x^6)
    const double x2 = x * x;
    const double series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
    return log_std_normal_pdf(x) - std::log(-x) + std::log(series);
}

double log_std_normal_pdf(double x) noexcept {
    return -0.5 * x * x - 0.5 * std::log(2.0 * std::numbers::pi);
}

double exponent_V(double z1, double z2, double dt, double nu) {
    check_dependence_args(z1, z2, dt, nu);
    return exponent_terms(std::log(z1), std::log(z2), dt / nu).V;
}

double bivariate_cdf_frechet(double z1, double z2, double dt, double nu) {
    return std::exp(-exponent_V(z1, z2, dt, nu));
}

double bivariate_cdf_gev(double x1, double x2, double dt, const SmithParams& p) {
    p.validate();
    return bivariate_cdf_frechet(to_frechet(x1, p.margin), to_frechet(x2, p.margin), dt, p.nu);
}

PairCdfPartials pair_cdf_partials(double x1, double x2, double dt, const SmithParams& p) {
    p.validate();
    const double z1 = to_frechet(x1, p.margin);
    const double z2 = to_frechet(x2, p.margin);
    check_dependence_args(z1, z2, dt, p.nu);
    const FrechetPoint f1 = frechet_point(x1, p.margin);
    const FrechetPoint f2 = frechet_point(x2, p.margin);
    const ExponentTerms t = exponent_terms(f1.log_z, f2.log_z, dt / p.nu);
    return {std::exp(-t.V), std::exp(t.log_mV1 - t.V + f1.log_dzdx), std::exp(t.log_mV2 - t.V + f2.log_dzdx),
            std::exp(t.log_mixed - t.V + f1.log_dzdx + f2.log_dzdx)};
}

CensoredPoint censored_point(double y, const SmithParams& p) {
    if (y < p.u || std::isnan(y)) {
        std::ostringstream os;
        os << "censored observation " << y << " lies below threshold " << p.u;
        throw CensoringError(os.str());
    }
    const bool censored = (y == p.u);
    const FrechetPoint f = frechet_point(y, p.margin);
    return {censored, f.log_z, f.log_dzdx};
}

double censored_pair_logdensity(const CensoredPoint& p1, const CensoredPoint& p2, double a) noexcept {
    // F(u) = 0 makes every event involving a censored coordinate impossible, and
    // an uncensored value must sit strictly inside the support.
    for (const CensoredPoint* q : {&p1, &p2}) {
        if (q->log_z == -kInf || std::isnan(q->log_z)) return -kInf;
        if (!q->censored && !std::isfinite(q->log_z)) return -kInf;
    }
    if (p1.censored && p2.censored) {
        // F(u) = 1 collapses the pair onto the other coordinate's marginal.
        if (p1.log_z == kInf && p2.log_z == kInf) return 0.0;
        if (p1.log_z == kInf) return -std::exp(-p2.log_z);
        if (p2.log_z == kInf) return -std::exp(-p1.log_z);
        return -exponent_terms(p1.log_z, p2.log_z, a).V;
    }
    const ExponentTerms t = exponent_terms(p1.log_z, p2.log_z, a);
    if (p2.censored) return t.log_mV1 - t.V + p1.log_dzdx;
    if (p1.censored) return t.log_mV2 - t.V + p2.log_dzdx;
    return t.log_mixed - t.V + p1.log_dzdx + p2.log_dzdx;
}

double censored_pair_logdensity(double y1, double y2, double dt, const SmithParams& p) {
    p.validate();
    if (!(dt >= 0.0)) throw DomainError("censored_pair_logdensity: time lag must be non-negative");
    return censored_pair_logdensity(censored_point(y1, p), censored_point(y2, p), dt / p.nu);
}

std::vector<GradCheckPoint> default_grad_check_grid(const SmithParams& p) {
    const double probs[] = {0.3, 0.6, 0.85, 0.97};
    const double lags[] = {0.25 * p.nu, p.nu, 2.0 * p.nu, 5.0 * p.nu};
    std::vector<GradCheckPoint> grid;
    for (double q1 : probs) {
        for (double q2 : probs) {
            for (double dt : lags) {
                grid.push_back({gev_quantile(q1, p.margin), gev_quantile(q2, p.margin), dt});
            }
        }
    }
    return grid;
}

double pair_density_grad_check(const SmithParams& p, const std::vector<GradCheckPoint>& grid) {
    // Partials below the floor are beyond the resolution of the differences
    // and are compared in absolute terms.
    auto rel = [](double analytic, double numeric) {
        const double scale = std::max(std::fabs(analytic), 1e-6);
        return std::fabs(analytic - numeric) / scale;
    };
    double worst = 0.0;
    for (const GradCheckPoint& g : grid) {
        const double s = p.margin.sigma;
        const double h1 = 1e-5 * s;
        const double h2 = 1e-3 * s;
        auto F = [&](double a, double b) { return bivariate_cdf_gev(a, b, g.dt, p); };
        const PairCdfPartials an = pair_cdf_partials(g.y1, g.y2, g.dt, p);
        const double d1 = (F(g.y1 + h1, g.y2) - F(g.y1 - h1, g.y2)) / (2.0 * h1);
        const double d2 = (F(g.y1, g.y2 + h1) - F(g.y1, g.y2 - h1)) / (2.0 * h1);
        // Richardson-extrapolated mixed difference; removes the O(h^2) term.
        auto mixed = [&](double h) {
            return (F(g.y1 + h, g.y2 + h) - F(g.y1 + h, g.y2 - h) - F(g.y1 - h, g.y2 + h) + F(g.y1 - h, g.y2 - h)) /
                   (4.0 * h * h);
        };
        const double d12 = (4.0 * mixed(h2) - mixed(2.0 * h2)) / 3.0;
        worst = std::max({worst, rel(an.d_x1, d1), rel(an.d_x2, d2), rel(an.d_x1x2, d12)});
    }
    return worst;
}

}  // namespace censmax
