#include "censmax/distributions.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "censmax/error.hpp"

namespace censmax {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool gumbel(double xi) noexcept { return std::fabs(xi) < kXiSwitch; }

[[noreturn]] void bad_scale(const char* what, double sigma) {
    std::ostringstream os;
    os << what << ": scale must be positive and finite, got " << sigma;
    throw DomainError(os.str());
}

}  // namespace

bool GevMargin::valid() const noexcept {
    return std::isfinite(mu) && std::isfinite(xi) && std::isfinite(sigma) && sigma > 0.0;
}

void GevMargin::validate() const {
    if (!valid()) {
        if (!(sigma > 0.0) || !std::isfinite(sigma)) bad_scale("GEV margin", sigma);
        throw DomainError("GEV margin: non-finite location or shape");
    }
}

double GevMargin::lower_bound() const noexcept {
    if (gumbel(xi) || xi < 0.0) return -kInf;
    return mu - sigma / xi;
}

double GevMargin::upper_bound() const noexcept {
    if (gumbel(xi) || xi > 0.0) return kInf;
    return mu - sigma / xi;
}

bool GpdMargin::valid() const noexcept {
    return std::isfinite(mu_threshold) && std::isfinite(xi) && std::isfinite(sigma) && sigma > 0.0;
}

void GpdMargin::validate() const {
    if (!valid()) {
        if (!(sigma > 0.0) || !std::isfinite(sigma)) bad_scale("GPD margin", sigma);
        throw DomainError("GPD margin: non-finite threshold or shape");
    }
}

double gev_log_cdf(double x, const GevMargin& m) {
    m.validate();
    const double w = (x - m.mu) / m.sigma;
    if (gumbel(m.xi)) {
        if (x == -kInf) return -kInf;
        return -std::exp(-w);
    }
    const double t = 1.0 + m.xi * w;
    if (!(t > 0.0)) return m.xi > 0.0 ? -kInf : 0.0;
    return -std::exp(-std::log(t) / m.xi);
}

double gev_cdf(double x, const GevMargin& m) { return std::exp(gev_log_cdf(x, m)); }

double gev_logpdf(double x, const GevMargin& m) {
    m.validate();
    if (!std::isfinite(x)) return -kInf;
    const double w = (x - m.mu) / m.sigma;
    if (gumbel(m.xi)) return -std::log(m.sigma) - w - std::exp(-w);
    const double t = 1.0 + m.xi * w;
    if (!(t > 0.0)) return -kInf;
    const double lt = std::log(t);
    return -std::log(m.sigma) - (1.0 + 1.0 / m.xi) * lt - std::exp(-lt / m.xi);
}

double gev_quantile(double p, const GevMargin& m) {
    m.validate();
    if (!(p > 0.0 && p < 1.0)) {
        std::ostringstream os;
        os << "gev_quantile: probability must lie in (0,1), got " << p;
        throw DomainError(os.str());
    }
    const double y = -std::log(p);  // > 0
    if (gumbel(m.xi)) return m.mu - m.sigma * std::log(y);
    return m.mu + m.sigma * std::expm1(-m.xi * std::log(y)) / m.xi;
}

double gpd_cdf(double x, const GpdMargin& g) {
    g.validate();
    if (!(x > g.mu_threshold)) return 0.0;
    const double w = (x - g.mu_threshold) / g.sigma;
    if (gumbel(g.xi)) return -std::expm1(-w);
    const double t = 1.0 + g.xi * w;
    if (!(t > 0.0)) return 1.0;
    return -std::expm1(-std::log(t) / g.xi);
}

double gpd_logpdf(double x, const GpdMargin& g) {
    g.validate();
    if (!(x >= g.mu_threshold) || !std::isfinite(x)) return -kInf;
    const double w = (x - g.mu_threshold) / g.sigma;
    if (gumbel(g.xi)) return -std::log(g.sigma) - w;
    const double t = 1.0 + g.xi * w;
    if (!(t > 0.0)) return -kInf;
    return -std::log(g.sigma) - (1.0 + 1.0 / g.xi) * std::log(t);
}

double gpd_quantile(double p, const GpdMargin& g) {
    g.validate();
    if (!(p >= 0.0 && p < 1.0)) throw DomainError("gpd_quantile: probability must lie in [0,1)");
    const double ls = -std::log1p(-p);  // -log(1-p)
    if (gumbel(g.xi)) return g.mu_threshold + g.sigma * ls;
    return g.mu_threshold + g.sigma * std::expm1(g.xi * ls) / g.xi;
}

FrechetPoint frechet_point(double x, const GevMargin& m) noexcept {
    const double w = (x - m.mu) / m.sigma;
    if (gumbel(m.xi)) {
        if (x == -kInf) return {-kInf, -kInf};
        if (x == kInf) return {kInf, -kInf};
        return {w, w - std::log(m.sigma)};
    }
    const double t = 1.0 + m.xi * w;
    if (!(t > 0.0)) return {m.xi > 0.0 ? -kInf : kInf, -kInf};
    if (t == kInf) return {kInf, -kInf};
    const double lt = std::log(t);
    // z = t^{1/xi}; dz/dx = t^{1/xi - 1} / sigma.
    return {lt / m.xi, (1.0 / m.xi - 1.0) * lt - std::log(m.sigma)};
}

double to_frechet(double x, const GevMargin& m) {
    m.validate();
    const FrechetPoint p = frechet_point(x, m);
    if (!std::isfinite(p.log_z)) {
        std::ostringstream os;
        os << "to_frechet: x = " << x << " is outside the open support of the margin";
        throw TransformDomainError(os.str());
    }
    return std::exp(p.log_z);
}

double from_frechet(double z, const GevMargin& m) {
    m.validate();
    if (!(z > 0.0) || !std::isfinite(z)) {
        std::ostringstream os;
        os << "from_frechet: z must be positive and finite, got " << z;
        throw TransformDomainError(os.str());
    }
    const double lz = std::log(z);
    if (gumbel(m.xi)) return m.mu + m.sigma * lz;
    return m.mu + m.sigma * std::expm1(m.xi * lz) / m.xi;
}

double censored_marginal_logdensity(double y, double u, const GevMargin& m) {
    if (y < u || std::isnan(y)) {
        std::ostringstream os;
        os << "censored observation " << y << " lies below threshold " << u;
        throw CensoringError(os.str());
    }
    if (y == u) return gev_log_cdf(u, m);
    return gev_logpdf(y, m);
}

}  // namespace censmax
