#pragma once

// Univariate GEV / GPD building blocks and the unit-Frechet marginal transform.
// All functions are pure. Densities return -inf off support; cdfs clamp to [0, 1].

namespace censmax {

// |xi| below this switches to the Gumbel (xi = 0) formulas.
inline constexpr double kXiSwitch = 1e-8;

struct GevMargin {
    double mu = 0.0;
    double sigma = 1.0;
    double xi = 0.0;

    // Throws DomainError unless sigma > 0 and all fields are finite.
    void validate() const;
    bool valid() const noexcept;

    // Support bounds; -inf / +inf where unbounded.
    double lower_bound() const noexcept;
    double upper_bound() const noexcept;
};

struct GpdMargin {
    double mu_threshold = 0.0;
    double sigma = 1.0;
    double xi = 0.0;

    void validate() const;
    bool valid() const noexcept;
};

double gev_cdf(double x, const GevMargin& m);
// log F(x); -inf below the lower support bound, 0 above the upper one.
double gev_log_cdf(double x, const GevMargin& m);
double gev_logpdf(double x, const GevMargin& m);
double gev_quantile(double p, const GevMargin& m);

double gpd_cdf(double x, const GpdMargin& g);
double gpd_logpdf(double x, const GpdMargin& g);
double gpd_quantile(double p, const GpdMargin& g);

// z = -1 / log F(x; m). Throws TransformDomainError unless 0 < F(x) < 1.
double to_frechet(double x, const GevMargin& m);
double from_frechet(double z, const GevMargin& m);

// Position of a point on the unit-Frechet scale, in log space.
// log_z is -inf at or below the lower support bound and +inf at or above the
// upper one; log_dzdx is log of dz/dx (finite only strictly inside the support).
struct FrechetPoint {
    double log_z;
    double log_dzdx;
};
FrechetPoint frechet_point(double x, const GevMargin& m) noexcept;

// Log-density of Y = max(X, u) with respect to delta_u + Lebesgue.
// Throws CensoringError if y < u.
double censored_marginal_logdensity(double y, double u, const GevMargin& m);

}  // namespace censmax
