#pragma once

// Bivariate law of the Gaussian extreme-value (Smith) process observed at two
// instants |t1 - t2| = dt apart, with dependence range nu (days).
//
//   V(z1, z2) = Phi(a/2 + log(z2/z1)/a) / z1 + Phi(a/2 + log(z1/z2)/a) / z2,  a = dt / nu
//   P(Z1 <= z1, Z2 <= z2) = exp(-V)
//
// Partial derivatives are analytic; with w = a/2 + log(z2/z1)/a and v = a - w
//   dV/dz1 = -Phi(w) / z1^2,   d2V/dz1dz2 = -phi(w) / (a z1^2 z2),
// because phi(w) z2 = phi(v) z1.

#include <limits>
#include <vector>

#include "censmax/distributions.hpp"

namespace censmax {

// Beyond these values of a = dt/nu the Smith exponent equals its independence
// (a >= kAIndep) or perfect-dependence (a <= kADep) limit to machine precision.
inline constexpr double kAIndep = 76.0;
inline constexpr double kADep = 1e-12;

struct SmithParams {
    GevMargin margin;
    double nu = 1.0;
    // Censoring threshold; -inf means no censoring.
    double u = -std::numeric_limits<double>::infinity();

    void validate() const;
    bool valid() const noexcept;
};

double std_normal_cdf(double x) noexcept;
double log_std_normal_cdf(double x) noexcept;
double log_std_normal_pdf(double x) noexcept;

double exponent_V(double z1, double z2, double dt, double nu);
double bivariate_cdf_frechet(double z1, double z2, double dt, double nu);
double bivariate_cdf_gev(double x1, double x2, double dt, const SmithParams& p);

// F and its analytic partial derivatives on the GEV scale.
struct PairCdfPartials {
    double cdf;
    double d_x1;
    double d_x2;
    double d_x1x2;
};
PairCdfPartials pair_cdf_partials(double x1, double x2, double dt, const SmithParams& p);

// Observation prepared for repeated pair evaluation under one parameter value.
struct CensoredPoint {
    bool censored;
    double log_z;
    double log_dzdx;
};
// Throws CensoringError when y < p.u.
CensoredPoint censored_point(double y, const SmithParams& p);

// Four-case log-density with respect to (delta_u + dx) x (delta_u + dx), a = dt/nu.
double censored_pair_logdensity(const CensoredPoint& p1, const CensoredPoint& p2, double a) noexcept;
double censored_pair_logdensity(double y1, double y2, double dt, const SmithParams& p);

struct GradCheckPoint {
    double y1;
    double y2;
    double dt;
};

// Quantile grid of (y1, y2, dt) points inside the margin support.
std::vector<GradCheckPoint> default_grad_check_grid(const SmithParams& p);

// Largest relative discrepancy between the analytic partials of the bivariate
// GEV-scale cdf and central finite differences over the grid.
double pair_density_grad_check(const SmithParams& p, const std::vector<GradCheckPoint>& grid);

}  // namespace censmax
