#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "censmax/distributions.hpp"
#include "censmax/estimation.hpp"
#include "censmax/simulation.hpp"
#include "censmax/time_series.hpp"

namespace censmax {

// ---------------------------------------------------------------------------
// Up-crossings and sojourns. "Above" means value > level. Runs and crossings
// never span block boundaries.

std::size_t upcrossings(const TimeSeries& series, double level);

enum class Side { Above, Below };

struct RunLength {
    std::size_t n_obs;
    double days;  // time span between the first and last observation of the run
};

std::vector<RunLength> cluster_lengths(const TimeSeries& series, double level, Side side);

// Maximum of each run above the level, in time order.
std::vector<double> cluster_maxima(const TimeSeries& series, double level);

struct ClusterStats {
    double level = 0.0;
    std::size_t n_upcrossings = 0;
    std::size_t n_clusters = 0;
    double mean_cluster_length = 0.0;  // observations
    double mean_cluster_days = 0.0;
    double mean_gap_length = 0.0;      // observations below the level between clusters
    double mean_gap_days = 0.0;
};

ClusterStats cluster_stats(const TimeSeries& series, double level);

// ---------------------------------------------------------------------------
// Cluster-based return levels.

struct ReturnLevelOptions {
    double days_per_year = 365.0;
    // false: one continuous record of sim_years * days_per_year days.
    // true: sim_years independent blocks, each one draw of the scheme (e.g.
    // one December per year when fitting monthly blocks).
    bool independent_years = false;
    double base_quantile = 0.95;
    PoissonPointConfig points{6.0, 100'000'000};
};

// Level L(T) = sup{x : N(x) >= ceil(years / T)}, where N(x) counts the runs
// above x in the record. Throws InsufficientSimulationError when fewer runs
// than needed lie above the base quantile.
std::vector<double> cluster_return_levels(const TimeSeries& series, double years,
                                          const std::vector<double>& return_periods, double base_quantile = 0.95);

// Simulates sim_years of the fitted process on the scheme and extracts
// cluster return levels for every period from that one record.
std::vector<double> return_levels(const SmithParams& theta, const SamplingScheme& scheme,
                                  const std::vector<double>& return_periods, double sim_years, std::uint64_t seed,
                                  const ReturnLevelOptions& opts = {});
double return_level(const SmithParams& theta, const SamplingScheme& scheme, double T_years, double sim_years,
                    std::uint64_t seed, const ReturnLevelOptions& opts = {});

// Times spanning `years` of the scheme (tiled when the scheme is explicit).
TimeSeries simulation_layout(const SamplingScheme& scheme, double years, std::uint64_t seed,
                             const ReturnLevelOptions& opts);

// ceil(years) independent blocks cycling through the blocks of `layout`; used
// when each year contributes one block (e.g. one December) with the observed
// time stamps.
TimeSeries tile_blocks(const TimeSeries& layout, double years);

// As return_levels, on tile_blocks(layout, sim_years).
std::vector<double> return_levels_on_blocks(const SmithParams& theta, const TimeSeries& layout,
                                            const std::vector<double>& return_periods, double sim_years,
                                            std::uint64_t seed, const PoissonPointConfig& points = {6.0, 100'000'000},
                                            double base_quantile = 0.95);

// ---------------------------------------------------------------------------
// Parametric bootstrap.

struct BootstrapOptions {
    std::size_t B = 1000;
    std::uint64_t seed = 1;
    std::vector<double> return_periods{10, 20, 50, 100};
    SamplingScheme return_level_scheme = SamplingScheme::regular(1.0, 365.0);
    // When set, return levels use tile_blocks of this layout instead of the scheme.
    std::optional<TimeSeries> return_level_blocks;
    double sim_years = 1000.0;
    ReturnLevelOptions return_level_options;
    OptimizerConfig optimizer;
    bool fix_xi = false;  // hold xi at its point estimate in every refit
    double level = 0.95;
    std::size_t threads = 0;  // 0: default_thread_count()
};

struct Interval {
    std::string name;
    double point;
    double lo;
    double hi;
};

struct BootstrapDistribution {
    std::size_t B = 0;
    std::size_t n_used = 0;
    std::size_t n_dropped = 0;
    bool unreliable = false;  // more than 10% of replicates dropped
    bool xi_fixed = false;
    std::vector<std::vector<double>> theta_samples;  // (mu, sigma, xi, nu) per kept replicate
    std::vector<std::string> derived_names;          // "q10", "q20", ...
    std::vector<std::vector<double>> derived_samples; // [quantity][replicate]
    std::vector<Interval> intervals;                 // parameters, then derived quantities
};

// Simulates B replicates from fit.theta on the exact time stamps and blocks of
// `layout`, censors them at fit.theta.u, refits with the same estimator and
// reads percentile intervals. Failed replicates are dropped and counted.
BootstrapDistribution parametric_bootstrap(const FitResult& fit, const TimeSeries& layout,
                                           const BootstrapOptions& opts);

// ---------------------------------------------------------------------------
// Classical peaks-over-threshold baseline.

struct PotFit {
    double u = 0.0;
    double lambda = 0.0;  // fraction of observations <= u
    GpdMargin gpd;
    std::size_t r_gap = 3;  // observations below u that close a cluster
    std::size_t n_clusters = 0;
    std::size_t n_obs = 0;
    std::size_t n_below = 0;
    std::size_t n_exceed = 0;
    double loglik = 0.0;
    bool converged = false;
};

// Runs declustering followed by a GPD maximum-likelihood fit of the cluster
// maxima. Throws DataError for fewer than kMinExceedances clusters.
PotFit pot_fit(const TimeSeries& series, double u, std::size_t r_gap = 3, const OptimizerConfig& cfg = {});
// Level exceeded by one cluster per T years on average.
double pot_return_level(const PotFit& fit, double obs_per_year, double T);

// ---------------------------------------------------------------------------
// Quantile-quantile pairs at probabilities k / (n_points + 1).

struct QQPoint {
    double p;
    double a;
    double b;
};

std::vector<QQPoint> qq_data(std::span<const double> a, std::span<const double> b, std::size_t n_points);
std::vector<QQPoint> qq_data(std::span<const double> a, const GevMargin& model, std::size_t n_points);

// Type-7 empirical quantile of an unsorted sample.
double empirical_quantile(std::span<const double> values, double p);

}  // namespace censmax
