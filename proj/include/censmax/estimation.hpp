#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "censmax/composite_likelihood.hpp"
#include "censmax/optimize.hpp"
#include "censmax/time_series.hpp"

namespace censmax {

// Minimum number of uncensored observations for threshold scans and POT fits.
inline constexpr std::size_t kMinExceedances = 10;

enum class EstimatorKind { MILE, MPLE, MMLE };

struct EstimatorSpec {
    EstimatorKind kind = EstimatorKind::MPLE;
    PairStrategy strategy = PairStrategy::IndexWindow;  // MPLE only
    double K = 1.0;                                     // MPLE only

    static EstimatorSpec mile() { return {EstimatorKind::MILE, PairStrategy::IndexWindow, 1.0}; }
    static EstimatorSpec mple(PairStrategy s = PairStrategy::IndexWindow, double K = 1.0) {
        return {EstimatorKind::MPLE, s, K};
    }
    static EstimatorSpec mmle() { return {EstimatorKind::MMLE, PairStrategy::IndexWindow, 1.0}; }

    // "MILE", "MMLE", "MPL1E" (index window) or "MPL_T1E" (time window).
    std::string label() const;
};

struct OptimizerConfig {
    int max_evals = 4000;          // per simplex search
    double ftol = 1e-8;
    double xtol = 1e-6;
    int restarts = 1;
    double xi_bound = 0.95;        // xi = xi_bound * tanh(eta)
    double nu_min = 1e-3;          // days
    double nu_max = 1e3;
    int nu_grid_points = 61;       // stage-2 fallback scan
    std::optional<double> fixed_xi;

    void validate() const;
};

struct StageTrace {
    double stage1 = 0.0;     // independent log-likelihood after the margin fit
    double two_stage = 0.0;  // composite objective after the 1-D nu search
    double full = 0.0;       // composite objective after the joint search
};

struct FitResult {
    SmithParams theta;  // theta.u is the censoring threshold; nu is NaN for MILE
    double objective = 0.0;
    EstimatorSpec estimator;
    bool converged = false;
    int n_evals = 0;
    StageTrace stages;
    bool nu_at_lower_bound = false;
    std::size_t n_obs = 0;
    std::size_t n_uncensored = 0;
    std::vector<std::string> warnings;
};

// Maximizes the independent likelihood over (mu, sigma, xi).
FitResult fit_mile(const CensoredSample& sample, const OptimizerConfig& cfg = {},
                   std::optional<GevMargin> init = std::nullopt);

// Margin by MILE, then a golden-section search over log nu, then a joint
// simplex search over (mu, log sigma, xi, log nu) from that point.
FitResult fit_mple(const CensoredSample& sample, PairStrategy strategy, double K, const OptimizerConfig& cfg = {});
FitResult fit_mmle(const CensoredSample& sample, const OptimizerConfig& cfg = {});
FitResult fit(const CensoredSample& sample, const EstimatorSpec& spec, const OptimizerConfig& cfg = {});

struct ThresholdFit {
    double u;
    std::size_t n_exceedances;
    std::optional<FitResult> fit;  // empty when the threshold was skipped
    std::string notice;
};

// Censors the series at each threshold and fits; thresholds leaving fewer
// than kMinExceedances uncensored points are skipped with a notice.
std::vector<ThresholdFit> threshold_scan(const TimeSeries& series, const std::vector<double>& thresholds,
                                         const EstimatorSpec& spec, const OptimizerConfig& cfg = {});

}  // namespace censmax
