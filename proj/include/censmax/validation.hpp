#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "censmax/estimation.hpp"
#include "censmax/extremal_analysis.hpp"
#include "censmax/simulation.hpp"

namespace censmax {

// The four reference models with their customary dependence settings:
// AR1 alpha 0.2, LogArmax alpha 0.2, OU alpha 0.05 (UniformGaps(0,2) sampling).
ReferenceModelSpec reference_model(ReferenceModelSpec::Kind kind);
ReferenceModelSpec::Kind parse_reference_kind(const std::string& name);  // throws ConfigError
std::string reference_label(ReferenceModelSpec::Kind kind);

// Regular daily sampling, or UniformGaps(0,2) for OU, over `years` of 365 days.
SamplingScheme reference_scheme(ReferenceModelSpec::Kind kind, double years);

// Closed-form T-year cluster return level where one exists: the normal
// quantile 1 - 1/(365 T) for IID and AR1, the Gumbel quantile
// 1 - 1/(365 T alpha) for LogArmax. OU has none.
std::optional<double> analytic_return_level(const ReferenceModelSpec& spec, double T);

// Cluster return level read off a direct simulation of the reference model.
double simulated_return_level(const ReferenceModelSpec& spec, double T, double years, std::uint64_t seed);

struct BandSummary {
    std::string method;
    std::size_t n_ok = 0;
    std::size_t n_failed = 0;
    double mean = 0.0;
    double lo = 0.0;  // empirical quantiles of the replicate estimates
    double hi = 0.0;
    std::vector<double> values;  // NaN for failed replicates
};

struct ReturnLevelStudyOptions {
    ReferenceModelSpec model;
    double years = 5.0;
    std::size_t reps = 200;
    double T = 100.0;
    double sim_years = 1000.0;
    double censor_quantile = 0.95;
    std::vector<EstimatorSpec> estimators{EstimatorSpec::mple()};
    bool pot = true;
    std::size_t pot_gap = 3;
    double band = 0.90;
    std::uint64_t seed = 1;
    OptimizerConfig optimizer;
    ReturnLevelOptions return_level_options;
    std::size_t threads = 0;  // 0: default_thread_count()

    void validate() const;
};

struct ReturnLevelStudy {
    std::string model;
    std::optional<double> true_value;
    std::vector<BandSummary> methods;  // estimators in order, then "POT"
};

// Replicates: simulate `years` of the reference model, censor at the sample
// quantile, fit, compute the T-year level of the fitted process from
// sim_years of simulation on the same sampling scheme.
ReturnLevelStudy return_level_study(const ReturnLevelStudyOptions& opts);

struct CurvePoint {
    double level = 0.0;
    double upcrossings_per_year = 0.0;
    double mean_cluster_length = 0.0;  // observations above the level
    double mean_cluster_days = 0.0;
    double mean_gap_length = 0.0;      // observations below the level
    double mean_gap_days = 0.0;
};

std::vector<CurvePoint> extremal_curves(const TimeSeries& series, const std::vector<double>& levels, double years);

struct LongRunOptions {
    ReferenceModelSpec model;
    double years = 1000.0;
    double censor_quantile = 0.95;
    EstimatorSpec estimator = EstimatorSpec::mple();
    std::vector<double> level_quantiles{0.95, 0.96, 0.97, 0.98, 0.99, 0.995, 0.998, 0.999};
    std::uint64_t seed = 1;
    OptimizerConfig optimizer;
    PoissonPointConfig points{6.0, 100'000'000};
};

struct LongRunValidation {
    FitResult fit;
    std::vector<double> levels;
    std::vector<CurvePoint> reference;
    std::vector<CurvePoint> fitted;
};

// Fits the reference model's long record, simulates the fitted process on the
// same time stamps, and compares extremal curves at quantiles of the reference.
LongRunValidation long_run_validation(const LongRunOptions& opts);

}  // namespace censmax
