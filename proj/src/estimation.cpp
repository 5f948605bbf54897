#include "censmax/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "censmax/error.hpp"
#include "censmax/log.hpp"
#include "censmax/simulation.hpp"

namespace censmax {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double quantile_sorted(const std::vector<double>& s, double p) {
    const double h = (static_cast<double>(s.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, s.size() - 1);
    return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

// Optimization coordinates: (mu, log sigma, eta [, log nu]) with
// xi = xi_bound * tanh(eta); eta is dropped when xi is held fixed.
class Coordinates {
public:
    explicit Coordinates(const OptimizerConfig& cfg) : cfg_(cfg) {}

    bool free_xi() const { return !cfg_.fixed_xi.has_value(); }
    std::size_t margin_dims() const { return free_xi() ? 3 : 2; }

    std::vector<double> encode(const GevMargin& m) const {
        std::vector<double> x{m.mu, std::log(m.sigma)};
        if (free_xi()) x.push_back(std::atanh(std::clamp(m.xi / cfg_.xi_bound, -0.999999, 0.999999)));
        return x;
    }

    GevMargin decode(std::span<const double> x) const {
        GevMargin m;
        m.mu = x[0];
        m.sigma = std::exp(x[1]);
        m.xi = free_xi() ? cfg_.xi_bound * std::tanh(x[2]) : *cfg_.fixed_xi;
        return m;
    }

    std::vector<double> margin_steps(const GevMargin& m) const {
        std::vector<double> s{0.25 * m.sigma, 0.25};
        if (free_xi()) s.push_back(0.2);
        return s;
    }

private:
    OptimizerConfig cfg_;
};

SimplexOptions simplex_options(const OptimizerConfig& cfg) {
    return {cfg.max_evals, cfg.ftol, cfg.xtol, cfg.restarts};
}

GevMargin default_start(const CensoredSample& sample, const OptimizerConfig& cfg) {
    std::vector<double> unc;
    for (double v : sample.values) {
        if (v > sample.u) unc.push_back(v);
    }
    std::sort(unc.begin(), unc.end());
    GevMargin m;
    m.mu = quantile_sorted(unc, 0.5);
    // Interquartile range of a Gumbel law is about 1.5725 sigma.
    double spread = (quantile_sorted(unc, 0.75) - quantile_sorted(unc, 0.25)) / 1.5725;
    if (!(spread > 0.0) || !std::isfinite(spread)) spread = std::max(0.1 * std::fabs(m.mu), 1.0);
    m.sigma = spread;
    m.xi = cfg.fixed_xi.value_or(0.1);
    return m;
}

// Pushes the starting margin outward until every observation is in support.
GevMargin feasible_start(GevMargin m, const CensoredSample& sample) {
    for (int k = 0; k < 60; ++k) {
        SmithParams p{m, 1.0, sample.u};
        if (std::isfinite(independent_loglik(p, sample))) return m;
        m.sigma *= 1.5;
        m.mu -= 0.25 * m.sigma;
    }
    throw NumericalError("could not find a feasible starting point for the margin fit");
}

std::string fmt_warning(const char* what, double v) {
    std::ostringstream os;
    os << what << v;
    return os.str();
}

void note(FitResult& r, std::string msg) {
    warn(msg);
    r.warnings.push_back(std::move(msg));
}

void require_uncensored(const CensoredSample& sample, std::size_t needed, const char* who) {
    if (sample.n_uncensored() < needed) {
        std::ostringstream os;
        os << who << ": needs at least " << needed << " uncensored observation(s), got " << sample.n_uncensored();
        throw NonIdentifiableError(os.str());
    }
}

FitResult margin_stage(const CensoredSample& sample, const OptimizerConfig& cfg, std::optional<GevMargin> init) {
    cfg.validate();
    Coordinates coords(cfg);
    GevMargin start = init.value_or(default_start(sample, cfg));
    if (cfg.fixed_xi) start.xi = *cfg.fixed_xi;
    start.validate();
    start = feasible_start(start, sample);

    auto objective = [&](std::span<const double> x) {
        SmithParams p{coords.decode(x), 1.0, sample.u};
        return -independent_loglik(p, sample);
    };
    const SimplexResult r = nelder_mead(objective, coords.encode(start), coords.margin_steps(start), simplex_options(cfg));

    FitResult out;
    out.theta = SmithParams{coords.decode(r.x), kNaN, sample.u};
    out.objective = -r.f;
    out.estimator = EstimatorSpec::mile();
    out.converged = r.converged;
    out.n_evals = r.n_evals;
    out.stages = {out.objective, out.objective, out.objective};
    out.n_obs = sample.size();
    out.n_uncensored = sample.n_uncensored();
    if (!r.converged) note(out, "margin search did not converge within max_evals; returning best point");
    return out;
}

using PairObjective = std::function<double(const SmithParams&)>;

FitResult dependent_fit(const CensoredSample& sample, const EstimatorSpec& spec, const PairObjective& loglik,
                        const OptimizerConfig& cfg) {
    FitResult out = margin_stage(sample, cfg, std::nullopt);
    const double stage1 = out.objective;
    out.estimator = spec;
    const GevMargin margin = out.theta.margin;
    const double lo = std::log(cfg.nu_min), hi = std::log(cfg.nu_max);

    // Stage 2: nu alone with the margin held at its MILE value.
    auto g = [&](double log_nu) { return -loglik(SmithParams{margin, std::exp(log_nu), sample.u}); };
    const ScalarResult s2 = golden_section_min(g, lo, hi, 1e-6, cfg.nu_grid_points);
    out.n_evals += s2.n_evals;
    if (!std::isfinite(s2.f)) throw NumericalError("composite likelihood is not finite at the MILE margin for any nu");
    if (s2.used_grid) note(out, "nu search was not unimodal; used grid fallback");
    const double two_stage = -s2.f;

    // Stage 3: joint search from the two-stage point.
    Coordinates coords(cfg);
    std::vector<double> x0 = coords.encode(margin);
    x0.push_back(s2.x);
    std::vector<double> steps = coords.margin_steps(margin);
    steps.push_back(0.5);
    const std::size_t nu_idx = coords.margin_dims();
    auto objective = [&](std::span<const double> x) {
        if (x[nu_idx] < lo || x[nu_idx] > hi) return kInf;
        return -loglik(SmithParams{coords.decode(x), std::exp(x[nu_idx]), sample.u});
    };
    const SimplexResult r = nelder_mead(objective, x0, steps, simplex_options(cfg));
    out.n_evals += r.n_evals;
    out.converged = out.converged && r.converged;
    if (!r.converged) note(out, "joint search did not converge within max_evals; returning best point");

    out.theta = SmithParams{coords.decode(r.x), std::exp(r.x[nu_idx]), sample.u};
    out.objective = -r.f;

    // The objective is flat in nu once every lag is beyond the independence
    // guard; report the lower bound in that case.
    SmithParams pinned = out.theta;
    pinned.nu = cfg.nu_min;
    const double at_bound = loglik(pinned);
    if (at_bound >= out.objective - 1e-9) {
        out.theta.nu = cfg.nu_min;
        out.objective = at_bound;
        out.nu_at_lower_bound = true;
        note(out, fmt_warning("nu estimate at its lower bound ", cfg.nu_min));
    }
    out.stages = {stage1, two_stage, out.objective};
    return out;
}

}  // namespace

std::string EstimatorSpec::label() const {
    switch (kind) {
    case EstimatorKind::MILE:
        return "MILE";
    case EstimatorKind::MMLE:
        return "MMLE";
    case EstimatorKind::MPLE: {
        std::ostringstream os;
        os << "MPL" << (strategy == PairStrategy::TimeWindow ? "_T" : "") << K << "E";
        return os.str();
    }
    }
    return "?";
}

void OptimizerConfig::validate() const {
    if (max_evals <= 0) throw ConfigError("optimizer: max_evals must be positive");
    if (!(ftol > 0.0) || !(xtol > 0.0)) throw ConfigError("optimizer: tolerances must be positive");
    if (restarts < 0) throw ConfigError("optimizer: restarts must be non-negative");
    if (!(xi_bound > 0.0)) throw ConfigError("optimizer: xi_bound must be positive");
    if (!(nu_min > 0.0 && nu_min < nu_max) || !std::isfinite(nu_max)) {
        throw ConfigError("optimizer: need 0 < nu_min < nu_max");
    }
    if (nu_grid_points < 3) throw ConfigError("optimizer: nu_grid_points must be >= 3");
    if (fixed_xi && !std::isfinite(*fixed_xi)) throw ConfigError("optimizer: fixed xi must be finite");
}

FitResult fit_mile(const CensoredSample& sample, const OptimizerConfig& cfg, std::optional<GevMargin> init) {
    require_uncensored(sample, 1, "MILE");
    return margin_stage(sample, cfg, init);
}

FitResult fit_mple(const CensoredSample& sample, PairStrategy strategy, double K, const OptimizerConfig& cfg) {
    require_uncensored(sample, 2, "MPLE");
    const PairWeightPlan plan = build_pair_plan(sample, strategy, K);
    if (plan.pairs.empty()) throw NonIdentifiableError("MPLE: the pair plan is empty");
    return dependent_fit(
        sample, EstimatorSpec::mple(strategy, K),
        [&](const SmithParams& p) { return pairwise_loglik(p, sample, plan); }, cfg);
}

FitResult fit_mmle(const CensoredSample& sample, const OptimizerConfig& cfg) {
    require_uncensored(sample, 2, "MMLE");
    bool any_pair = false;
    for (auto [b, e] : sample.blocks()) any_pair = any_pair || (e - b >= 2);
    if (!any_pair) throw NonIdentifiableError("MMLE: no block holds two observations");
    return dependent_fit(
        sample, EstimatorSpec::mmle(), [&](const SmithParams& p) { return markov_loglik(p, sample); }, cfg);
}

FitResult fit(const CensoredSample& sample, const EstimatorSpec& spec, const OptimizerConfig& cfg) {
    switch (spec.kind) {
    case EstimatorKind::MILE:
        return fit_mile(sample, cfg);
    case EstimatorKind::MPLE:
        return fit_mple(sample, spec.strategy, spec.K, cfg);
    case EstimatorKind::MMLE:
        return fit_mmle(sample, cfg);
    }
    throw ConfigError("unknown estimator");
}

std::vector<ThresholdFit> threshold_scan(const TimeSeries& series, const std::vector<double>& thresholds,
                                         const EstimatorSpec& spec, const OptimizerConfig& cfg) {
    for (std::size_t i = 1; i < thresholds.size(); ++i) {
        if (!(thresholds[i] > thresholds[i - 1])) throw ConfigError("threshold scan: thresholds must increase");
    }
    std::vector<ThresholdFit> out;
    for (double u : thresholds) {
        const std::size_t n_exc = static_cast<std::size_t>(
            std::count_if(series.values.begin(), series.values.end(), [u](double v) { return v > u; }));
        ThresholdFit tf{u, n_exc, std::nullopt, {}};
        if (n_exc < kMinExceedances) {
            std::ostringstream os;
            os << "threshold " << u << " skipped: " << n_exc << " exceedance(s), need " << kMinExceedances;
            tf.notice = os.str();
            warn(tf.notice);
        } else {
            tf.fit = fit(apply_censoring(series, u), spec, cfg);
        }
        out.push_back(std::move(tf));
    }
    return out;
}

}  // namespace censmax
