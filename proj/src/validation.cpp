#include "censmax/validation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "censmax/error.hpp"
#include "censmax/parallel.hpp"
#include "censmax/rng.hpp"

namespace censmax {
namespace {

constexpr double kDaysPerYear = 365.0;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double normal_quantile(double p) {
    // Bisection on the complementary error function; accurate to ~1e-14.
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (0.5 * std::erfc(-mid / std::sqrt(2.0)) < p) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

BandSummary summarize(std::string method, std::vector<double> values, double band) {
    BandSummary s;
    s.method = std::move(method);
    std::vector<double> ok;
    for (double v : values) {
        if (std::isfinite(v)) ok.push_back(v);
    }
    s.n_ok = ok.size();
    s.n_failed = values.size() - ok.size();
    s.values = std::move(values);
    if (ok.empty()) {
        s.mean = s.lo = s.hi = kNaN;
        return s;
    }
    s.mean = std::accumulate(ok.begin(), ok.end(), 0.0) / static_cast<double>(ok.size());
    const double a = 0.5 * (1.0 - band);
    s.lo = empirical_quantile(ok, a);
    s.hi = empirical_quantile(ok, 1.0 - a);
    return s;
}

}  // namespace

ReferenceModelSpec reference_model(ReferenceModelSpec::Kind kind) {
    using K = ReferenceModelSpec::Kind;
    switch (kind) {
        case K::IID: return {K::IID, 0.0};
        case K::AR1: return {K::AR1, 0.2};
        case K::LogArmax: return {K::LogArmax, 0.2};
        case K::OU: return {K::OU, 0.05};
    }
    return {};
}

ReferenceModelSpec::Kind parse_reference_kind(const std::string& name) {
    using K = ReferenceModelSpec::Kind;
    std::string s = name;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (s == "iid") return K::IID;
    if (s == "ar1") return K::AR1;
    if (s == "logarmax") return K::LogArmax;
    if (s == "ou") return K::OU;
    throw ConfigError("unknown reference model '" + name + "' (expected iid, ar1, logarmax or ou)");
}

std::string reference_label(ReferenceModelSpec::Kind kind) {
    using K = ReferenceModelSpec::Kind;
    switch (kind) {
        case K::IID: return "iid";
        case K::AR1: return "ar1";
        case K::LogArmax: return "logarmax";
        case K::OU: return "ou";
    }
    return "?";
}

SamplingScheme reference_scheme(ReferenceModelSpec::Kind kind, double years) {
    if (kind == ReferenceModelSpec::Kind::OU) return SamplingScheme::uniform_gaps(0.0, 2.0, years * kDaysPerYear);
    return SamplingScheme::regular(1.0, years * kDaysPerYear);
}

std::optional<double> analytic_return_level(const ReferenceModelSpec& spec, double T) {
    using K = ReferenceModelSpec::Kind;
    const double m = T * kDaysPerYear;
    switch (spec.kind) {
        case K::IID:
        case K::AR1: return normal_quantile(1.0 - 1.0 / m);
        case K::LogArmax: return -std::log(-std::log1p(-1.0 / (m * spec.alpha)));
        case K::OU: return std::nullopt;
    }
    return std::nullopt;
}

double simulated_return_level(const ReferenceModelSpec& spec, double T, double years, std::uint64_t seed) {
    const TimeSeries x = simulate_reference(spec, reference_scheme(spec.kind, years), seed);
    return cluster_return_levels(x, years, {T}).front();
}

void ReturnLevelStudyOptions::validate() const {
    model.validate();
    if (!(years > 0.0)) throw ConfigError("validate: years must be positive");
    if (reps == 0) throw ConfigError("validate: reps must be positive");
    if (!(T > 0.0) || !(sim_years >= T)) throw ConfigError("validate: need 0 < T <= sim_years");
    if (!(censor_quantile > 0.0 && censor_quantile < 1.0)) throw ConfigError("validate: censor quantile in (0,1)");
    if (!(band > 0.0 && band < 1.0)) throw ConfigError("validate: band in (0,1)");
    if (estimators.empty() && !pot) throw ConfigError("validate: no method selected");
    optimizer.validate();
}

ReturnLevelStudy return_level_study(const ReturnLevelStudyOptions& opts) {
    opts.validate();
    const SamplingScheme data_scheme = reference_scheme(opts.model.kind, opts.years);
    const SamplingScheme rl_scheme = reference_scheme(opts.model.kind, 1.0);
    const std::size_t n_methods = opts.estimators.size() + (opts.pot ? 1 : 0);

    auto one = [&](std::size_t r) {
        std::vector<double> q(n_methods, kNaN);
        const std::uint64_t seed = derive_seed(opts.seed, {0x7ab1e, r});
        const TimeSeries x = simulate_reference(opts.model, data_scheme, derive_seed(seed, {1}));
        const double u = empirical_quantile(x.values, opts.censor_quantile);
        const CensoredSample sample = apply_censoring(x, u);
        for (std::size_t k = 0; k < opts.estimators.size(); ++k) {
            try {
                const FitResult f = fit(sample, opts.estimators[k], opts.optimizer);
                SmithParams theta = f.theta;
                if (std::isnan(theta.nu)) theta.nu = opts.optimizer.nu_min;
                q[k] = return_level(theta, rl_scheme, opts.T, opts.sim_years, derive_seed(seed, {2, k}),
                                    opts.return_level_options);
            } catch (const Error&) {
                // counted as failed
            }
        }
        if (opts.pot) {
            try {
                const PotFit p = pot_fit(x, u, opts.pot_gap, opts.optimizer);
                const double obs_per_year = static_cast<double>(x.size()) / opts.years;
                q.back() = pot_return_level(p, obs_per_year, opts.T);
            } catch (const Error&) {
            }
        }
        return q;
    };
    const std::size_t threads = opts.threads ? opts.threads : default_thread_count();
    const auto per_rep = parallel_map(opts.reps, one, threads);

    ReturnLevelStudy out;
    out.model = reference_label(opts.model.kind);
    out.true_value = analytic_return_level(opts.model, opts.T);
    for (std::size_t k = 0; k < n_methods; ++k) {
        std::vector<double> v;
        v.reserve(per_rep.size());
        for (const auto& q : per_rep) v.push_back(q[k]);
        const std::string name = k < opts.estimators.size() ? opts.estimators[k].label() : "POT";
        out.methods.push_back(summarize(name, std::move(v), opts.band));
    }
    return out;
}

std::vector<CurvePoint> extremal_curves(const TimeSeries& series, const std::vector<double>& levels, double years) {
    if (!(years > 0.0)) throw ConfigError("curves: years must be positive");
    std::vector<CurvePoint> out;
    out.reserve(levels.size());
    for (double level : levels) {
        const ClusterStats s = cluster_stats(series, level);
        CurvePoint p;
        p.level = level;
        p.upcrossings_per_year = static_cast<double>(s.n_upcrossings) / years;
        p.mean_cluster_length = s.mean_cluster_length;
        p.mean_cluster_days = s.mean_cluster_days;
        p.mean_gap_length = s.mean_gap_length;
        p.mean_gap_days = s.mean_gap_days;
        out.push_back(p);
    }
    return out;
}

LongRunValidation long_run_validation(const LongRunOptions& opts) {
    opts.model.validate();
    if (!(opts.years > 0.0)) throw ConfigError("validate: years must be positive");
    const TimeSeries x =
        simulate_reference(opts.model, reference_scheme(opts.model.kind, opts.years), derive_seed(opts.seed, {1}));
    const double u = empirical_quantile(x.values, opts.censor_quantile);
    LongRunValidation out;
    out.fit = fit(apply_censoring(x, u), opts.estimator, opts.optimizer);
    for (double q : opts.level_quantiles) {
        if (!(q > 0.0 && q < 1.0)) throw ConfigError("validate: level quantiles must lie in (0,1)");
        out.levels.push_back(empirical_quantile(x.values, q));
    }
    const double nu = std::isnan(out.fit.theta.nu) ? opts.optimizer.nu_min : out.fit.theta.nu;
    const TimeSeries sim =
        simulate_smith(x.times, out.fit.theta.margin, nu, derive_seed(opts.seed, {2}), opts.points);
    out.reference = extremal_curves(x, out.levels, opts.years);
    out.fitted = extremal_curves(sim, out.levels, opts.years);
    return out;
}

}  // namespace censmax
