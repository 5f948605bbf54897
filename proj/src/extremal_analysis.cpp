#include "censmax/extremal_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "censmax/error.hpp"
#include "censmax/log.hpp"
#include "censmax/parallel.hpp"
#include "censmax/rng.hpp"

namespace censmax {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Run {
    std::size_t begin;
    std::size_t end;  // exclusive
};

std::vector<Run> runs(const TimeSeries& series, double level, Side side) {
    std::vector<Run> out;
    auto on_side = [&](double v) { return side == Side::Above ? v > level : v <= level; };
    for (auto [b, e] : block_ranges(series.block_ids, series.size())) {
        std::size_t i = b;
        while (i < e) {
            if (!on_side(series.values[i])) {
                ++i;
                continue;
            }
            std::size_t j = i;
            while (j < e && on_side(series.values[j])) ++j;
            out.push_back({i, j});
            i = j;
        }
    }
    return out;
}

}  // namespace

double empirical_quantile(std::span<const double> values, double p) {
    if (values.empty()) throw DataError("empirical quantile of an empty sample");
    std::vector<double> v(values.begin(), values.end());
    const double h = (static_cast<double>(v.size()) - 1.0) * std::clamp(p, 0.0, 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(lo), v.end());
    const double a = v[lo];
    if (lo + 1 >= v.size()) return a;
    const double b = *std::min_element(v.begin() + static_cast<std::ptrdiff_t>(lo) + 1, v.end());
    return a + (h - static_cast<double>(lo)) * (b - a);
}

std::size_t upcrossings(const TimeSeries& series, double level) {
    std::size_t count = 0;
    for (auto [b, e] : block_ranges(series.block_ids, series.size())) {
        for (std::size_t i = b + 1; i < e; ++i) {
            if (series.values[i - 1] <= level && series.values[i] > level) ++count;
        }
    }
    return count;
}

std::vector<RunLength> cluster_lengths(const TimeSeries& series, double level, Side side) {
    std::vector<RunLength> out;
    for (const Run& r : runs(series, level, side)) {
        const double days = series.times.empty() ? 0.0 : series.times[r.end - 1] - series.times[r.begin];
        out.push_back({r.end - r.begin, days});
    }
    return out;
}

std::vector<double> cluster_maxima(const TimeSeries& series, double level) {
    std::vector<double> out;
    for (const Run& r : runs(series, level, Side::Above)) {
        out.push_back(*std::max_element(series.values.begin() + static_cast<std::ptrdiff_t>(r.begin),
                                        series.values.begin() + static_cast<std::ptrdiff_t>(r.end)));
    }
    return out;
}

ClusterStats cluster_stats(const TimeSeries& series, double level) {
    ClusterStats s;
    s.level = level;
    s.n_upcrossings = upcrossings(series, level);
    const auto above = cluster_lengths(series, level, Side::Above);
    const auto below = cluster_lengths(series, level, Side::Below);
    s.n_clusters = above.size();
    auto mean = [](const std::vector<RunLength>& v, auto field) {
        if (v.empty()) return 0.0;
        double acc = 0.0;
        for (const auto& r : v) acc += field(r);
        return acc / static_cast<double>(v.size());
    };
    s.mean_cluster_length = mean(above, [](const RunLength& r) { return static_cast<double>(r.n_obs); });
    s.mean_cluster_days = mean(above, [](const RunLength& r) { return r.days; });
    s.mean_gap_length = mean(below, [](const RunLength& r) { return static_cast<double>(r.n_obs); });
    s.mean_gap_days = mean(below, [](const RunLength& r) { return r.days; });
    return s;
}

std::vector<double> cluster_return_levels(const TimeSeries& series, double years,
                                          const std::vector<double>& return_periods, double base_quantile) {
    if (series.empty()) throw DataError("return level: empty record");
    if (!(years > 0.0)) throw ConfigError("return level: record length must be positive");
    const double base = empirical_quantile(series.values, base_quantile);

    // A run above x starts at observation i exactly when x lies in
    // [previous value, current value), so N(x) is a count of covering intervals.
    std::vector<std::pair<double, int>> events;
    for (auto [b, e] : block_ranges(series.block_ids, series.size())) {
        for (std::size_t i = b; i < e; ++i) {
            const double hi = series.values[i];
            const double lo = (i == b) ? -kInf : series.values[i - 1];
            if (!(hi > base) || !(lo < hi)) continue;
            events.emplace_back(hi, +1);
            if (lo > base) events.emplace_back(lo, -1);
        }
    }
    std::sort(events.begin(), events.end(), [](const auto& x, const auto& y) { return x.first > y.first; });

    std::vector<double> out;
    out.reserve(return_periods.size());
    for (double T : return_periods) {
        if (!(T > 0.0)) throw ConfigError("return level: return period must be positive");
        const auto k = static_cast<long>(std::max(1.0, std::ceil(years / T - 1e-9)));
        long count = 0;
        double level = std::numeric_limits<double>::quiet_NaN();
        for (std::size_t i = 0; i < events.size();) {
            const double v = events[i].first;
            while (i < events.size() && events[i].first == v) count += events[i++].second;
            if (count >= k) {
                level = v;
                break;
            }
        }
        if (std::isnan(level)) {
            std::ostringstream os;
            os << "return level: the record holds fewer than " << k << " clusters above its " << base_quantile
               << " quantile; simulate longer";
            throw InsufficientSimulationError(os.str());
        }
        out.push_back(level);
    }
    return out;
}

TimeSeries simulation_layout(const SamplingScheme& scheme, double years, std::uint64_t seed,
                             const ReturnLevelOptions& opts) {
    scheme.validate();
    if (!(years > 0.0) || !std::isfinite(years)) throw ConfigError("simulation length must be positive");
    if (!(opts.days_per_year > 0.0)) throw ConfigError("days_per_year must be positive");
    TimeSeries layout;
    const auto n_years = static_cast<std::size_t>(std::ceil(years - 1e-9));
    if (opts.independent_years) {
        for (std::size_t y = 0; y < n_years; ++y) {
            const auto t = make_times(scheme, derive_seed(seed, {0x7ea5, y}));
            layout.times.insert(layout.times.end(), t.begin(), t.end());
            layout.block_ids.insert(layout.block_ids.end(), t.size(), static_cast<int>(y));
        }
    } else if (scheme.kind == SamplingScheme::Kind::Explicit) {
        const double span = years * opts.days_per_year;
        for (std::size_t y = 0; y < n_years; ++y) {
            const double shift = static_cast<double>(y) * opts.days_per_year;
            for (double t : scheme.times) {
                if (t < 0.0 || t >= opts.days_per_year) continue;
                if (t + shift < span) layout.times.push_back(t + shift);
            }
        }
    } else {
        SamplingScheme s = scheme;
        s.horizon = years * opts.days_per_year;
        layout.times = make_times(s, derive_seed(seed, {0x7ea5}));
    }
    layout.values.assign(layout.times.size(), 0.0);
    return layout;
}

TimeSeries tile_blocks(const TimeSeries& layout, double years) {
    if (layout.empty()) throw DataError("return level: empty block layout");
    if (!(years > 0.0) || !std::isfinite(years)) throw ConfigError("simulation length must be positive");
    const auto ranges = block_ranges(layout.block_ids, layout.size());
    const auto n_years = static_cast<std::size_t>(std::ceil(years - 1e-9));
    TimeSeries out;
    for (std::size_t y = 0; y < n_years; ++y) {
        const auto [b, e] = ranges[y % ranges.size()];
        out.times.insert(out.times.end(), layout.times.begin() + static_cast<std::ptrdiff_t>(b),
                         layout.times.begin() + static_cast<std::ptrdiff_t>(e));
        out.block_ids.insert(out.block_ids.end(), e - b, static_cast<int>(y));
    }
    out.values.assign(out.times.size(), 0.0);
    return out;
}

std::vector<double> return_levels_on_blocks(const SmithParams& theta, const TimeSeries& layout,
                                            const std::vector<double>& return_periods, double sim_years,
                                            std::uint64_t seed, const PoissonPointConfig& points,
                                            double base_quantile) {
    theta.validate();
    const TimeSeries sim =
        simulate_smith_blocks(tile_blocks(layout, sim_years), theta.margin, theta.nu, derive_seed(seed, {0x5111}), points);
    return cluster_return_levels(sim, sim_years, return_periods, base_quantile);
}

std::vector<double> return_levels(const SmithParams& theta, const SamplingScheme& scheme,
                                  const std::vector<double>& return_periods, double sim_years, std::uint64_t seed,
                                  const ReturnLevelOptions& opts) {
    theta.validate();
    const TimeSeries layout = simulation_layout(scheme, sim_years, seed, opts);
    const TimeSeries sim =
        simulate_smith_blocks(layout, theta.margin, theta.nu, derive_seed(seed, {0x5111}), opts.points);
    return cluster_return_levels(sim, sim_years, return_periods, opts.base_quantile);
}

double return_level(const SmithParams& theta, const SamplingScheme& scheme, double T_years, double sim_years,
                    std::uint64_t seed, const ReturnLevelOptions& opts) {
    return return_levels(theta, scheme, {T_years}, sim_years, seed, opts).front();
}

// ---------------------------------------------------------------------------

namespace {

struct Replicate {
    bool ok = false;
    std::vector<double> theta;
    std::vector<double> derived;
};

std::pair<double, double> percentile_interval(std::vector<double> v, double level) {
    const double a = 0.5 * (1.0 - level);
    return {empirical_quantile(v, a), empirical_quantile(v, 1.0 - a)};
}

}  // namespace

BootstrapDistribution parametric_bootstrap(const FitResult& fit, const TimeSeries& layout,
                                           const BootstrapOptions& opts) {
    if (opts.B == 0) throw ConfigError("bootstrap: B must be positive");
    if (!(opts.level > 0.0 && opts.level < 1.0)) throw ConfigError("bootstrap: level must lie in (0,1)");
    if (layout.times.empty()) throw DataError("bootstrap: empty sampling layout");
    const bool dependent = fit.estimator.kind != EstimatorKind::MILE;
    const bool want_derived = dependent && !opts.return_periods.empty();
    if (dependent) fit.theta.validate();
    if (!fit.converged) warn("bootstrap: the original fit did not converge");

    OptimizerConfig cfg = opts.optimizer;
    if (opts.fix_xi) cfg.fixed_xi = fit.theta.margin.xi;
    const double nu_sim = dependent ? fit.theta.nu : cfg.nu_min;

    auto derived_levels = [&](const SmithParams& t, std::uint64_t seed) {
        if (opts.return_level_blocks) {
            return return_levels_on_blocks(t, *opts.return_level_blocks, opts.return_periods, opts.sim_years, seed,
                                           opts.return_level_options.points, opts.return_level_options.base_quantile);
        }
        return return_levels(t, opts.return_level_scheme, opts.return_periods, opts.sim_years, seed,
                             opts.return_level_options);
    };
    auto replicate = [&](std::size_t r) {
        Replicate out;
        const std::uint64_t seed = derive_seed(opts.seed, {0xb007, r});
        try {
            ThreadWarningSink quiet(nullptr);
            const TimeSeries sim = simulate_smith_blocks(layout, fit.theta.margin, nu_sim, derive_seed(seed, {1}));
            const FitResult refit = censmax::fit(apply_censoring(sim, fit.theta.u), fit.estimator, cfg);
            if (!refit.converged) return out;
            const SmithParams& t = refit.theta;
            out.theta = {t.margin.mu, t.margin.sigma, t.margin.xi, t.nu};
            if (want_derived) {
                out.derived = derived_levels(t, derive_seed(seed, {2}));
            }
            out.ok = true;
        } catch (const Error&) {
            out.ok = false;
        }
        return out;
    };
    const std::size_t threads = opts.threads ? opts.threads : default_thread_count();
    const std::vector<Replicate> reps = parallel_map(opts.B, replicate, threads);

    BootstrapDistribution d;
    d.B = opts.B;
    d.xi_fixed = opts.fix_xi;
    if (want_derived) {
        for (double T : opts.return_periods) {
            std::ostringstream os;
            os << 'q' << T;
            d.derived_names.push_back(os.str());
        }
        d.derived_samples.assign(opts.return_periods.size(), {});
    }
    for (const Replicate& r : reps) {
        if (!r.ok) {
            ++d.n_dropped;
            continue;
        }
        d.theta_samples.push_back(r.theta);
        for (std::size_t q = 0; q < r.derived.size(); ++q) d.derived_samples[q].push_back(r.derived[q]);
    }
    d.n_used = d.theta_samples.size();
    d.unreliable = static_cast<double>(d.n_dropped) > 0.1 * static_cast<double>(d.B);
    if (d.unreliable) {
        std::ostringstream os;
        os << "bootstrap unreliable: " << d.n_dropped << " of " << d.B << " replicates dropped";
        warn(os.str());
    }
    if (d.n_used == 0) throw NumericalError("bootstrap: every replicate failed");

    const char* names[] = {"mu", "sigma", "xi", "nu"};
    const double points[] = {fit.theta.margin.mu, fit.theta.margin.sigma, fit.theta.margin.xi, fit.theta.nu};
    const std::size_t n_par = dependent ? 4 : 3;
    for (std::size_t k = 0; k < n_par; ++k) {
        std::vector<double> col;
        col.reserve(d.n_used);
        for (const auto& t : d.theta_samples) col.push_back(t[k]);
        const auto [lo, hi] = percentile_interval(std::move(col), opts.level);
        d.intervals.push_back({names[k], points[k], lo, hi});
    }
    if (want_derived) {
        const std::vector<double> point = derived_levels(fit.theta, derive_seed(opts.seed, {0xfeed}));
        for (std::size_t q = 0; q < point.size(); ++q) {
            const auto [lo, hi] = percentile_interval(d.derived_samples[q], opts.level);
            d.intervals.push_back({d.derived_names[q], point[q], lo, hi});
        }
    }
    return d;
}

// ---------------------------------------------------------------------------

PotFit pot_fit(const TimeSeries& series, double u, std::size_t r_gap, const OptimizerConfig& cfg) {
    if (series.empty()) throw DataError("POT: empty series");
    PotFit out;
    out.u = u;
    out.r_gap = r_gap;
    out.n_obs = series.size();

    std::vector<double> maxima;
    for (auto [b, e] : block_ranges(series.block_ids, series.size())) {
        bool open = false;
        std::size_t below = 0;
        double current = -kInf;
        for (std::size_t i = b; i < e; ++i) {
            const double v = series.values[i];
            if (v > u) {
                if (open && r_gap == 0) {
                    maxima.push_back(current);
                    current = -kInf;
                }
                open = true;
                below = 0;
                current = std::max(current, v);
            } else if (open && ++below >= r_gap) {
                maxima.push_back(current);
                open = false;
                current = -kInf;
            }
        }
        if (open) maxima.push_back(current);
    }
    out.n_exceed = static_cast<std::size_t>(
        std::count_if(series.values.begin(), series.values.end(), [u](double v) { return v > u; }));
    out.n_below = out.n_obs - out.n_exceed;
    out.lambda = static_cast<double>(out.n_below) / static_cast<double>(out.n_obs);
    out.n_clusters = maxima.size();
    if (out.n_clusters < kMinExceedances) {
        std::ostringstream os;
        os << "POT: " << out.n_clusters << " cluster maxima above " << u << ", need " << kMinExceedances;
        throw DataError(os.str());
    }

    double mean_excess = 0.0;
    for (double m : maxima) mean_excess += (m - u) / static_cast<double>(maxima.size());
    auto objective = [&](std::span<const double> x) {
        GpdMargin g{u, std::exp(x[0]), x[1]};
        if (g.xi <= -1.0) return kInf;
        double ll = 0.0;
        for (double m : maxima) ll += gpd_logpdf(m, g);
        return -ll;
    };
    const SimplexResult r = nelder_mead(objective, {std::log(std::max(mean_excess, 1e-8)), 0.0}, {0.25, 0.1},
                                        {cfg.max_evals, cfg.ftol, cfg.xtol, cfg.restarts});
    out.gpd = GpdMargin{u, std::exp(r.x[0]), r.x[1]};
    out.loglik = -r.f;
    out.converged = r.converged;
    return out;
}

double pot_return_level(const PotFit& fit, double obs_per_year, double T) {
    if (!(obs_per_year > 0.0) || !(T > 0.0)) throw ConfigError("POT return level: need positive rate and period");
    // Expected clusters above u in T years.
    const double m = T * obs_per_year * static_cast<double>(fit.n_clusters) / static_cast<double>(fit.n_obs);
    if (m <= 1.0) return fit.u;
    return gpd_quantile(1.0 - 1.0 / m, fit.gpd);
}

// ---------------------------------------------------------------------------

std::vector<QQPoint> qq_data(std::span<const double> a, std::span<const double> b, std::size_t n_points) {
    if (a.empty() || b.empty() || n_points == 0) throw DataError("qq_data: empty input");
    std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    auto q = [](const std::vector<double>& s, double p) {
        const double h = (static_cast<double>(s.size()) - 1.0) * p;
        const auto lo = static_cast<std::size_t>(std::floor(h));
        const std::size_t hi = std::min(lo + 1, s.size() - 1);
        return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
    };
    std::vector<QQPoint> out;
    for (std::size_t k = 1; k <= n_points; ++k) {
        const double p = static_cast<double>(k) / static_cast<double>(n_points + 1);
        out.push_back({p, q(sa, p), q(sb, p)});
    }
    return out;
}

std::vector<QQPoint> qq_data(std::span<const double> a, const GevMargin& model, std::size_t n_points) {
    std::vector<QQPoint> out = qq_data(a, a, n_points);
    for (QQPoint& q : out) q.b = gev_quantile(q.p, model);
    return out;
}

}  // namespace censmax
