#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>

#include <CLI11.hpp>

#include "censmax/error.hpp"
#include "censmax/extremal_analysis.hpp"
#include "censmax/log.hpp"
#include "censmax/parallel.hpp"
#include "censmax/rng.hpp"
#include "censmax/simulation.hpp"
#include "censmax/validation.hpp"

#ifndef CENSMAX_VERSION
#define CENSMAX_VERSION "dev"
#endif

namespace censmax::cli {
namespace {

std::uint64_t seed_of(const json& cfg) { return cfg["seed"].get<std::uint64_t>(); }

std::size_t threads_of(const json& cfg) {
    return cfg.contains("threads") ? cfg["threads"].get<std::size_t>() : default_thread_count();
}

std::vector<double> periods_of(const json& cfg) { return cfg["return_periods"].get<std::vector<double>>(); }

std::string period_name(double T) {
    std::ostringstream os;
    os << 'q' << T;
    return os.str();
}

// NaN and infinities become null.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string two_decimals(double v) {
    if (!std::isfinite(v)) return "NA";
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << v;
    return os.str();
}

// "point (lo, hi)" as in published tables.
std::string formatted(double point, double lo, double hi) {
    return two_decimals(point) + " (" + two_decimals(lo) + ", " + two_decimals(hi) + ")";
}

json theta_json(const SmithParams& t) {
    return {{"mu", num(t.margin.mu)}, {"sigma", num(t.margin.sigma)}, {"xi", num(t.margin.xi)},
            {"nu", num(t.nu)}, {"u", num(t.u)}};
}

json fit_json(const FitResult& f) {
    return {{"estimator", f.estimator.label()},
            {"theta", theta_json(f.theta)},
            {"objective", num(f.objective)},
            {"converged", f.converged},
            {"n_evals", f.n_evals},
            {"nu_at_lower_bound", f.nu_at_lower_bound},
            {"n_obs", f.n_obs},
            {"n_uncensored", f.n_uncensored},
            {"stages", {{"independent", num(f.stages.stage1)},
                        {"two_stage", num(f.stages.two_stage)},
                        {"full", num(f.stages.full)}}}};
}

class CsvFile {
public:
    explicit CsvFile(const std::string& path) : path_(path), out_(path) {
        if (!out_) throw DataError("cannot write '" + path + "'");
        out_ << std::setprecision(17);
    }
    template <class... Ts>
    void row(const Ts&... cells) {
        std::size_t i = 0;
        ((out_ << (i++ ? "," : "") << cells), ...);
        out_ << '\n';
    }
    std::ostream& stream() { return out_; }

private:
    std::string path_;
    std::ofstream out_;
};

bool wants(const json& cfg, const char* key) { return cfg.contains(key) && cfg[key].is_string(); }

json data_summary(const PreparedData& d, double u) {
    std::size_t above = 0;
    for (double v : d.series.values) above += v > u ? 1 : 0;
    return {{"n_records", d.records.size()},
            {"n_obs", d.series.size()},
            {"n_blocks", d.blocked ? block_ranges(d.series.block_ids, d.series.size()).size() : 1},
            {"years", num(d.years)},
            {"threshold", num(u)},
            {"n_above_threshold", above}};
}

json threshold_json(const json& cfg) {
    if (!cfg["threshold"].is_null()) return {{"mode", "absolute"}, {"value", cfg["threshold"]}};
    return {{"mode", "quantile"}, {"level", cfg["threshold_quantile"]}};
}

// ---------------------------------------------------------------------------

json cmd_fit(const json& cfg) {
    const PreparedData data = load_data(cfg);
    const double u = resolve_threshold(cfg, data.series);
    const EstimatorSpec spec = estimator_from(cfg);
    const OptimizerConfig opt = optimizer_from(cfg);
    const FitResult f = fit(apply_censoring(data.series, u), spec, opt);

    json r = {{"data", data_summary(data, u)}, {"threshold", threshold_json(cfg)}, {"fit", fit_json(f)}};
    const auto periods = periods_of(cfg);
    if (!periods.empty() && spec.kind != EstimatorKind::MILE) {
        const auto q = return_levels_on_blocks(f.theta, year_layout(data), periods, cfg["sim_years"].get<double>(),
                                               derive_seed(seed_of(cfg), {0x71}));
        json levels = json::object();
        for (std::size_t k = 0; k < periods.size(); ++k) levels[period_name(periods[k])] = num(q[k]);
        r["return_levels"] = levels;
    }

    if (cfg.contains("scan_quantiles")) {
        std::vector<double> thresholds;
        for (double p : cfg["scan_quantiles"].get<std::vector<double>>()) {
            thresholds.push_back(empirical_quantile(data.series.values, p));
        }
        const auto scan = threshold_scan(data.series, thresholds, spec, opt);
        json rows = json::array();
        for (const ThresholdFit& s : scan) {
            json row = {{"u", num(s.u)}, {"n_exceedances", s.n_exceedances}};
            if (s.fit) {
                row["theta"] = theta_json(s.fit->theta);
                row["objective"] = num(s.fit->objective);
            } else {
                row["notice"] = s.notice;
            }
            rows.push_back(row);
        }
        r["threshold_scan"] = rows;
        if (wants(cfg, "scan_csv")) {
            CsvFile csv(cfg["scan_csv"].get<std::string>());
            csv.row("u", "n_exceedances", "mu", "sigma", "xi", "nu", "objective");
            for (const ThresholdFit& s : scan) {
                if (s.fit) {
                    const auto& t = s.fit->theta;
                    csv.row(s.u, s.n_exceedances, t.margin.mu, t.margin.sigma, t.margin.xi, t.nu, s.fit->objective);
                } else {
                    csv.row(s.u, s.n_exceedances, "", "", "", "", "");
                }
            }
        }
    }

    if (wants(cfg, "qq_csv")) {
        // Observed values above u against values above u of the fitted
        // process simulated on the same time stamps.
        const double nu = std::isnan(f.theta.nu) ? opt.nu_min : f.theta.nu;
        const TimeSeries sim =
            simulate_smith_blocks(data.series, f.theta.margin, nu, derive_seed(seed_of(cfg), {0x99}));
        std::vector<double> a, b;
        for (double v : data.series.values) if (v > u) a.push_back(v);
        for (double v : sim.values) if (v > u) b.push_back(v);
        if (a.empty() || b.empty()) throw DataError("QQ data: no values above the threshold");
        const auto qq = qq_data(a, b, cfg["qq_points"].get<std::size_t>());
        CsvFile csv(cfg["qq_csv"].get<std::string>());
        csv.row("p", "observed", "fitted");
        for (const QQPoint& p : qq) csv.row(p.p, p.a, p.b);
        r["qq_points_written"] = qq.size();
    }
    return r;
}

SamplingScheme scheme_from(const json& cfg, double horizon) {
    if (cfg["sampling"] == "uniform") {
        return SamplingScheme::uniform_gaps(cfg["gap_lo"].get<double>(), cfg["gap_hi"].get<double>(), horizon);
    }
    return SamplingScheme::regular(cfg["step"].get<double>(), horizon);
}

GevMargin margin_from(const json& cfg) {
    GevMargin m{cfg["mu"].get<double>(), cfg["sigma"].get<double>(), cfg["xi"].get<double>()};
    m.validate();
    return m;
}

json cmd_simulate(const json& cfg) {
    const double years = cfg["years"].get<double>();
    const SamplingScheme scheme = scheme_from(cfg, years * 365.0);
    const std::uint64_t seed = seed_of(cfg);
    TimeSeries x;
    json model;
    if (cfg["model"] == "smith") {
        const GevMargin m = margin_from(cfg);
        const double nu = cfg["nu"].get<double>();
        x = simulate_smith(make_times(scheme, derive_seed(seed, {1})), m, nu, derive_seed(seed, {2}));
        model = {{"kind", "smith"}, {"mu", m.mu}, {"sigma", m.sigma}, {"xi", m.xi}, {"nu", nu}};
    } else {
        ReferenceModelSpec spec = reference_model(parse_reference_kind(cfg["model"].get<std::string>()));
        if (!cfg["alpha"].is_null()) spec.alpha = cfg["alpha"].get<double>();
        x = simulate_reference(spec, scheme, derive_seed(seed, {3}));
        model = {{"kind", cfg["model"]}, {"alpha", spec.kind == ReferenceModelSpec::Kind::IID ? json(nullptr)
                                                                                                : json(spec.alpha)}};
    }
    json r = {{"model", model}, {"n_obs", x.size()}};
    if (!x.empty()) {
        r["summary"] = {{"min", num(*std::min_element(x.values.begin(), x.values.end()))},
                        {"max", num(*std::max_element(x.values.begin(), x.values.end()))},
                        {"q95", num(empirical_quantile(x.values, 0.95))}};
    }
    if (wants(cfg, "series_csv")) {
        std::ofstream f(cfg["series_csv"].get<std::string>());
        if (!f) throw DataError("cannot write '" + cfg["series_csv"].get<std::string>() + "'");
        write_series_csv(f, x);
    } else {
        r["times"] = x.times;
        r["values"] = x.values;
    }
    return r;
}

json cmd_return_level(const json& cfg) {
    SmithParams theta;
    theta.margin = margin_from(cfg);
    theta.nu = cfg["nu"].get<double>();
    const auto periods = periods_of(cfg);
    if (periods.empty()) throw ConfigError("config key 'return_periods': at least one period required");
    const auto q = return_levels(theta, scheme_from(cfg, 365.0), periods, cfg["sim_years"].get<double>(),
                                 derive_seed(seed_of(cfg), {0x72}));
    json levels = json::object();
    for (std::size_t k = 0; k < periods.size(); ++k) levels[period_name(periods[k])] = num(q[k]);
    return {{"theta", theta_json(theta)}, {"return_levels", levels}};
}

json cmd_bootstrap(const json& cfg) {
    const PreparedData data = load_data(cfg);
    const double u = resolve_threshold(cfg, data.series);
    const EstimatorSpec spec = estimator_from(cfg);
    const OptimizerConfig opt = optimizer_from(cfg);
    const FitResult f = fit(apply_censoring(data.series, u), spec, opt);

    BootstrapOptions bo;
    bo.B = cfg["B"].get<std::size_t>();
    bo.seed = derive_seed(seed_of(cfg), {0xb0});
    bo.return_periods = periods_of(cfg);
    bo.return_level_blocks = year_layout(data);
    bo.sim_years = cfg["sim_years"].get<double>();
    bo.optimizer = opt;
    bo.level = cfg["level"].get<double>();
    bo.threads = threads_of(cfg);

    const std::string mode = cfg["xi_mode"];
    std::vector<bool> fixed_modes;
    if (mode != "fixed") fixed_modes.push_back(false);
    if (mode != "free") fixed_modes.push_back(true);

    json runs = json::array();
    std::unique_ptr<CsvFile> csv;
    if (wants(cfg, "samples_csv")) csv = std::make_unique<CsvFile>(cfg["samples_csv"].get<std::string>());
    bool header = false;
    for (bool fixed : fixed_modes) {
        bo.fix_xi = fixed;
        const BootstrapDistribution d = parametric_bootstrap(f, data.series, bo);
        json table = json::array();
        for (const Interval& iv : d.intervals) {
            table.push_back({{"name", iv.name}, {"point", num(iv.point)}, {"lo", num(iv.lo)}, {"hi", num(iv.hi)},
                             {"formatted", formatted(iv.point, iv.lo, iv.hi)}});
        }
        runs.push_back({{"xi_mode", fixed ? "fixed" : "free"},
                        {"B", d.B},
                        {"n_used", d.n_used},
                        {"n_dropped", d.n_dropped},
                        {"unreliable", d.unreliable},
                        {"level", bo.level},
                        {"table", table}});
        if (csv) {
            if (!header) {
                auto& s = csv->stream();
                s << "xi_mode,replicate,mu,sigma,xi,nu";
                for (const auto& n : d.derived_names) s << ',' << n;
                s << '\n';
                header = true;
            }
            for (std::size_t i = 0; i < d.theta_samples.size(); ++i) {
                auto& s = csv->stream();
                s << (fixed ? "fixed" : "free") << ',' << i;
                for (double v : d.theta_samples[i]) s << ',' << v;
                for (const auto& col : d.derived_samples) s << ',' << col[i];
                s << '\n';
            }
        }
    }
    std::size_t n_exceed = 0;
    for (double v : data.series.values) n_exceed += v > u ? 1 : 0;
    return {{"data", data_summary(data, u)},
            {"threshold", threshold_json(cfg)},
            {"u", num(u)},
            {"n_obs_above_u", n_exceed},
            {"fit", fit_json(f)},
            {"bootstrap", runs}};
}

json band_json(const BandSummary& b) {
    return {{"method", b.method}, {"mean", num(b.mean)},   {"lo", num(b.lo)},
            {"hi", num(b.hi)},    {"n_ok", b.n_ok},        {"n_failed", b.n_failed},
            {"formatted", formatted(b.mean, b.lo, b.hi)}};
}

json cmd_validate(const json& cfg) {
    ReturnLevelStudyOptions o;
    o.model = reference_model(parse_reference_kind(cfg["model"].get<std::string>()));
    if (!cfg["alpha"].is_null()) o.model.alpha = cfg["alpha"].get<double>();
    o.years = cfg["years"].get<double>();
    o.reps = cfg["reps"].get<std::size_t>();
    o.T = cfg["T"].get<double>();
    o.sim_years = cfg["sim_years"].get<double>();
    o.estimators.clear();
    for (const auto& e : cfg["estimators"]) o.estimators.push_back(parse_estimator_name(e.get<std::string>()));
    o.pot = cfg["pot"].get<bool>();
    o.pot_gap = cfg["r_gap"].get<std::size_t>();
    o.band = cfg["band"].get<double>();
    o.seed = derive_seed(seed_of(cfg), {0x7a});
    o.optimizer = optimizer_from(cfg);
    o.threads = threads_of(cfg);

    const ReturnLevelStudy study = return_level_study(o);
    json rows = json::array();
    for (const BandSummary& b : study.methods) rows.push_back(band_json(b));
    json r = {{"model", study.model},
              {"alpha", o.model.kind == ReferenceModelSpec::Kind::IID ? json(nullptr) : json(o.model.alpha)},
              {"years", o.years},
              {"reps", o.reps},
              {"T", o.T},
              {"band", o.band},
              {"true_value", study.true_value ? json(*study.true_value) : json(nullptr)},
              {"methods", rows}};

    if (cfg["long_run"].get<bool>()) {
        LongRunOptions lo;
        lo.model = o.model;
        lo.years = cfg["long_run_years"].get<double>();
        lo.seed = derive_seed(seed_of(cfg), {0x7b});
        lo.optimizer = o.optimizer;
        const LongRunValidation v = long_run_validation(lo);
        json curves = json::array();
        for (std::size_t i = 0; i < v.levels.size(); ++i) {
            const CurvePoint& a = v.reference[i];
            const CurvePoint& b = v.fitted[i];
            curves.push_back({{"level", num(v.levels[i])},
                              {"reference", {{"upcrossings_per_year", num(a.upcrossings_per_year)},
                                             {"mean_cluster_length", num(a.mean_cluster_length)},
                                             {"mean_gap_days", num(a.mean_gap_days)}}},
                              {"fitted", {{"upcrossings_per_year", num(b.upcrossings_per_year)},
                                          {"mean_cluster_length", num(b.mean_cluster_length)},
                                          {"mean_gap_days", num(b.mean_gap_days)}}}});
        }
        r["long_run"] = {{"fit", fit_json(v.fit)}, {"years", lo.years}, {"curves", curves}};
        if (wants(cfg, "curves_csv")) {
            CsvFile csv(cfg["curves_csv"].get<std::string>());
            csv.row("level", "source", "upcrossings_per_year", "mean_cluster_length", "mean_cluster_days",
                    "mean_gap_length", "mean_gap_days");
            for (std::size_t i = 0; i < v.levels.size(); ++i) {
                for (const auto& [name, c] : {std::pair{"reference", v.reference[i]}, std::pair{"fitted", v.fitted[i]}}) {
                    csv.row(v.levels[i], name, c.upcrossings_per_year, c.mean_cluster_length, c.mean_cluster_days,
                            c.mean_gap_length, c.mean_gap_days);
                }
            }
        }
    }
    return r;
}

json cmd_pot(const json& cfg) {
    const PreparedData data = load_data(cfg);
    const double u = resolve_threshold(cfg, data.series);
    OptimizerConfig opt = optimizer_from(cfg);
    const PotFit p = pot_fit(data.series, u, cfg["r_gap"].get<std::size_t>(), opt);
    const double obs_per_year = cfg["obs_per_year"].is_null() ? static_cast<double>(data.series.size()) / data.years
                                                              : cfg["obs_per_year"].get<double>();
    json levels = json::object();
    for (double T : periods_of(cfg)) levels[period_name(T)] = num(pot_return_level(p, obs_per_year, T));
    return {{"data", data_summary(data, u)},
            {"threshold", threshold_json(cfg)},
            {"pot", {{"u", num(p.u)},
                     {"lambda", num(p.lambda)},
                     {"gpd", {{"sigma", num(p.gpd.sigma)}, {"xi", num(p.gpd.xi)}}},
                     {"r_gap", p.r_gap},
                     {"n_clusters", p.n_clusters},
                     {"n_obs", p.n_obs},
                     {"n_below", p.n_below},
                     {"n_exceed", p.n_exceed},
                     {"loglik", num(p.loglik)},
                     {"converged", p.converged}}},
            {"obs_per_year", num(obs_per_year)},
            {"return_levels", levels}};
}

json cmd_grid(const json& cfg) {
    const std::vector<RawRecord> records = read_timeseries(cfg["input"].get<std::string>()).records;
    const json& g = cfg["grid"];
    const double step = g["step"].get<double>();
    std::vector<std::pair<double, double>> cells;
    const auto n_lat = static_cast<long>(std::floor((g["lat_max"].get<double>() - g["lat_min"].get<double>()) / step + 1e-9));
    const auto n_lon = static_cast<long>(std::floor((g["lon_max"].get<double>() - g["lon_min"].get<double>()) / step + 1e-9));
    for (long i = 0; i <= n_lat; ++i) {
        for (long j = 0; j <= n_lon; ++j) {
            cells.emplace_back(g["lat_min"].get<double>() + static_cast<double>(i) * step,
                               g["lon_min"].get<double>() + static_cast<double>(j) * step);
        }
    }
    const EstimatorSpec spec = estimator_from(cfg);
    const OptimizerConfig opt = optimizer_from(cfg);
    const auto periods = periods_of(cfg);

    auto one = [&](std::size_t c) {
        std::vector<std::string> notices;
        ThreadWarningSink sink([&](std::string_view m) { notices.emplace_back(m); });
        json cell_cfg = cfg;
        cell_cfg["window"]["lat"] = cells[c].first;
        cell_cfg["window"]["lon"] = cells[c].second;
        json row = {{"lat", cells[c].first}, {"lon", cells[c].second}};
        try {
            const PreparedData data = prepare_records(records, cell_cfg);
            const double u = resolve_threshold(cell_cfg, data.series);
            const FitResult f = fit(apply_censoring(data.series, u), spec, opt);
            row["n_obs"] = data.series.size();
            row["n_uncensored"] = f.n_uncensored;
            row["theta"] = theta_json(f.theta);
            row["converged"] = f.converged;
            if (spec.kind != EstimatorKind::MILE && !periods.empty()) {
                const auto q = return_levels_on_blocks(f.theta, year_layout(data), periods,
                                                       cfg["sim_years"].get<double>(),
                                                       derive_seed(seed_of(cfg), {0x9d, c}));
                json levels = json::object();
                for (std::size_t k = 0; k < periods.size(); ++k) levels[period_name(periods[k])] = num(q[k]);
                row["return_levels"] = levels;
            }
        } catch (const Error& e) {
            row["error"] = e.what();
        }
        if (!notices.empty()) row["notices"] = notices;
        return row;
    };
    const std::vector<json> rows = parallel_map(cells.size(), one, threads_of(cfg));

    if (wants(cfg, "grid_csv")) {
        CsvFile csv(cfg["grid_csv"].get<std::string>());
        auto& s = csv.stream();
        s << "lat,lon,n_obs,u,mu,sigma,xi,nu";
        for (double T : periods) s << ',' << period_name(T);
        s << '\n';
        auto cellv = [](const json& j, const char* k) {
            return j.contains(k) && j[k].is_number() ? j[k].get<double>() : std::nan("");
        };
        for (const json& row : rows) {
            s << row["lat"].get<double>() << ',' << row["lon"].get<double>() << ','
              << (row.contains("n_obs") ? row["n_obs"].get<double>() : 0.0);
            const json th = row.contains("theta") ? row["theta"] : json::object();
            for (const char* k : {"u", "mu", "sigma", "xi", "nu"}) s << ',' << cellv(th, k);
            const json q = row.contains("return_levels") ? row["return_levels"] : json::object();
            for (double T : periods) s << ',' << cellv(q, period_name(T).c_str());
            s << '\n';
        }
    }
    std::size_t n_failed = 0;
    for (const json& r : rows) n_failed += r.contains("error") ? 1 : 0;
    return {{"n_cells", rows.size()}, {"n_failed", n_failed}, {"cells", rows}};
}

// ---------------------------------------------------------------------------

std::string now_iso() {
    using namespace std::chrono;
    const auto secs = duration_cast<seconds>(system_clock::now().time_since_epoch()).count();
    return format_iso_time(static_cast<double>(secs) / 86400.0);
}

json versions() {
    return {{"censmax", CENSMAX_VERSION},
            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
            {"cli11", CLI11_VERSION}};
}

struct Failure {
    int code;
    const char* type;
};

Failure classify(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return {2, "config_error"};
    if (dynamic_cast<const CLI::ParseError*>(&e)) return {2, "config_error"};
    if (dynamic_cast<const json::exception*>(&e)) return {2, "config_error"};
    if (dynamic_cast<const DataError*>(&e)) return {3, "data_error"};
    if (dynamic_cast<const CensoringError*>(&e)) return {3, "data_error"};
    if (dynamic_cast<const NumericalError*>(&e)) return {4, "numerical_error"};
    if (dynamic_cast<const DomainError*>(&e)) return {4, "numerical_error"};
    return {1, "internal_error"};
}

std::string flag_name(const std::string& key) {
    std::string s = "--" + key;
    for (char& c : s) {
        if (c == '_' || c == '.') c = '-';
    }
    return s;
}

// Sets cfg[path] where path may be "object.key".
void put(json& cfg, const std::string& key, json value) {
    const auto dot = key.find('.');
    if (dot == std::string::npos) cfg[key] = std::move(value);
    else cfg[key.substr(0, dot)][key.substr(dot + 1)] = std::move(value);
}

struct FlagSpec {
    const char* key;
    enum { Num, Int, UInt, Str, NumList, StrList, NumOrNull, Bool } kind;
    const char* help;
};

const std::vector<FlagSpec>& flag_specs() {
    static const std::vector<FlagSpec> f{
        {"input", FlagSpec::Str, "CSV file with header time,value[,lat,lon]"},
        {"output", FlagSpec::Str, "result JSON path ('-' for stdout)"},
        {"seed", FlagSpec::UInt, "master seed"},
        {"threads", FlagSpec::UInt, "worker threads"},
        {"threshold", FlagSpec::NumOrNull, "absolute censoring threshold"},
        {"threshold_quantile", FlagSpec::NumOrNull, "censoring threshold as a sample quantile level"},
        {"estimator", FlagSpec::Str, "mile, mple or mmle"},
        {"strategy", FlagSpec::Str, "pair window: index or time"},
        {"K", FlagSpec::Num, "pair window size"},
        {"month", FlagSpec::NumOrNull, "keep one calendar month (1-12), one block per year"},
        {"window.lat", FlagSpec::Num, "window centre latitude"},
        {"window.lon", FlagSpec::Num, "window centre longitude"},
        {"window.half_width", FlagSpec::Num, "window half width in degrees"},
        {"window.track_gap_minutes", FlagSpec::Num, "time gap separating tracks"},
        {"fix_xi", FlagSpec::NumOrNull, "hold xi at this value ('null' to estimate)"},
        {"return_periods", FlagSpec::NumList, "return periods in years"},
        {"sim_years", FlagSpec::Num, "simulated years for return levels"},
        {"scan_quantiles", FlagSpec::NumList, "threshold scan quantile levels"},
        {"scan_csv", FlagSpec::Str, "threshold scan CSV output"},
        {"qq_csv", FlagSpec::Str, "QQ CSV output"},
        {"qq_points", FlagSpec::UInt, "QQ probability levels"},
        {"max_evals", FlagSpec::Int, "objective evaluations per simplex search"},
        {"model", FlagSpec::Str, "smith, iid, ar1, logarmax or ou"},
        {"mu", FlagSpec::Num, "GEV location"},
        {"sigma", FlagSpec::Num, "GEV scale"},
        {"xi", FlagSpec::Num, "GEV shape"},
        {"nu", FlagSpec::Num, "dependence range in days"},
        {"alpha", FlagSpec::NumOrNull, "reference model dependence"},
        {"sampling", FlagSpec::Str, "regular or uniform"},
        {"step", FlagSpec::Num, "regular sampling step in days"},
        {"gap_lo", FlagSpec::Num, "uniform gap lower bound"},
        {"gap_hi", FlagSpec::Num, "uniform gap upper bound"},
        {"years", FlagSpec::Num, "record length in years"},
        {"series_csv", FlagSpec::Str, "simulated series CSV output"},
        {"B", FlagSpec::UInt, "bootstrap replicates"},
        {"xi_mode", FlagSpec::Str, "free, fixed or both"},
        {"level", FlagSpec::Num, "confidence level"},
        {"samples_csv", FlagSpec::Str, "bootstrap replicate CSV output"},
        {"reps", FlagSpec::UInt, "replicates"},
        {"T", FlagSpec::Num, "return period in years"},
        {"estimators", FlagSpec::StrList, "estimators: mile, mple, mple_time, mmle"},
        {"pot", FlagSpec::Bool, "include the POT baseline"},
        {"r_gap", FlagSpec::UInt, "declustering run length (observations)"},
        {"band", FlagSpec::Num, "fluctuation band level"},
        {"long_run", FlagSpec::Bool, "also compare long-run extremal curves"},
        {"long_run_years", FlagSpec::Num, "years of the long-run comparison"},
        {"curves_csv", FlagSpec::Str, "extremal curves CSV output"},
        {"obs_per_year", FlagSpec::NumOrNull, "observations per year for POT levels"},
        {"grid.lat_min", FlagSpec::Num, "grid south edge"},
        {"grid.lat_max", FlagSpec::Num, "grid north edge"},
        {"grid.lon_min", FlagSpec::Num, "grid west edge"},
        {"grid.lon_max", FlagSpec::Num, "grid east edge"},
        {"grid.step", FlagSpec::Num, "grid spacing in degrees"},
        {"grid_csv", FlagSpec::Str, "grid CSV output"},
    };
    return f;
}

void add_flags(CLI::App* sub, const std::string& command, json& overrides) {
    for (const FlagSpec& fs : flag_specs()) {
        const std::string key = fs.key;
        if (!accepts_key(command, key.substr(0, key.find('.')))) continue;
        const std::string name = flag_name(key);
        switch (fs.kind) {
            case FlagSpec::Num:
                sub->add_option_function<double>(name, [&overrides, key](const double& v) { put(overrides, key, v); },
                                                 fs.help);
                break;
            case FlagSpec::Int:
                sub->add_option_function<std::int64_t>(
                    name, [&overrides, key](const std::int64_t& v) { put(overrides, key, v); }, fs.help);
                break;
            case FlagSpec::UInt:
                sub->add_option_function<std::uint64_t>(
                    name, [&overrides, key](const std::uint64_t& v) { put(overrides, key, v); }, fs.help);
                break;
            case FlagSpec::Str:
                sub->add_option_function<std::string>(
                    name, [&overrides, key](const std::string& v) { put(overrides, key, v); }, fs.help);
                break;
            case FlagSpec::NumList:
                sub->add_option_function<std::vector<double>>(
                       name, [&overrides, key](const std::vector<double>& v) { put(overrides, key, v); }, fs.help)
                    ->delimiter(',');
                break;
            case FlagSpec::StrList:
                sub->add_option_function<std::vector<std::string>>(
                       name, [&overrides, key](const std::vector<std::string>& v) { put(overrides, key, v); },
                       fs.help)
                    ->delimiter(',');
                break;
            case FlagSpec::NumOrNull:
                sub->add_option_function<std::string>(
                    name,
                    [&overrides, key](const std::string& v) {
                        if (v == "null" || v == "none" || v == "free") {
                            put(overrides, key, nullptr);
                            return;
                        }
                        std::size_t used = 0;
                        double d = 0.0;
                        try {
                            d = std::stod(v, &used);
                        } catch (...) {
                            used = 0;
                        }
                        if (used == 0 || used != v.size()) throw CLI::ValidationError(key, "expected a number or null");
                        if (d == std::floor(d) && std::fabs(d) < 1e15 && (key == "month")) {
                            put(overrides, key, static_cast<std::int64_t>(d));
                        } else {
                            put(overrides, key, d);
                        }
                    },
                    fs.help);
                break;
            case FlagSpec::Bool:
                sub->add_flag_function(
                    name + ",!" + "--no-" + name.substr(2),
                    [&overrides, key](std::int64_t count) { put(overrides, key, count > 0); }, fs.help);
                break;
        }
    }
}

}  // namespace

std::string version_string() { return CENSMAX_VERSION; }

json run_command(const std::string& command, const json& cfg) {
    if (command == "fit") return cmd_fit(cfg);
    if (command == "simulate") return cmd_simulate(cfg);
    if (command == "return-level") return cmd_return_level(cfg);
    if (command == "bootstrap") return cmd_bootstrap(cfg);
    if (command == "validate") return cmd_validate(cfg);
    if (command == "pot") return cmd_pot(cfg);
    if (command == "grid") return cmd_grid(cfg);
    throw ConfigError("unknown command '" + command + "'");
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Censored max-stable modelling of threshold exceedances in irregular time series", "censmax"};
    app.set_version_flag("--version", std::string(CENSMAX_VERSION));
    app.require_subcommand(1);

    json overrides = json::object();
    std::string config_path;
    std::map<std::string, CLI::App*> subs;
    const std::map<std::string, std::string> descriptions{
        {"fit", "fit the censored Smith process to a CSV series"},
        {"simulate", "simulate the Smith process or a reference model"},
        {"return-level", "cluster return levels of given parameters by simulation"},
        {"bootstrap", "fit, then parametric bootstrap intervals"},
        {"validate", "return-level study on reference models"},
        {"pot", "declustered peaks-over-threshold baseline"},
        {"grid", "moving-window fits over a latitude/longitude grid"},
    };
    for (const std::string& name : command_names()) {
        CLI::App* sub = app.add_subcommand(name, descriptions.at(name));
        sub->add_option("--config", config_path, "JSON configuration file; explicit flags take precedence");
        add_flags(sub, name, overrides);
        subs[name] = sub;
    }

    std::string command;
    std::string output = "-";
    std::vector<std::string> notices;
    std::mutex notices_mutex;
    try {
        try {
            app.parse(argc, argv);
        } catch (const CLI::CallForHelp& e) {
            return app.exit(e, out, err);
        } catch (const CLI::CallForAllHelp& e) {
            return app.exit(e, out, err);
        } catch (const CLI::CallForVersion& e) {
            return app.exit(e, out, err);
        }
        for (const auto& [name, sub] : subs) {
            if (sub->parsed()) command = name;
        }
        json file_config;
        if (!config_path.empty()) {
            std::ifstream f(config_path);
            if (!f) throw ConfigError("cannot open configuration file '" + config_path + "'");
            try {
                file_config = json::parse(f);
            } catch (const json::parse_error& e) {
                throw ConfigError(std::string("configuration file is not valid JSON: ") + e.what());
            }
        }
        const json cfg = effective_config(command, file_config, overrides);
        output = cfg.value("output", std::string("-"));

        ScopedWarningSink sink([&](std::string_view m) {
            std::lock_guard lock(notices_mutex);
            notices.emplace_back(m);
            err << "warning: " << m << '\n';
        });
        json result = run_command(command, cfg);

        // Notices from parallel work arrive in any order; report them sorted with counts.
        std::map<std::string, int> counted;
        for (const auto& n : notices) ++counted[n];
        json notice_list = json::array();
        for (const auto& [m, c] : counted) notice_list.push_back({{"message", m}, {"count", c}});

        json doc = {{"command", command},
                    {"config", cfg},
                    {"config_hash", config_hash(cfg)},
                    {"seed", cfg["seed"]},
                    {"versions", versions()},
                    {"generated_at", now_iso()},
                    {"notices", notice_list},
                    {"result", result}};
        const std::string text = doc.dump(2) + "\n";
        if (output == "-") {
            out << text;
        } else {
            std::ofstream f(output);
            if (!f) throw DataError("cannot write '" + output + "'");
            f << text;
        }
        return 0;
    } catch (const std::exception& e) {
        const Failure fail = classify(e);
        json doc = {{"error", {{"type", fail.type}, {"message", e.what()}, {"exit_code", fail.code}}},
                    {"command", command.empty() ? json(nullptr) : json(command)},
                    {"versions", versions()},
                    {"generated_at", now_iso()}};
        out << doc.dump(2) << '\n';
        err << "error: " << e.what() << '\n';
        return fail.code;
    }
}

}  // namespace censmax::cli
