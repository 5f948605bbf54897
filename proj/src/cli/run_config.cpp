#include "run_config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>

#include "censmax/error.hpp"
#include "censmax/extremal_analysis.hpp"
#include "censmax/log.hpp"

namespace censmax::cli {
namespace {

enum class Kind { Number, Integer, String, Bool, NumberList, StringList, Object, NumberOrNull };

struct Rule {
    Kind kind;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    bool open = false;  // bounds exclusive
    std::vector<std::string> choices{};
};

constexpr double kInf = std::numeric_limits<double>::infinity();

const std::map<std::string, Rule>& rules() {
    static const std::map<std::string, Rule> r{
        {"input", {Kind::String}},
        {"output", {Kind::String}},
        {"seed", {Kind::Integer, 0, 1.8e19}},
        {"threads", {Kind::Integer, 1, 4096}},
        {"threshold", {Kind::NumberOrNull}},
        {"threshold_quantile", {Kind::NumberOrNull, 0, 1, true}},
        {"estimator", {Kind::String, -kInf, kInf, false, {"mile", "mple", "mmle"}}},
        {"strategy", {Kind::String, -kInf, kInf, false, {"index", "time"}}},
        {"K", {Kind::Number, 0, kInf, true}},
        {"month", {Kind::NumberOrNull, 1, 12}},
        {"window", {Kind::Object}},
        {"window.lat", {Kind::Number, -90, 90}},
        {"window.lon", {Kind::Number, -180, 360}},
        {"window.half_width", {Kind::Number, 0, 90, true}},
        {"window.track_gap_minutes", {Kind::Number, 0, kInf, true}},
        {"fix_xi", {Kind::NumberOrNull, -0.95, 0.95}},
        {"return_periods", {Kind::NumberList, 0, kInf, true}},
        {"sim_years", {Kind::Number, 0, kInf, true}},
        {"scan_quantiles", {Kind::NumberList, 0, 1, true}},
        {"scan_csv", {Kind::String}},
        {"qq_csv", {Kind::String}},
        {"qq_points", {Kind::Integer, 1, 1e7}},
        {"max_evals", {Kind::Integer, 10, 1e8}},
        {"model", {Kind::String, -kInf, kInf, false, {"smith", "iid", "ar1", "logarmax", "ou"}}},
        {"mu", {Kind::Number}},
        {"sigma", {Kind::Number, 0, kInf, true}},
        {"xi", {Kind::Number, -0.95, 0.95}},
        {"nu", {Kind::Number, 0, kInf, true}},
        {"alpha", {Kind::NumberOrNull}},
        {"sampling", {Kind::String, -kInf, kInf, false, {"regular", "uniform"}}},
        {"step", {Kind::Number, 0, kInf, true}},
        {"gap_lo", {Kind::Number, 0, kInf}},
        {"gap_hi", {Kind::Number, 0, kInf, true}},
        {"years", {Kind::Number, 0, kInf, true}},
        {"series_csv", {Kind::String}},
        {"independent_years", {Kind::Bool}},
        {"B", {Kind::Integer, 1, 1e7}},
        {"xi_mode", {Kind::String, -kInf, kInf, false, {"free", "fixed", "both"}}},
        {"level", {Kind::Number, 0, 1, true}},
        {"samples_csv", {Kind::String}},
        {"reps", {Kind::Integer, 1, 1e7}},
        {"T", {Kind::Number, 0, kInf, true}},
        {"estimators", {Kind::StringList, -kInf, kInf, false, {"mile", "mple", "mple_time", "mmle"}}},
        {"pot", {Kind::Bool}},
        {"r_gap", {Kind::Integer, 0, 1e9}},
        {"band", {Kind::Number, 0, 1, true}},
        {"long_run", {Kind::Bool}},
        {"long_run_years", {Kind::Number, 0, kInf, true}},
        {"curves_csv", {Kind::String}},
        {"obs_per_year", {Kind::NumberOrNull, 0, kInf, true}},
        {"grid", {Kind::Object}},
        {"grid.lat_min", {Kind::Number, -90, 90}},
        {"grid.lat_max", {Kind::Number, -90, 90}},
        {"grid.lon_min", {Kind::Number, -180, 360}},
        {"grid.lon_max", {Kind::Number, -180, 360}},
        {"grid.step", {Kind::Number, 0, 180, true}},
        {"grid_csv", {Kind::String}},
    };
    return r;
}

const std::vector<std::string> kCommon{"input", "output", "seed", "threads"};
const std::vector<std::string> kData{"threshold", "threshold_quantile", "month", "window"};
const std::vector<std::string> kFitting{"estimator", "strategy", "K", "fix_xi", "max_evals"};

std::set<std::string> allowed_keys(const std::string& command) {
    std::set<std::string> keys(kCommon.begin(), kCommon.end());
    auto add = [&](std::initializer_list<std::string> more) { keys.insert(more.begin(), more.end()); };
    auto add_v = [&](const std::vector<std::string>& more) { keys.insert(more.begin(), more.end()); };
    if (command == "fit") {
        add_v(kData);
        add_v(kFitting);
        add({"return_periods", "sim_years", "scan_quantiles", "scan_csv", "qq_csv", "qq_points"});
    } else if (command == "simulate") {
        add({"model", "mu", "sigma", "xi", "nu", "alpha", "sampling", "step", "gap_lo", "gap_hi", "years",
             "series_csv"});
    } else if (command == "return-level") {
        add({"mu", "sigma", "xi", "nu", "sampling", "step", "gap_lo", "gap_hi", "return_periods", "sim_years"});
    } else if (command == "bootstrap") {
        add_v(kData);
        add_v(kFitting);
        add({"B", "xi_mode", "level", "return_periods", "sim_years", "samples_csv"});
    } else if (command == "validate") {
        add({"model", "alpha", "years", "reps", "T", "sim_years", "estimators", "pot", "r_gap", "band", "long_run",
             "long_run_years", "curves_csv", "max_evals"});
    } else if (command == "pot") {
        add_v(kData);
        add({"r_gap", "return_periods", "obs_per_year", "max_evals"});
    } else if (command == "grid") {
        add_v(kData);
        add_v(kFitting);
        add({"grid", "return_periods", "sim_years", "grid_csv"});
    } else {
        throw ConfigError("unknown command '" + command + "'");
    }
    return keys;
}

[[noreturn]] void bad(const std::string& key, const std::string& what) {
    throw ConfigError("config key '" + key + "': " + what);
}

void check_number(const std::string& key, double v, const Rule& r) {
    if (!std::isfinite(v)) bad(key, "must be finite");
    const bool ok = r.open ? (v > r.lo && v < r.hi) : (v >= r.lo && v <= r.hi);
    if (!ok) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "value %.17g outside %c%g, %g%c", v, r.open ? '(' : '[', r.lo, r.hi,
                      r.open ? ')' : ']');
        bad(key, buf);
    }
}

void check_value(const std::string& key, const json& v, const Rule& r) {
    switch (r.kind) {
        case Kind::NumberOrNull:
            if (v.is_null()) return;
            [[fallthrough]];
        case Kind::Number:
            if (!v.is_number()) bad(key, "expected a number");
            check_number(key, v.get<double>(), r);
            return;
        case Kind::Integer:
            if (!v.is_number_integer()) bad(key, "expected an integer");
            if (v.is_number_unsigned()) check_number(key, static_cast<double>(v.get<std::uint64_t>()), r);
            else check_number(key, static_cast<double>(v.get<std::int64_t>()), r);
            return;
        case Kind::String:
            if (!v.is_string()) bad(key, "expected a string");
            if (!r.choices.empty() &&
                std::find(r.choices.begin(), r.choices.end(), v.get<std::string>()) == r.choices.end()) {
                bad(key, "unknown value '" + v.get<std::string>() + "'");
            }
            return;
        case Kind::Bool:
            if (!v.is_boolean()) bad(key, "expected true or false");
            return;
        case Kind::NumberList:
            if (!v.is_array()) bad(key, "expected an array of numbers");
            for (const auto& e : v) {
                if (!e.is_number()) bad(key, "expected an array of numbers");
                check_number(key, e.get<double>(), r);
            }
            return;
        case Kind::StringList:
            if (!v.is_array() || v.empty()) bad(key, "expected a non-empty array of strings");
            for (const auto& e : v) check_value(key, e, Rule{Kind::String, r.lo, r.hi, r.open, r.choices});
            return;
        case Kind::Object:
            if (!v.is_object()) bad(key, "expected an object");
            for (const auto& [k, sub] : v.items()) {
                const std::string full = key + "." + k;
                const auto it = rules().find(full);
                if (it == rules().end()) bad(full, "unknown key");
                check_value(full, sub, it->second);
            }
            return;
    }
}

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

json command_defaults(const std::string& command) {
    json d = {{"output", "-"}, {"seed", 1}};
    const json fitting = {{"estimator", "mple"}, {"strategy", "index"}, {"K", 1}, {"fix_xi", nullptr},
                          {"max_evals", 4000}};
    const json data = {{"threshold", nullptr}, {"threshold_quantile", nullptr}, {"month", nullptr}};
    if (command == "fit") {
        d.update(data);
        d.update(fitting);
        d.update({{"return_periods", json::array({10, 20, 50, 100})}, {"sim_years", 1000}, {"qq_points", 99}});
    } else if (command == "simulate") {
        d.update({{"model", "smith"}, {"mu", 0.0}, {"sigma", 1.0}, {"xi", 0.0}, {"nu", 1.0}, {"alpha", nullptr},
                  {"sampling", "regular"}, {"step", 1.0}, {"gap_lo", 0.0}, {"gap_hi", 2.0}, {"years", 5}});
    } else if (command == "return-level") {
        d.update({{"mu", 0.0}, {"sigma", 1.0}, {"xi", 0.0}, {"nu", 1.0}, {"sampling", "regular"}, {"step", 1.0},
                  {"gap_lo", 0.0}, {"gap_hi", 2.0}, {"return_periods", json::array({10, 20, 50, 100})},
                  {"sim_years", 1000}});
    } else if (command == "bootstrap") {
        d.update(data);
        d.update(fitting);
        d.update({{"B", 1000}, {"xi_mode", "free"}, {"level", 0.95},
                  {"return_periods", json::array({10, 20, 50, 100})}, {"sim_years", 1000}});
    } else if (command == "validate") {
        d.update({{"model", "iid"}, {"alpha", nullptr}, {"years", 5}, {"reps", 200}, {"T", 100}, {"sim_years", 1000},
                  {"estimators", json::array({"mple"})}, {"pot", true}, {"r_gap", 3}, {"band", 0.90},
                  {"long_run", false}, {"long_run_years", 1000}, {"max_evals", 4000}});
    } else if (command == "pot") {
        d.update(data);
        d.update({{"r_gap", 3}, {"return_periods", json::array({10, 20, 50, 100})}, {"obs_per_year", nullptr},
                  {"max_evals", 4000}});
    } else if (command == "grid") {
        d.update(data);
        d.update(fitting);
        d["fix_xi"] = 0.0;
        d["threshold_quantile"] = 0.95;
        d.update({{"return_periods", json::array({20})}, {"sim_years", 1000}});
    } else {
        throw ConfigError("unknown command '" + command + "'");
    }
    return d;
}

bool accepts_key(const std::string& command, const std::string& key) { return allowed_keys(command).count(key) > 0; }

void validate_config(const std::string& command, const json& cfg) {
    if (!cfg.is_object()) throw ConfigError("configuration must be a JSON object");
    const auto keys = allowed_keys(command);
    for (const auto& [k, v] : cfg.items()) {
        if (!keys.count(k)) bad(k, "not accepted by '" + command + "'");
        check_value(k, v, rules().at(k));
    }
    auto has = [&](const char* k) { return cfg.contains(k) && !cfg[k].is_null(); };
    const bool reads_data = command == "fit" || command == "bootstrap" || command == "pot" || command == "grid";
    if (reads_data && !has("input")) bad("input", "required");
    if (reads_data) {
        if (has("threshold") == has("threshold_quantile")) {
            throw ConfigError("exactly one of 'threshold' and 'threshold_quantile' must be given");
        }
        if (has("month") && !cfg["month"].is_number_integer()) bad("month", "expected an integer");
    }
    if (has("estimator") && cfg["estimator"] == "mple" && has("strategy") && cfg["strategy"] == "index") {
        const double K = cfg.value("K", 1.0);
        if (K != std::floor(K)) bad("K", "index windows need an integer K");
    }
    if (command == "grid") {
        if (!has("grid")) bad("grid", "required");
        for (const char* k : {"lat_min", "lat_max", "lon_min", "lon_max", "step"}) {
            if (!cfg["grid"].contains(k)) bad(std::string("grid.") + k, "required");
        }
        if (cfg["grid"]["lat_max"].get<double>() < cfg["grid"]["lat_min"].get<double>() ||
            cfg["grid"]["lon_max"].get<double>() < cfg["grid"]["lon_min"].get<double>()) {
            bad("grid", "max below min");
        }
        if (cfg.contains("window") && (cfg["window"].contains("lat") || cfg["window"].contains("lon"))) {
            bad("window", "centres come from the grid");
        }
    } else if (cfg.contains("window")) {
        if (!cfg["window"].contains("lat") || !cfg["window"].contains("lon")) bad("window", "needs lat and lon");
    }
    if (has("gap_lo") && has("gap_hi") && !(cfg["gap_lo"].get<double>() < cfg["gap_hi"].get<double>())) {
        bad("gap_hi", "must exceed gap_lo");
    }
    if (has("alpha")) {
        const double a = cfg["alpha"].get<double>();
        if (!(a > 0.0) || !std::isfinite(a)) bad("alpha", "must be positive");
    }
    if (command == "validate" && cfg.value("T", 100.0) > cfg.value("sim_years", 1000.0)) {
        bad("T", "must not exceed sim_years");
    }
}

json effective_config(const std::string& command, const json& file_config, const json& flag_overrides) {
    json cfg = command_defaults(command);
    auto overlay = [&](const json& layer) {
        for (const auto& [k, v] : layer.items()) {
            if (v.is_object() && cfg.contains(k) && cfg[k].is_object()) cfg[k].update(v);
            else cfg[k] = v;
        }
        // A layer naming one form of the threshold replaces the other form.
        const bool abs = layer.contains("threshold"), rel = layer.contains("threshold_quantile");
        if (abs && !rel && cfg.contains("threshold_quantile")) cfg["threshold_quantile"] = nullptr;
        if (rel && !abs && cfg.contains("threshold")) cfg["threshold"] = nullptr;
    };
    if (!file_config.is_null()) {
        if (!file_config.is_object()) throw ConfigError("configuration file must hold a JSON object");
        json f = file_config;
        if (f.contains("command")) {
            if (f["command"] != command) throw ConfigError("configuration file is for command " + f["command"].dump());
            f.erase("command");
        }
        overlay(f);
    }
    overlay(flag_overrides);
    validate_config(command, cfg);
    return cfg;
}

std::string config_hash(const json& cfg) {
    json c = cfg;
    for (const char* k : {"output", "threads", "scan_csv", "qq_csv", "series_csv", "samples_csv", "curves_csv",
                          "grid_csv"}) {
        c.erase(k);
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(fnv1a64(c.dump())));
    return buf;
}

OptimizerConfig optimizer_from(const json& cfg) {
    OptimizerConfig o;
    if (cfg.contains("max_evals")) o.max_evals = cfg["max_evals"].get<int>();
    if (cfg.contains("fix_xi") && !cfg["fix_xi"].is_null()) o.fixed_xi = cfg["fix_xi"].get<double>();
    o.validate();
    return o;
}

EstimatorSpec parse_estimator_name(const std::string& name) {
    if (name == "mile") return EstimatorSpec::mile();
    if (name == "mmle") return EstimatorSpec::mmle();
    if (name == "mple") return EstimatorSpec::mple();
    if (name == "mple_time") return EstimatorSpec::mple(PairStrategy::TimeWindow, 1.0);
    throw ConfigError("unknown estimator '" + name + "'");
}

EstimatorSpec estimator_from(const json& cfg) {
    EstimatorSpec s = parse_estimator_name(cfg.value("estimator", std::string("mple")));
    if (s.kind == EstimatorKind::MPLE) {
        s.strategy = cfg.value("strategy", std::string("index")) == "time" ? PairStrategy::TimeWindow
                                                                            : PairStrategy::IndexWindow;
        s.K = cfg.value("K", 1.0);
    }
    return s;
}

PreparedData prepare_records(std::vector<RawRecord> records, const json& cfg) {
    if (cfg.contains("window") && cfg["window"].contains("lat")) {
        WindowSpec w;
        const json& j = cfg["window"];
        w.lat = j["lat"].get<double>();
        w.lon = j["lon"].get<double>();
        if (w.lon >= 180.0) w.lon -= 360.0;
        w.half_width = j.value("half_width", w.half_width);
        w.track_gap_minutes = j.value("track_gap_minutes", w.track_gap_minutes);
        records = window_extract(records, w);
    }
    PreparedData d;
    d.records = std::move(records);
    if (cfg.contains("month") && !cfg["month"].is_null()) {
        d.series = monthly_blocks(d.records, cfg["month"].get<int>());
        d.blocked = true;
        d.years = static_cast<double>(block_ranges(d.series.block_ids, d.series.size()).size());
    } else {
        d.series = to_series(d.records);
        if (d.series.size() >= 2) {
            const double span = d.series.times.back() - d.series.times.front();
            const double gap = span / static_cast<double>(d.series.size() - 1);
            d.years = (span + gap) / 365.0;
        } else {
            d.years = d.series.empty() ? 0.0 : 1.0 / 365.0;
        }
    }
    if (d.series.empty()) throw DataError("no observations left after filtering");
    return d;
}

PreparedData load_data(const json& cfg) {
    return prepare_records(read_timeseries(cfg["input"].get<std::string>()).records, cfg);
}

double resolve_threshold(const json& cfg, const TimeSeries& series) {
    if (cfg.contains("threshold") && !cfg["threshold"].is_null()) return cfg["threshold"].get<double>();
    return empirical_quantile(series.values, cfg["threshold_quantile"].get<double>());
}

TimeSeries year_layout(const PreparedData& data) {
    if (data.blocked) {
        TimeSeries layout = data.series;
        layout.values.assign(layout.size(), 0.0);
        return layout;
    }
    const TimeSeries& s = data.series;
    const double t0 = s.times.front();
    const auto full_years = static_cast<long>(std::floor((s.times.back() - t0) / 365.0));
    const long n_years = std::max(1L, full_years);
    if (full_years < 1) warn("record shorter than one year; its time stamps are repeated as whole years");
    TimeSeries layout;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double rel = s.times[i] - t0;
        const auto y = static_cast<long>(std::floor(rel / 365.0));
        if (y >= n_years) break;
        layout.times.push_back(rel - 365.0 * static_cast<double>(y));
        layout.values.push_back(0.0);
        layout.block_ids.push_back(static_cast<int>(y));
    }
    return layout;
}

}  // namespace censmax::cli
