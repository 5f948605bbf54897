#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>
#include <unistd.h>

#include "../src/cli/commands.hpp"
#include "censmax/error.hpp"
#include "censmax/io.hpp"

using namespace censmax;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string text;
    json doc;
};

Outcome run(std::vector<std::string> args) {
    args.insert(args.begin(), "censmax");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    json doc;
    try {
        doc = json::parse(out.str());
    } catch (const json::exception&) {
    }
    return {code, out.str(), doc};
}

std::string strip_timestamp(std::string text) {
    json d = json::parse(text);
    d.erase("generated_at");
    return d.dump();
}

fs::path workdir() {
    const fs::path p = fs::temp_directory_path() / ("censmax_test_cli_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("simulate, re-read and fit") {
    const fs::path dir = workdir();
    const std::string csv = (dir / "series.csv").string();
    const auto sim = run({"simulate", "--mu", "0", "--sigma", "1", "--xi", "0.1", "--nu", "0.5", "--years", "10",
                          "--seed", "5", "--series-csv", csv});
    REQUIRE(sim.code == 0);
    CHECK(sim.doc["result"]["n_obs"] == 3650);
    CHECK(sim.doc["seed"] == 5);
    CHECK(sim.doc["config_hash"].get<std::string>().rfind("fnv1a64:", 0) == 0);
    CHECK(sim.doc["versions"].contains("censmax"));

    // The written CSV restores the values to full precision.
    const auto inline_sim = run({"simulate", "--mu", "0", "--sigma", "1", "--xi", "0.1", "--nu", "0.5", "--years",
                                 "10", "--seed", "5"});
    const auto values = inline_sim.doc["result"]["values"].get<std::vector<double>>();
    const auto back = to_series(read_timeseries(csv).records);
    REQUIRE(back.size() == values.size());
    for (std::size_t i = 0; i < values.size(); ++i) CHECK(std::fabs(back.values[i] - values[i]) <= 1e-12);

    const auto f = run({"fit", "--input", csv, "--threshold-quantile", "0.9", "--return-periods", "10,20",
                        "--sim-years", "200", "--qq-csv", (dir / "qq.csv").string()});
    REQUIRE(f.code == 0);
    const json th = f.doc["result"]["fit"]["theta"];
    CHECK(std::fabs(th["mu"].get<double>()) < 0.5);
    CHECK(std::fabs(th["sigma"].get<double>() - 1.0) < 0.5);
    CHECK(std::fabs(th["xi"].get<double>() - 0.1) < 0.35);
    CHECK(std::fabs(th["nu"].get<double>() - 0.5) < 0.3);
    CHECK(f.doc["result"]["return_levels"]["q20"].get<double>() >= f.doc["result"]["return_levels"]["q10"].get<double>());
    CHECK(slurp(dir / "qq.csv").rfind("p,", 0) == 0);
    fs::remove_all(dir);
}

TEST_CASE("re-runs are byte identical apart from the timestamp") {
    const fs::path dir = workdir();
    const std::string csv = (dir / "d.csv").string();
    REQUIRE(run({"simulate", "--years", "3", "--nu", "0.3", "--seed", "9", "--series-csv", csv}).code == 0);
    const std::vector<std::vector<std::string>> commands{
        {"simulate", "--model", "logarmax", "--years", "2", "--seed", "4"},
        {"fit", "--input", csv, "--threshold-quantile", "0.9", "--return-periods", "10", "--sim-years", "100"},
        {"pot", "--input", csv, "--threshold-quantile", "0.9"},
        {"return-level", "--nu", "0.5", "--return-periods", "10,50", "--sim-years", "200", "--seed", "3"},
        {"bootstrap", "--input", csv, "--threshold-quantile", "0.9", "--B", "4", "--return-periods", "10",
         "--sim-years", "100", "--threads", "2"},
    };
    for (const auto& c : commands) {
        const auto a = run(c), b = run(c);
        CAPTURE(c[0]);
        REQUIRE(a.code == 0);
        CHECK(strip_timestamp(a.text) == strip_timestamp(b.text));
        CHECK(a.doc["config_hash"] == b.doc["config_hash"]);
    }
    // Thread counts do not change results or the hash.
    auto one = commands.back();
    one.back() = "1";
    CHECK(strip_timestamp(run(one).text).size() > 0);
    json x = json::parse(run(one).text), y = json::parse(run(commands.back()).text);
    CHECK(x["result"] == y["result"]);
    CHECK(x["config_hash"] == y["config_hash"]);
    fs::remove_all(dir);
}

TEST_CASE("bootstrap table shape") {
    const fs::path dir = workdir();
    const std::string csv = (dir / "d.csv").string();
    REQUIRE(run({"simulate", "--years", "3", "--nu", "0.3", "--seed", "2", "--series-csv", csv}).code == 0);
    const auto r = run({"bootstrap", "--input", csv, "--threshold-quantile", "0.9", "--B", "4", "--return-periods",
                        "10,20,50,100", "--sim-years", "200", "--xi-mode", "both"});
    REQUIRE(r.code == 0);
    const json runs = r.doc["result"]["bootstrap"];
    REQUIRE(runs.size() == 2);
    for (const json& run_doc : runs) {
        std::vector<std::string> names;
        for (const json& row : run_doc["table"]) {
            names.push_back(row["name"]);
            const std::string s = row["formatted"];
            CHECK(s.find(" (") != std::string::npos);
            CHECK(s.back() == ')');
        }
        CHECK(names == std::vector<std::string>{"mu", "sigma", "xi", "nu", "q10", "q20", "q50", "q100"});
    }
    fs::remove_all(dir);
}

TEST_CASE("configuration file layering") {
    const fs::path dir = workdir();
    const std::string cfg = (dir / "c.json").string();
    std::ofstream(cfg) << R"({"command": "simulate", "years": 2, "nu": 0.7, "seed": 11})";
    const auto a = run({"simulate", "--config", cfg});
    REQUIRE(a.code == 0);
    CHECK(a.doc["config"]["nu"] == 0.7);
    CHECK(a.doc["seed"] == 11);
    const auto b = run({"simulate", "--config", cfg, "--seed", "12"});
    CHECK(b.doc["seed"] == 12);
    CHECK(a.doc["config_hash"] != b.doc["config_hash"]);
    const auto c = run({"simulate", "--config", cfg, "--output", (dir / "o.json").string()});
    CHECK(c.code == 0);
    CHECK(json::parse(slurp(dir / "o.json"))["config_hash"] == a.doc["config_hash"]);

    const json eff = cli::effective_config("fit", {{"input", "x.csv"}, {"threshold", 2.0}}, {{"threshold_quantile", 0.9}});
    CHECK(eff["threshold"].is_null());
    CHECK(eff["threshold_quantile"] == 0.9);
    CHECK(cli::effective_config("grid", {{"input", "x"}, {"grid", {{"lat_min", 0}, {"lat_max", 1}, {"lon_min", 0},
                                                                    {"lon_max", 1}, {"step", 1}}}},
                                json::object())["fix_xi"] == 0.0);
    fs::remove_all(dir);
}

TEST_CASE("errors map to exit codes with an error document") {
    const fs::path dir = workdir();
    auto expect = [](const Outcome& o, int code, const char* type) {
        CHECK(o.code == code);
        REQUIRE(o.doc.contains("error"));
        CHECK(o.doc["error"]["exit_code"] == code);
        CHECK(o.doc["error"]["type"].get<std::string>() == std::string(type) + "_error");
    };
    expect(run({"fit", "--input", "/nonexistent.csv", "--threshold", "1"}), 3, "data");
    expect(run({"fit", "--input", "x.csv", "--threshold", "1", "--threshold-quantile", "0.9"}), 2, "config");
    expect(run({"fit", "--input", "x.csv"}), 2, "config");
    expect(run({"simulate", "--bogus"}), 2, "config");
    expect(run({"simulate", "--nu", "-1"}), 2, "config");
    expect(run({"simulate", "--sampling", "weekly"}), 2, "config");
    expect(run({"bootstrap", "--input", "x.csv", "--threshold", "1", "--B", "0"}), 2, "config");
    const std::string bad = (dir / "bad.json").string();
    std::ofstream(bad) << "{ not json";
    expect(run({"simulate", "--config", bad}), 2, "config");
    std::ofstream(dir / "wrong.json") << R"({"command": "fit"})";
    expect(run({"simulate", "--config", (dir / "wrong.json").string()}), 2, "config");

    const std::string tiny = (dir / "tiny.csv").string();
    std::ofstream(tiny) << "time,value\n0,1\n1,2\n2,3\n";
    expect(run({"pot", "--input", tiny, "--threshold", "1.5"}), 3, "data");
    expect(run({"return-level", "--nu", "0.5", "--return-periods", "0.001", "--sim-years", "10"}), 4, "numerical");
    fs::remove_all(dir);
}

TEST_CASE("grid over track data") {
    const fs::path dir = workdir();
    const std::string csv = (dir / "tracks.csv").string();
    {
        std::ofstream f(csv);
        f << "time,value,lat,lon\n";
        f.precision(17);
        // One pass a day crossing two sites; heights follow a smooth field plus noise.
        for (int d = 0; d < 4 * 365; ++d) {
            for (int k = 0; k < 8; ++k) {
                const double lat = 9.0 + k * 0.75;
                const double v = 2.0 + std::sin(d * 0.37) + 0.5 * std::cos(d * 1.7 + k) + ((d * 7919 + k * 104729) % 1000) / 500.0;
                f << d + k / 1440.0 << ',' << v << ',' << lat << ',' << 20.0 << '\n';
            }
        }
    }
    const auto r = run({"grid", "--input", csv, "--grid-lat-min", "10", "--grid-lat-max", "13", "--grid-lon-min", "20",
                        "--grid-lon-max", "20", "--grid-step", "3", "--sim-years", "100", "--grid-csv",
                        (dir / "grid.csv").string()});
    REQUIRE(r.code == 0);
    const json rows = r.doc["result"]["cells"];
    REQUIRE(rows.size() == 2);
    CHECK(rows[0]["theta"]["xi"] == 0.0);
    const std::string text = slurp(dir / "grid.csv");
    CHECK(text.rfind("lat,lon,n_obs,u,mu,sigma,xi,nu,q20\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);
    fs::remove_all(dir);
}
