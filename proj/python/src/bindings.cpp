#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <string>

#include "censmax/composite_likelihood.hpp"
#include "censmax/distributions.hpp"
#include "censmax/error.hpp"
#include "censmax/estimation.hpp"
#include "censmax/extremal_analysis.hpp"
#include "censmax/io.hpp"
#include "censmax/simulation.hpp"
#include "censmax/smith_pairwise.hpp"

#define STRINGIFY(x) #x
#define MACRO_STRINGIFY(x) STRINGIFY(x)

namespace py = pybind11;
using namespace censmax;

namespace {

CensoredSample sample_from(const std::vector<double>& times, const std::vector<double>& values, double u,
                           const std::vector<int>& blocks) {
    return apply_censoring(TimeSeries{times, values, blocks}, u);
}

PairStrategy strategy_from(const std::string& s) {
    if (s == "index") return PairStrategy::IndexWindow;
    if (s == "time") return PairStrategy::TimeWindow;
    throw ConfigError("strategy must be 'index' or 'time'");
}

EstimatorSpec spec_from(const std::string& estimator, const std::string& strategy, double K) {
    if (estimator == "mile") return EstimatorSpec::mile();
    if (estimator == "mmle") return EstimatorSpec::mmle();
    if (estimator == "mple") return EstimatorSpec::mple(strategy_from(strategy), K);
    throw ConfigError("estimator must be 'mile', 'mple' or 'mmle'");
}

SamplingScheme scheme_from(const std::string& sampling, double step, double gap_lo, double gap_hi) {
    if (sampling == "regular") return SamplingScheme::regular(step, 365.0);
    if (sampling == "uniform") return SamplingScheme::uniform_gaps(gap_lo, gap_hi, 365.0);
    throw ConfigError("sampling must be 'regular' or 'uniform'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Censored Smith max-stable process: distributions, composite likelihoods, fits, simulation.";

    // Translators run newest first, so the base class is registered first.
    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<CensoringError>(m, "CensoringError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    py::class_<GevMargin>(m, "GevMargin")
        .def(py::init([](double mu, double sigma, double xi) {
                 GevMargin g{mu, sigma, xi};
                 g.validate();
                 return g;
             }),
             py::arg("mu") = 0.0, py::arg("sigma") = 1.0, py::arg("xi") = 0.0)
        .def_readwrite("mu", &GevMargin::mu)
        .def_readwrite("sigma", &GevMargin::sigma)
        .def_readwrite("xi", &GevMargin::xi)
        .def("__repr__", [](const GevMargin& g) {
            return "GevMargin(mu=" + std::to_string(g.mu) + ", sigma=" + std::to_string(g.sigma) +
                   ", xi=" + std::to_string(g.xi) + ")";
        });

    py::class_<SmithParams>(m, "SmithParams")
        .def(py::init([](double mu, double sigma, double xi, double nu, double u) {
                 SmithParams p{{mu, sigma, xi}, nu, u};
                 p.validate();
                 return p;
             }),
             py::arg("mu"), py::arg("sigma"), py::arg("xi"), py::arg("nu"), py::arg("u") = -INFINITY)
        .def_readwrite("margin", &SmithParams::margin)
        .def_readwrite("nu", &SmithParams::nu)
        .def_readwrite("u", &SmithParams::u);

    m.def("gev_cdf", &gev_cdf, py::arg("x"), py::arg("margin"));
    m.def("gev_logpdf", &gev_logpdf, py::arg("x"), py::arg("margin"));
    m.def("gev_quantile", &gev_quantile, py::arg("p"), py::arg("margin"));
    m.def(
        "gpd_cdf", [](double x, double u, double sigma, double xi) { return gpd_cdf(x, GpdMargin{u, sigma, xi}); },
        py::arg("x"), py::arg("u"), py::arg("sigma"), py::arg("xi"));
    m.def(
        "gpd_logpdf",
        [](double x, double u, double sigma, double xi) { return gpd_logpdf(x, GpdMargin{u, sigma, xi}); },
        py::arg("x"), py::arg("u"), py::arg("sigma"), py::arg("xi"));
    m.def("to_frechet", &to_frechet, py::arg("x"), py::arg("margin"));
    m.def("from_frechet", &from_frechet, py::arg("z"), py::arg("margin"));
    m.def("censored_marginal_logdensity", &censored_marginal_logdensity, py::arg("y"), py::arg("u"),
          py::arg("margin"));

    m.def("exponent_V", &exponent_V, py::arg("z1"), py::arg("z2"), py::arg("dt"), py::arg("nu"));
    m.def("bivariate_cdf_frechet", &bivariate_cdf_frechet, py::arg("z1"), py::arg("z2"), py::arg("dt"),
          py::arg("nu"));
    m.def(
        "censored_pair_logdensity",
        [](double y1, double y2, double dt, const SmithParams& p) { return censored_pair_logdensity(y1, y2, dt, p); },
        py::arg("y1"), py::arg("y2"), py::arg("dt"), py::arg("params"));

    m.def(
        "independent_loglik",
        [](const std::vector<double>& t, const std::vector<double>& x, const SmithParams& p,
           const std::vector<int>& blocks) { return independent_loglik(p, sample_from(t, x, p.u, blocks)); },
        py::arg("times"), py::arg("values"), py::arg("params"), py::arg("blocks") = std::vector<int>{});
    m.def(
        "pairwise_loglik",
        [](const std::vector<double>& t, const std::vector<double>& x, const SmithParams& p, const std::string& strategy,
           double K, const std::vector<int>& blocks) {
            const CensoredSample s = sample_from(t, x, p.u, blocks);
            return pairwise_loglik(p, s, build_pair_plan(s, strategy_from(strategy), K));
        },
        py::arg("times"), py::arg("values"), py::arg("params"), py::arg("strategy") = "index", py::arg("K") = 1.0,
        py::arg("blocks") = std::vector<int>{});
    m.def(
        "markov_loglik",
        [](const std::vector<double>& t, const std::vector<double>& x, const SmithParams& p,
           const std::vector<int>& blocks) { return markov_loglik(p, sample_from(t, x, p.u, blocks)); },
        py::arg("times"), py::arg("values"), py::arg("params"), py::arg("blocks") = std::vector<int>{});

    m.def(
        "fit",
        [](const std::vector<double>& t, const std::vector<double>& x, double u, const std::string& estimator,
           const std::string& strategy, double K, std::optional<double> fix_xi, const std::vector<int>& blocks) {
            OptimizerConfig cfg;
            cfg.fixed_xi = fix_xi;
            const FitResult f = censmax::fit(sample_from(t, x, u, blocks), spec_from(estimator, strategy, K), cfg);
            py::dict d;
            d["mu"] = f.theta.margin.mu;
            d["sigma"] = f.theta.margin.sigma;
            d["xi"] = f.theta.margin.xi;
            d["nu"] = f.theta.nu;
            d["u"] = f.theta.u;
            d["objective"] = f.objective;
            d["converged"] = f.converged;
            d["estimator"] = f.estimator.label();
            d["n_evals"] = f.n_evals;
            d["n_uncensored"] = f.n_uncensored;
            return d;
        },
        py::arg("times"), py::arg("values"), py::arg("u"), py::arg("estimator") = "mple",
        py::arg("strategy") = "index", py::arg("K") = 1.0, py::arg("fix_xi") = std::nullopt,
        py::arg("blocks") = std::vector<int>{});

    m.def(
        "simulate_smith",
        [](const std::vector<double>& times, const GevMargin& margin, double nu, std::uint64_t seed) {
            return simulate_smith(times, margin, nu, seed).values;
        },
        py::arg("times"), py::arg("margin"), py::arg("nu"), py::arg("seed"));
    m.def(
        "simulate_reference",
        [](const std::string& model, std::size_t n_days, std::uint64_t seed, std::optional<double> alpha) {
            ReferenceModelSpec spec;
            if (model == "iid") spec.kind = ReferenceModelSpec::Kind::IID;
            else if (model == "ar1") spec.kind = ReferenceModelSpec::Kind::AR1;
            else if (model == "logarmax") spec.kind = ReferenceModelSpec::Kind::LogArmax;
            else if (model == "ou") spec.kind = ReferenceModelSpec::Kind::OU;
            else throw ConfigError("unknown reference model");
            spec.alpha = alpha.value_or(spec.kind == ReferenceModelSpec::Kind::OU ? 0.05 : 0.2);
            const SamplingScheme scheme = spec.kind == ReferenceModelSpec::Kind::OU
                                              ? SamplingScheme::uniform_gaps(0.0, 2.0, static_cast<double>(n_days))
                                              : SamplingScheme::regular(1.0, static_cast<double>(n_days));
            const TimeSeries ts = simulate_reference(spec, scheme, seed);
            return py::make_tuple(ts.times, ts.values);
        },
        py::arg("model"), py::arg("n_days"), py::arg("seed"), py::arg("alpha") = std::nullopt);

    m.def(
        "return_levels",
        [](const SmithParams& theta, const std::vector<double>& periods, double sim_years, std::uint64_t seed,
           const std::string& sampling, double step, double gap_lo, double gap_hi) {
            return return_levels(theta, scheme_from(sampling, step, gap_lo, gap_hi), periods, sim_years, seed);
        },
        py::arg("params"), py::arg("return_periods"), py::arg("sim_years") = 1000.0, py::arg("seed") = 1,
        py::arg("sampling") = "regular", py::arg("step") = 1.0, py::arg("gap_lo") = 0.0, py::arg("gap_hi") = 2.0);
    m.def(
        "cluster_return_levels",
        [](const std::vector<double>& t, const std::vector<double>& x, double years, const std::vector<double>& periods) {
            return cluster_return_levels(TimeSeries{t, x, {}}, years, periods);
        },
        py::arg("times"), py::arg("values"), py::arg("years"), py::arg("return_periods"));
    m.def(
        "upcrossings",
        [](const std::vector<double>& t, const std::vector<double>& x, double level) {
            return upcrossings(TimeSeries{t, x, {}}, level);
        },
        py::arg("times"), py::arg("values"), py::arg("level"));

    m.def(
        "pot_fit",
        [](const std::vector<double>& t, const std::vector<double>& x, double u, std::size_t r_gap) {
            const PotFit p = pot_fit(TimeSeries{t, x, {}}, u, r_gap);
            py::dict d;
            d["u"] = p.u;
            d["lambda"] = p.lambda;
            d["sigma"] = p.gpd.sigma;
            d["xi"] = p.gpd.xi;
            d["n_clusters"] = p.n_clusters;
            d["n_obs"] = p.n_obs;
            d["n_below"] = p.n_below;
            d["n_exceed"] = p.n_exceed;
            d["converged"] = p.converged;
            return d;
        },
        py::arg("times"), py::arg("values"), py::arg("u"), py::arg("r_gap") = 3);

    m.def(
        "bootstrap",
        [](const std::vector<double>& t, const std::vector<double>& x, double u, std::size_t B, std::uint64_t seed,
           const std::vector<double>& periods, double sim_years, bool fix_xi, const std::vector<int>& blocks) {
            const TimeSeries layout{t, x, blocks};
            const FitResult f = censmax::fit(apply_censoring(layout, u), EstimatorSpec::mple());
            BootstrapOptions o;
            o.B = B;
            o.seed = seed;
            o.return_periods = periods;
            o.sim_years = sim_years;
            o.fix_xi = fix_xi;
            const BootstrapDistribution d = parametric_bootstrap(f, layout, o);
            py::list rows;
            for (const Interval& iv : d.intervals) rows.append(py::make_tuple(iv.name, iv.point, iv.lo, iv.hi));
            py::dict out;
            out["intervals"] = rows;
            out["n_used"] = d.n_used;
            out["n_dropped"] = d.n_dropped;
            out["unreliable"] = d.unreliable;
            return out;
        },
        py::arg("times"), py::arg("values"), py::arg("u"), py::arg("B") = 200, py::arg("seed") = 1,
        py::arg("return_periods") = std::vector<double>{10, 20, 50, 100}, py::arg("sim_years") = 1000.0,
        py::arg("fix_xi") = false, py::arg("blocks") = std::vector<int>{});

    m.def(
        "read_timeseries",
        [](const std::string& path) {
            const ReadResult r = read_timeseries(path);
            std::vector<double> t, x;
            for (const RawRecord& rec : r.records) {
                t.push_back(rec.time);
                x.push_back(rec.value);
            }
            return py::make_tuple(t, x);
        },
        py::arg("path"));

#ifdef VERSION_INFO
    m.attr("__version__") = MACRO_STRINGIFY(VERSION_INFO);
#else
    m.attr("__version__") = "dev";
#endif
}
