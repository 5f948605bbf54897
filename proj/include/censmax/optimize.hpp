#pragma once

#include <functional>
#include <span>
#include <vector>

namespace censmax {

// Objective to minimize; +inf (or NaN) marks an infeasible point.
using Objective = std::function<double(std::span<const double>)>;

struct SimplexOptions {
    int max_evals = 4000;
    double ftol = 1e-8;  // spread of objective values across the simplex
    double xtol = 1e-6;  // max distance (inf-norm) of a vertex from the best one
    int restarts = 1;
};

struct SimplexResult {
    std::vector<double> x;
    double f;
    int n_evals;
    bool converged;
};

// Nelder-Mead with reflection, expansion, contraction and shrink steps. After
// convergence the search is restarted from the best vertex with the initial
// step sizes, up to `restarts` times, while it keeps improving.
// Never returns a point worse than x0. Throws NumericalError if f(x0) is not finite.
SimplexResult nelder_mead(const Objective& f, std::vector<double> x0, std::vector<double> steps,
                          const SimplexOptions& opt);

struct ScalarResult {
    double x;
    double f;
    int n_evals;
    bool used_grid;  // unimodality check failed and the grid fallback ran
};

// Minimizes g over [lo, hi] by golden-section search. The result is compared
// with five probe points (the bounds and quartiles); when a probe beats it the
// function is assumed multimodal and a `grid_points` scan is refined instead.
ScalarResult golden_section_min(const std::function<double(double)>& g, double lo, double hi, double tol,
                                int grid_points);

}  // namespace censmax
