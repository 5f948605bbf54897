#include "censmax/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "censmax/error.hpp"

namespace censmax {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sanitize(double v) { return std::isnan(v) ? kInf : v; }

struct Run {
    std::vector<double> x;
    double f;
    int evals;
    bool converged;
};

Run simplex_run(const Objective& f, const std::vector<double>& x0, double f0, const std::vector<double>& steps,
                int budget, double ftol, double xtol) {
    const std::size_t d = x0.size();
    std::vector<std::vector<double>> pts(d + 1, x0);
    std::vector<double> fv(d + 1, f0);
    int evals = 0;
    auto eval = [&](const std::vector<double>& x) {
        ++evals;
        return sanitize(f(x));
    };
    for (std::size_t i = 0; i < d; ++i) {
        pts[i + 1][i] += steps[i];
        fv[i + 1] = eval(pts[i + 1]);
        if (!std::isfinite(fv[i + 1])) {
            // Try the opposite direction before giving up on this vertex.
            pts[i + 1][i] = x0[i] - steps[i];
            fv[i + 1] = eval(pts[i + 1]);
        }
    }

    std::vector<std::size_t> order(d + 1);
    std::vector<double> centroid(d), xr(d), xe(d), xc(d);
    bool converged = false;
    while (evals < budget) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        const std::size_t best = order.front(), worst = order.back(), second = order[d - 1];

        double spread = fv[worst] - fv[best];
        double diam = 0.0;
        for (std::size_t i = 0; i <= d; ++i) {
            for (std::size_t k = 0; k < d; ++k) diam = std::max(diam, std::fabs(pts[i][k] - pts[best][k]));
        }
        if (std::isfinite(spread) && spread < ftol && diam < xtol) {
            converged = true;
            break;
        }
        if (diam < 1e-14) {
            // Collapsed simplex with an infinite vertex; nothing left to gain.
            converged = std::isfinite(fv[best]);
            break;
        }

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i <= d; ++i) {
            if (i == worst) continue;
            for (std::size_t k = 0; k < d; ++k) centroid[k] += pts[i][k] / static_cast<double>(d);
        }
        for (std::size_t k = 0; k < d; ++k) xr[k] = centroid[k] + (centroid[k] - pts[worst][k]);
        const double fr = eval(xr);
        if (fr < fv[best]) {
            for (std::size_t k = 0; k < d; ++k) xe[k] = centroid[k] + 2.0 * (centroid[k] - pts[worst][k]);
            const double fe = eval(xe);
            if (fe < fr) {
                pts[worst] = xe;
                fv[worst] = fe;
            } else {
                pts[worst] = xr;
                fv[worst] = fr;
            }
            continue;
        }
        if (fr < fv[second]) {
            pts[worst] = xr;
            fv[worst] = fr;
            continue;
        }
        const bool outside = fr < fv[worst];
        for (std::size_t k = 0; k < d; ++k) {
            xc[k] = outside ? centroid[k] + 0.5 * (xr[k] - centroid[k])
                            : centroid[k] + 0.5 * (pts[worst][k] - centroid[k]);
        }
        const double fc = eval(xc);
        if (fc < std::min(fr, fv[worst])) {
            pts[worst] = xc;
            fv[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i <= d; ++i) {
            if (i == best) continue;
            for (std::size_t k = 0; k < d; ++k) pts[i][k] = pts[best][k] + 0.5 * (pts[i][k] - pts[best][k]);
            fv[i] = eval(pts[i]);
        }
    }
    const auto it = std::min_element(fv.begin(), fv.end());
    const auto bi = static_cast<std::size_t>(it - fv.begin());
    return {pts[bi], fv[bi], evals, converged};
}

}  // namespace

SimplexResult nelder_mead(const Objective& f, std::vector<double> x0, std::vector<double> steps,
                          const SimplexOptions& opt) {
    if (steps.size() != x0.size()) throw NumericalError("nelder_mead: step vector has the wrong length");
    const double f0 = sanitize(f(x0));
    if (!std::isfinite(f0)) throw NumericalError("nelder_mead: objective is not finite at the starting point");
    if (x0.empty()) return {x0, f0, 1, true};

    SimplexResult best{x0, f0, 1, false};
    for (int attempt = 0; attempt <= opt.restarts; ++attempt) {
        const int budget = opt.max_evals - best.n_evals;
        if (budget <= 0) break;
        Run r = simplex_run(f, best.x, best.f, steps, budget, opt.ftol, opt.xtol);
        best.n_evals += r.evals;
        const bool improved = r.f < best.f - opt.ftol;
        if (r.f < best.f) {
            best.x = std::move(r.x);
            best.f = r.f;
        }
        best.converged = r.converged;
        if (!r.converged || !improved) break;
    }
    return best;
}

ScalarResult golden_section_min(const std::function<double(double)>& g, double lo, double hi, double tol,
                                int grid_points) {
    int evals = 0;
    auto eval = [&](double x) {
        ++evals;
        return sanitize(g(x));
    };
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;

    auto golden = [&](double a, double b) {
        double c = b - invphi * (b - a);
        double d = a + invphi * (b - a);
        double fc = eval(c), fd = eval(d);
        while (b - a > tol) {
            if (fc <= fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - invphi * (b - a);
                fc = eval(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + invphi * (b - a);
                fd = eval(d);
            }
        }
        return fc <= fd ? std::pair{c, fc} : std::pair{d, fd};
    };

    auto [x, fx] = golden(lo, hi);
    bool multimodal = !std::isfinite(fx);
    for (int k = 0; k <= 8; ++k) {
        const double xp = lo + 0.125 * k * (hi - lo);
        const double fp = eval(xp);
        if (fp < fx - 1e-12) multimodal = true;
        if (fp < fx) {
            x = xp;
            fx = fp;
        }
    }
    if (!multimodal) return {x, fx, evals, false};

    const int n = std::max(grid_points, 3);
    const double h = (hi - lo) / (n - 1);
    int best = 0;
    double fbest = kInf;
    for (int i = 0; i < n; ++i) {
        const double fi = eval(lo + i * h);
        if (fi < fbest) {
            fbest = fi;
            best = i;
        }
    }
    const double a = lo + std::max(best - 1, 0) * h;
    const double b = lo + std::min(best + 1, n - 1) * h;
    auto [xr, fr] = golden(a, b);
    if (fbest < fx) {
        x = lo + best * h;
        fx = fbest;
    }
    if (fr < fx) {
        x = xr;
        fx = fr;
    }
    return {x, fx, evals, true};
}

}  // namespace censmax
