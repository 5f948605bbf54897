#include "censmax/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "censmax/error.hpp"
#include "censmax/rng.hpp"

namespace censmax {

SamplingScheme SamplingScheme::regular(double step, double horizon) {
    SamplingScheme s;
    s.kind = Kind::Regular;
    s.step = step;
    s.horizon = horizon;
    return s;
}

SamplingScheme SamplingScheme::uniform_gaps(double lo, double hi, double horizon) {
    SamplingScheme s;
    s.kind = Kind::UniformGaps;
    s.gap_lo = lo;
    s.gap_hi = hi;
    s.horizon = horizon;
    return s;
}

SamplingScheme SamplingScheme::explicit_times(std::vector<double> times) {
    SamplingScheme s;
    s.kind = Kind::Explicit;
    s.horizon = times.empty() ? 0.0 : times.back();
    s.times = std::move(times);
    return s;
}

void SamplingScheme::validate() const {
    switch (kind) {
    case Kind::Regular:
        if (!(step > 0.0) || !std::isfinite(step)) throw ConfigError("regular sampling: step must be positive");
        if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw ConfigError("sampling horizon must be finite");
        break;
    case Kind::UniformGaps:
        if (!(gap_lo >= 0.0 && gap_lo < gap_hi) || !std::isfinite(gap_hi)) {
            throw ConfigError("uniform-gap sampling: need 0 <= lo < hi");
        }
        if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw ConfigError("sampling horizon must be finite");
        break;
    case Kind::Explicit:
        for (std::size_t i = 1; i < times.size(); ++i) {
            if (!(times[i] > times[i - 1])) throw ConfigError("explicit sampling: times must be strictly increasing");
        }
        break;
    }
}

std::vector<double> make_times(const SamplingScheme& scheme, std::uint64_t seed) {
    scheme.validate();
    std::vector<double> out;
    switch (scheme.kind) {
    case SamplingScheme::Kind::Regular: {
        const auto n = static_cast<std::size_t>(std::ceil(scheme.horizon / scheme.step));
        out.reserve(n);
        for (std::size_t k = 0;; ++k) {
            const double t = static_cast<double>(k) * scheme.step;
            if (!(t < scheme.horizon)) break;
            out.push_back(t);
        }
        break;
    }
    case SamplingScheme::Kind::UniformGaps: {
        Rng rng(seed);
        double t = 0.0;
        while (t < scheme.horizon) {
            out.push_back(t);
            t += rng.uniform(scheme.gap_lo, scheme.gap_hi);
        }
        break;
    }
    case SamplingScheme::Kind::Explicit:
        out = scheme.times;
        break;
    }
    return out;
}

void ReferenceModelSpec::validate() const {
    switch (kind) {
    case Kind::IID:
        break;
    case Kind::AR1:
        if (!(std::fabs(alpha) < 1.0)) throw ConfigError("AR(1): need |alpha| < 1");
        break;
    case Kind::LogArmax:
        if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("logARMAX(1): need 0 < alpha < 1");
        break;
    case Kind::OU:
        if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("OU: need alpha > 0");
        break;
    }
}

TimeSeries simulate_reference(const ReferenceModelSpec& spec, const SamplingScheme& scheme, std::uint64_t seed) {
    return simulate_reference(spec, make_times(scheme, derive_seed(seed, {0x7157})), seed);
}

TimeSeries simulate_reference(const ReferenceModelSpec& spec, std::vector<double> times, std::uint64_t seed) {
    spec.validate();
    TimeSeries ts;
    ts.times = std::move(times);
    const std::size_t n = ts.times.size();
    ts.values.resize(n);
    if (n == 0) return ts;
    Rng rng(seed);
    const double a = spec.alpha;
    switch (spec.kind) {
    case ReferenceModelSpec::Kind::IID:
        for (double& v : ts.values) v = rng.normal();
        break;
    case ReferenceModelSpec::Kind::AR1: {
        const double innov = std::sqrt(1.0 - a * a);
        double x = rng.normal();
        for (std::size_t i = 0; i < n; ++i) {
            if (i > 0) x = a * x + innov * rng.normal();
            ts.values[i] = x;
        }
        break;
    }
    case ReferenceModelSpec::Kind::LogArmax: {
        double u = rng.frechet();
        for (std::size_t i = 0; i < n; ++i) {
            if (i > 0) u = std::max((1.0 - a) * u, a * rng.frechet());
            ts.values[i] = std::log(u);
        }
        break;
    }
    case ReferenceModelSpec::Kind::OU: {
        double x = rng.normal();
        for (std::size_t i = 0; i < n; ++i) {
            if (i > 0) {
                const double dt = ts.times[i] - ts.times[i - 1];
                const double rho = std::exp(-a * dt);
                x = rho * x + std::sqrt(-std::expm1(-2.0 * a * dt)) * rng.normal();
            }
            ts.values[i] = x;
        }
        break;
    }
    }
    return ts;
}

void PoissonPointConfig::validate() const {
    if (!(window_pad >= 4.0) || !std::isfinite(window_pad)) throw ConfigError("window_pad must be >= 4");
    if (max_points == 0) throw ConfigError("max_points must be positive");
}

namespace {

// The storm-centre axis is cut into cells of width 2 nu on a lattice anchored
// at 0. Poisson points in disjoint cells are independent, so each cell draws
// its own decreasing-intensity sequence from a seed tied to its lattice index.
// A cell stops once no further storm can raise any grid value it reaches.
class StormCells {
public:
    StormCells(std::span<const double> times, double nu, std::uint64_t seed, const PoissonPointConfig& cfg)
        : t_(times), nu_(nu), seed_(seed), cfg_(cfg), z_(times.size(), 0.0) {
        width_ = 2.0 * nu;
        reach_ = cfg.window_pad * nu;
        peak_ = 1.0 / (nu * std::sqrt(2.0 * std::numbers::pi));
        inv_two_nu2_ = 1.0 / (2.0 * nu * nu);
    }

    std::vector<double> run() {
        const std::vector<std::int64_t> cells = relevant_cells();
        // Pass 1: every grid point receives a positive value from its own cell.
        for (std::int64_t k : cells) {
            auto [i0, i1] = indices_within(cell_lo(k), cell_lo(k) + width_);
            if (i0 == i1) continue;
            Stream st(seed_, k, width_);
            for (;;) {
                const Storm s = st.next(cfg_.max_points);
                if (s.zeta * peak_ < min_z(i0, i1)) break;
                apply(s, reach_);
            }
        }
        floor_ = z_.empty() ? 0.0 : *std::min_element(z_.begin(), z_.end());
        // Pass 2: replay each cell (max is idempotent) until its weakest
        // remaining storm cannot exceed any reachable grid value.
        for (std::int64_t k : cells) {
            const double threshold = stop_intensity(k);
            Stream st(seed_, k, width_);
            for (;;) {
                const Storm s = st.next(cfg_.max_points);
                if (s.zeta < threshold) break;
                apply(s, influence_radius(s.zeta));
            }
        }
        return std::move(z_);
    }

private:
    struct Storm {
        double zeta;
        double s;
    };

    class Stream {
    public:
        Stream(std::uint64_t seed, std::int64_t cell, double width)
            : rng_(derive_seed(seed, {static_cast<std::uint64_t>(cell)})),
              lo_(static_cast<double>(cell) * width),
              width_(width) {}

        Storm next(std::size_t cap) {
            if (++count_ > cap) {
                std::ostringstream os;
                os << "Smith simulation: more than " << cap << " storms in one cell; raise max_points";
                throw ResolutionError(os.str());
            }
            gamma_ += rng_.exponential();
            return {width_ / gamma_, lo_ + width_ * rng_.uniform()};
        }

    private:
        Rng rng_;
        double lo_;
        double width_;
        double gamma_ = 0.0;
        std::size_t count_ = 0;
    };

    double cell_lo(std::int64_t k) const { return static_cast<double>(k) * width_; }

    std::int64_t cell_of(double s) const { return static_cast<std::int64_t>(std::floor(s / width_)); }

    std::vector<std::int64_t> relevant_cells() const {
        std::vector<std::int64_t> cells;
        for (double t : t_) {
            const std::int64_t a = cell_of(t - reach_);
            const std::int64_t b = cell_of(t + reach_);
            std::int64_t from = cells.empty() ? a : std::max(a, cells.back() + 1);
            for (std::int64_t k = from; k <= b; ++k) cells.push_back(k);
        }
        return cells;
    }

    std::pair<std::size_t, std::size_t> indices_within(double lo, double hi) const {
        const auto b = std::lower_bound(t_.begin(), t_.end(), lo);
        const auto e = std::upper_bound(b, t_.end(), hi);
        return {static_cast<std::size_t>(b - t_.begin()), static_cast<std::size_t>(e - t_.begin())};
    }

    double min_z(std::size_t i0, std::size_t i1) const {
        double m = z_[i0];
        for (std::size_t i = i0 + 1; i < i1; ++i) m = std::min(m, z_[i]);
        return m;
    }

    // Smallest zeta that could still raise a grid value reached from cell k.
    double stop_intensity(std::int64_t k) const {
        const double lo = cell_lo(k), hi = lo + width_;
        auto [i0, i1] = indices_within(lo - reach_, hi + reach_);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = i0; i < i1; ++i) {
            const double d = t_[i] < lo ? lo - t_[i] : (t_[i] > hi ? t_[i] - hi : 0.0);
            best = std::min(best, z_[i] / (peak_ * std::exp(-d * d * inv_two_nu2_)));
        }
        return best;
    }

    double influence_radius(double zeta) const {
        const double top = zeta * peak_;
        if (!(floor_ > 0.0)) return reach_;
        if (top <= floor_) return 0.0;
        return std::min(reach_, nu_ * std::sqrt(2.0 * std::log(top / floor_)));
    }

    void apply(const Storm& s, double radius) {
        auto [i0, i1] = indices_within(s.s - radius, s.s + radius);
        const double top = s.zeta * peak_;
        for (std::size_t i = i0; i < i1; ++i) {
            const double d = t_[i] - s.s;
            const double v = top * std::exp(-d * d * inv_two_nu2_);
            if (v > z_[i]) z_[i] = v;
        }
    }

    std::span<const double> t_;
    double nu_;
    std::uint64_t seed_;
    PoissonPointConfig cfg_;
    std::vector<double> z_;
    double width_ = 0.0, reach_ = 0.0, peak_ = 0.0, inv_two_nu2_ = 0.0, floor_ = 0.0;
};

}  // namespace

std::vector<double> simulate_smith_frechet(std::span<const double> times, double nu, std::uint64_t seed,
                                           const PoissonPointConfig& cfg) {
    cfg.validate();
    if (!(nu > 0.0) || !std::isfinite(nu)) throw DomainError("simulate_smith: nu must be positive and finite");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!std::isfinite(times[i])) throw DomainError("simulate_smith: non-finite time");
        if (i > 0 && times[i] < times[i - 1]) throw DomainError("simulate_smith: times must be non-decreasing");
    }
    if (times.empty()) return {};
    return StormCells(times, nu, seed, cfg).run();
}

TimeSeries simulate_smith(std::vector<double> times, const GevMargin& margin, double nu, std::uint64_t seed,
                          const PoissonPointConfig& cfg) {
    margin.validate();
    TimeSeries ts;
    const std::vector<double> z = simulate_smith_frechet(times, nu, seed, cfg);
    ts.times = std::move(times);
    ts.values.resize(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) ts.values[i] = from_frechet(z[i], margin);
    return ts;
}

TimeSeries simulate_smith_blocks(const TimeSeries& layout, const GevMargin& margin, double nu, std::uint64_t seed,
                                 const PoissonPointConfig& cfg) {
    margin.validate();
    TimeSeries out;
    out.times = layout.times;
    out.block_ids = layout.block_ids;
    out.values.resize(layout.times.size());
    std::uint64_t index = 0;
    for (auto [b, e] : block_ranges(layout.block_ids, layout.times.size())) {
        std::span<const double> t(layout.times.data() + b, e - b);
        const auto z = simulate_smith_frechet(t, nu, derive_seed(seed, {0xb10c, index++}), cfg);
        for (std::size_t i = 0; i < z.size(); ++i) out.values[b + i] = from_frechet(z[i], margin);
    }
    return out;
}

CensoredSample apply_censoring(const TimeSeries& series, double u) {
    std::vector<double> v(series.values.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::max(series.values[i], u);
    return CensoredSample::make(series.times, std::move(v), u, series.block_ids);
}

}  // namespace censmax
