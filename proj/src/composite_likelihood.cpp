#include "censmax/composite_likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "censmax/error.hpp"
#include "censmax/log.hpp"

namespace censmax {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Per-observation transforms under one parameter value; empty when theta is infeasible.
std::vector<CensoredPoint> prepare_points(const SmithParams& theta, const CensoredSample& sample) {
    std::vector<CensoredPoint> pts;
    if (!theta.margin.valid()) return pts;
    SmithParams p = theta;
    p.u = sample.u;
    pts.reserve(sample.size());
    for (double y : sample.values) pts.push_back(censored_point(y, p));
    return pts;
}

double marginal_term(const CensoredPoint& q) noexcept {
    if (q.censored) {
        // log F(u) = -1/z
        if (q.log_z == -std::numeric_limits<double>::infinity()) return kNegInf;
        return -std::exp(-q.log_z);
    }
    if (!std::isfinite(q.log_z)) return kNegInf;
    // f(y) = exp(-1/z) * dz/dx / z^2
    return -std::exp(-q.log_z) - 2.0 * q.log_z + q.log_dzdx;
}

}  // namespace

std::vector<std::pair<std::size_t, std::size_t>> block_ranges(const std::vector<int>& block_ids, std::size_t n) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    if (n == 0) return out;
    if (block_ids.empty()) {
        out.emplace_back(0, n);
        return out;
    }
    std::size_t start = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (block_ids[i] != block_ids[i - 1]) {
            out.emplace_back(start, i);
            start = i;
        }
    }
    out.emplace_back(start, n);
    return out;
}

CensoredSample CensoredSample::make(std::vector<double> times, std::vector<double> values, double u,
                                    std::vector<int> block_ids) {
    if (times.size() != values.size()) throw DataError("censored sample: times and values differ in length");
    if (!block_ids.empty() && block_ids.size() != values.size()) {
        throw DataError("censored sample: block_ids and values differ in length");
    }
    if (std::isnan(u) || u == std::numeric_limits<double>::infinity()) {
        throw ConfigError("censored sample: threshold must be a number or -inf");
    }
    const auto ranges = block_ranges(block_ids, values.size());
    if (!block_ids.empty()) {
        std::vector<int> seen;
        for (auto [b, e] : ranges) {
            if (std::find(seen.begin(), seen.end(), block_ids[b]) != seen.end()) {
                std::ostringstream os;
                os << "censored sample: block " << block_ids[b] << " is not contiguous";
                throw DataError(os.str());
            }
            seen.push_back(block_ids[b]);
        }
    }

    CensoredSample s;
    s.u = u;
    s.times.reserve(times.size());
    s.values.reserve(values.size());
    if (!block_ids.empty()) s.block_ids.reserve(block_ids.size());
    for (auto [b, e] : ranges) {
        for (std::size_t i = b; i < e; ++i) {
            if (!std::isfinite(times[i]) || std::isnan(values[i])) {
                std::ostringstream os;
                os << "censored sample: non-finite entry at index " << i;
                throw DataError(os.str());
            }
            if (values[i] < u) {
                std::ostringstream os;
                os << "censored sample: value " << values[i] << " at index " << i << " lies below threshold " << u;
                throw CensoringError(os.str());
            }
            if (i > b) {
                if (times[i] < times[i - 1]) {
                    std::ostringstream os;
                    os << "censored sample: times decrease at index " << i;
                    throw DataError(os.str());
                }
                if (times[i] == s.times.back()) {
                    ++s.dropped_ties;
                    continue;
                }
            }
            s.times.push_back(times[i]);
            s.values.push_back(values[i]);
            if (!block_ids.empty()) s.block_ids.push_back(block_ids[i]);
        }
    }
    if (s.dropped_ties > 0) {
        std::ostringstream os;
        os << "dropped " << s.dropped_ties << " observation(s) with tied time stamps (kept the first)";
        warn(os.str());
    }
    return s;
}

std::size_t CensoredSample::n_uncensored() const noexcept {
    return static_cast<std::size_t>(std::count_if(values.begin(), values.end(), [this](double v) { return v > u; }));
}

PairWeightPlan build_pair_plan(const CensoredSample& sample, PairStrategy strategy, double K) {
    PairWeightPlan plan;
    plan.strategy = strategy;
    plan.K = K;
    if (strategy == PairStrategy::IndexWindow) {
        if (!(K >= 1.0) || K != std::floor(K) || K > 1e9) {
            std::ostringstream os;
            os << "index-window K must be a positive integer, got " << K;
            throw ConfigError(os.str());
        }
        const auto k = static_cast<std::size_t>(K);
        for (auto [b, e] : sample.blocks()) {
            for (std::size_t i = b; i < e; ++i) {
                for (std::size_t j = i + 1; j < e && j <= i + k; ++j) {
                    plan.pairs.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
                }
            }
        }
    } else {
        if (!(K > 0.0) || !std::isfinite(K)) {
            std::ostringstream os;
            os << "time-window K must be positive, got " << K;
            throw ConfigError(os.str());
        }
        for (auto [b, e] : sample.blocks()) {
            for (std::size_t i = b; i < e; ++i) {
                for (std::size_t j = i + 1; j < e && sample.times[j] - sample.times[i] <= K; ++j) {
                    plan.pairs.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
                }
            }
        }
    }
    return plan;
}

double independent_loglik(const SmithParams& theta, const CensoredSample& sample) {
    const auto pts = prepare_points(theta, sample);
    if (pts.size() != sample.size()) return kNegInf;
    double total = 0.0;
    for (const CensoredPoint& q : pts) {
        total += marginal_term(q);
        if (total == kNegInf) return kNegInf;
    }
    return total;
}

double interior_independent_loglik(const SmithParams& theta, const CensoredSample& sample) {
    const auto pts = prepare_points(theta, sample);
    if (pts.size() != sample.size()) return kNegInf;
    double total = 0.0;
    for (auto [b, e] : sample.blocks()) {
        for (std::size_t i = b + 1; i + 1 < e; ++i) total += marginal_term(pts[i]);
    }
    return total;
}

double pairwise_loglik(const SmithParams& theta, const CensoredSample& sample, const PairWeightPlan& plan) {
    if (!(theta.nu > 0.0) || !std::isfinite(theta.nu)) return kNegInf;
    const auto pts = prepare_points(theta, sample);
    if (pts.size() != sample.size()) return kNegInf;
    const double inv_nu = 1.0 / theta.nu;
    double total = 0.0;
    for (auto [i, j] : plan.pairs) {
        const double a = std::fabs(sample.times[j] - sample.times[i]) * inv_nu;
        total += censored_pair_logdensity(pts[i], pts[j], a);
        if (total == kNegInf || std::isnan(total)) return kNegInf;
    }
    return total;
}

double markov_loglik(const SmithParams& theta, const CensoredSample& sample) {
    if (!(theta.nu > 0.0) || !std::isfinite(theta.nu)) return kNegInf;
    const auto pts = prepare_points(theta, sample);
    if (pts.size() != sample.size()) return kNegInf;
    const double inv_nu = 1.0 / theta.nu;
    double total = 0.0;
    for (auto [b, e] : sample.blocks()) {
        if (e - b == 1) {
            total += marginal_term(pts[b]);
            continue;
        }
        for (std::size_t i = b + 1; i < e; ++i) {
            const double a = (sample.times[i] - sample.times[i - 1]) * inv_nu;
            total += censored_pair_logdensity(pts[i - 1], pts[i], a);
        }
        for (std::size_t i = b + 1; i + 1 < e; ++i) total -= marginal_term(pts[i]);
        if (total == kNegInf || std::isnan(total)) return kNegInf;
    }
    return total;
}

}  // namespace censmax
