#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "censmax/smith_pairwise.hpp"
#include "censmax/time_series.hpp"

namespace censmax {

// Observed censored process Y_t = max(X_t, u) on arbitrary time stamps.
struct CensoredSample {
    std::vector<double> times;
    std::vector<double> values;
    double u = -std::numeric_limits<double>::infinity();
    std::vector<int> block_ids;    // empty: one block
    std::size_t dropped_ties = 0;  // tied time stamps removed by make()

    // Validates and normalizes: lengths must match, values >= u, times
    // non-decreasing inside each contiguous block. Later observations sharing
    // a time stamp with an earlier one are dropped with a warning.
    static CensoredSample make(std::vector<double> times, std::vector<double> values, double u,
                               std::vector<int> block_ids = {});

    std::size_t size() const noexcept { return values.size(); }
    std::size_t n_uncensored() const noexcept;
    std::vector<std::pair<std::size_t, std::size_t>> blocks() const { return block_ranges(block_ids, size()); }
};

enum class PairStrategy { IndexWindow, TimeWindow };

struct PairWeightPlan {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;  // i < j, same block
    PairStrategy strategy = PairStrategy::IndexWindow;
    double K = 1.0;
};

// IndexWindow keeps pairs with |i - j| <= K (K a positive integer);
// TimeWindow keeps pairs with |t_i - t_j| <= K days (K > 0). Pairs never
// cross block boundaries. Throws ConfigError for an invalid K.
PairWeightPlan build_pair_plan(const CensoredSample& sample, PairStrategy strategy, double K);

// The objectives below use sample.u as the threshold (theta.u is ignored) and
// return -inf instead of throwing when theta is infeasible.

double independent_loglik(const SmithParams& theta, const CensoredSample& sample);
double pairwise_loglik(const SmithParams& theta, const CensoredSample& sample, const PairWeightPlan& plan);
// Sum over blocks of log p(y_1) + sum log p(y_i | y_{i-1}), evaluated as the
// adjacent-pair sum minus the interior marginal terms.
double markov_loglik(const SmithParams& theta, const CensoredSample& sample);

// Independent log-likelihood restricted to interior points (2..n-1) of each block.
double interior_independent_loglik(const SmithParams& theta, const CensoredSample& sample);

}  // namespace censmax
