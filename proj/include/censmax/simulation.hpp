#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "censmax/composite_likelihood.hpp"
#include "censmax/distributions.hpp"
#include "censmax/time_series.hpp"

namespace censmax {

struct SamplingScheme {
    enum class Kind { Regular, UniformGaps, Explicit };

    Kind kind = Kind::Regular;
    double step = 1.0;      // Regular: spacing in days
    double gap_lo = 0.0;    // UniformGaps: gap ~ U(gap_lo, gap_hi)
    double gap_hi = 2.0;
    double horizon = 365.0; // days; times lie in [0, horizon)
    std::vector<double> times;  // Explicit

    static SamplingScheme regular(double step, double horizon);
    static SamplingScheme uniform_gaps(double lo, double hi, double horizon);
    static SamplingScheme explicit_times(std::vector<double> times);

    // Throws ConfigError.
    void validate() const;
};

// Regular: 0, step, 2 step, ... below horizon. UniformGaps: starts at 0 and
// accumulates i.i.d. gaps while below horizon. Explicit: passthrough.
std::vector<double> make_times(const SamplingScheme& scheme, std::uint64_t seed);

struct ReferenceModelSpec {
    enum class Kind { IID, AR1, LogArmax, OU };

    Kind kind = Kind::IID;
    double alpha = 0.2;

    void validate() const;
};

// IID: standard normal. AR1: X_t = alpha X_{t-1} + sqrt(1 - alpha^2) e_t, one
// step per observation. LogArmax: X = log U with U_t = max((1-alpha) U_{t-1},
// alpha e_t), e unit Frechet, one step per observation. OU: exact Gaussian
// transition over the actual time gaps. All start in their stationary law.
TimeSeries simulate_reference(const ReferenceModelSpec& spec, const SamplingScheme& scheme, std::uint64_t seed);
TimeSeries simulate_reference(const ReferenceModelSpec& spec, std::vector<double> times, std::uint64_t seed);

struct PoissonPointConfig {
    double window_pad = 6.0;             // storm kernels are truncated beyond window_pad * nu
    std::size_t max_points = 1'000'000;  // cap on storms drawn in one storm cell

    void validate() const;
};

// Unit-Frechet Smith process
//   Z_t = max_i zeta_i / (nu sqrt(2 pi)) exp(-(s_i - t)^2 / (2 nu^2))
// sampled exactly (up to kernel truncation) at the given non-decreasing times.
std::vector<double> simulate_smith_frechet(std::span<const double> times, double nu, std::uint64_t seed,
                                           const PoissonPointConfig& cfg = {});

// GEV-margin process X_t = from_frechet(Z_t).
TimeSeries simulate_smith(std::vector<double> times, const GevMargin& margin, double nu, std::uint64_t seed,
                          const PoissonPointConfig& cfg = {});

// Independent realizations per block of `layout` (times restart per block);
// block_ids are copied to the result.
TimeSeries simulate_smith_blocks(const TimeSeries& layout, const GevMargin& margin, double nu, std::uint64_t seed,
                                 const PoissonPointConfig& cfg = {});

// Y_t = max(X_t, u). Block labels are preserved.
CensoredSample apply_censoring(const TimeSeries& series, double u);

}  // namespace censmax
