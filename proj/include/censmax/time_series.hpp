#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace censmax {

// Observations at increasing times (days). Optional block labels mark
// independent realizations (e.g. one per December); observations of a block
// are contiguous and times restart freely between blocks.
struct TimeSeries {
    std::vector<double> times;
    std::vector<double> values;
    std::vector<int> block_ids;  // empty: one block

    std::size_t size() const noexcept { return values.size(); }
    bool empty() const noexcept { return values.empty(); }
};

// Half-open index ranges [begin, end) of the contiguous blocks.
std::vector<std::pair<std::size_t, std::size_t>> block_ranges(const std::vector<int>& block_ids, std::size_t n);

}  // namespace censmax
