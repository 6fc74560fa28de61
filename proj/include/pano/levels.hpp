#pragma once

#include <cstddef>
#include <vector>

#include "pano/common.hpp"

namespace pano {

/// Partition of the d transformed dimensions into L refinement levels via
/// strictly increasing thresholds 0 = m_0 < m_1 < ... < m_L = d. Level l
/// (1-based) covers coefficient indices [m_{l-1}, m_l).
struct LevelSpec {
    std::size_t dim = 0;
    std::vector<std::size_t> thresholds;  // m_0 .. m_L

    std::size_t num_levels() const { return thresholds.empty() ? 0 : thresholds.size() - 1; }
    std::size_t level_begin(std::size_t level) const { return thresholds[level - 1]; }
    std::size_t level_end(std::size_t level) const { return thresholds[level]; }
    std::size_t level_width(std::size_t level) const {
        return thresholds[level] - thresholds[level - 1];
    }

    void validate() const;

    bool operator==(const LevelSpec& o) const = default;
};

/// Default engine granularity: L = min(d, max_levels) equal-width levels,
/// remainder absorbed by the last level.
LevelSpec make_uniform_levels(std::size_t dim, std::size_t max_levels = 32);

/// One level per dimension (finest granularity).
LevelSpec make_per_dimension_levels(std::size_t dim);

/// Explicit interior thresholds (m_1 .. m_{L-1}); 0 and d are added.
LevelSpec make_levels(std::size_t dim, const std::vector<std::size_t>& interior);

}  // namespace pano
