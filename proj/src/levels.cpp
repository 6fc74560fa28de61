#include "pano/levels.hpp"

#include <algorithm>

namespace pano {

void LevelSpec::validate() const {
    PANO_REQUIRE(dim >= 1, "LevelSpec: dimension must be >= 1");
    PANO_REQUIRE(thresholds.size() >= 2, "LevelSpec: need at least one level");
    PANO_REQUIRE(thresholds.front() == 0, "LevelSpec: first threshold must be 0");
    PANO_REQUIRE(thresholds.back() == dim, "LevelSpec: last threshold must be d");
    for (std::size_t i = 1; i < thresholds.size(); ++i) {
        PANO_REQUIRE(thresholds[i - 1] < thresholds[i],
                     "LevelSpec: thresholds must be strictly increasing");
    }
}

LevelSpec make_uniform_levels(std::size_t dim, std::size_t max_levels) {
    PANO_REQUIRE(dim >= 1, "levels: dimension must be >= 1");
    PANO_REQUIRE(max_levels >= 1, "levels: need at least one level");
    std::size_t L = std::min(dim, max_levels);
    std::size_t width = dim / L;  // remainder goes to the last level
    LevelSpec spec;
    spec.dim = dim;
    spec.thresholds.reserve(L + 1);
    for (std::size_t l = 0; l < L; ++l) {
        spec.thresholds.push_back(l * width);
    }
    spec.thresholds.push_back(dim);
    spec.validate();
    return spec;
}

LevelSpec make_per_dimension_levels(std::size_t dim) {
    return make_uniform_levels(dim, dim);
}

LevelSpec make_levels(std::size_t dim, const std::vector<std::size_t>& interior) {
    LevelSpec spec;
    spec.dim = dim;
    spec.thresholds.push_back(0);
    for (std::size_t m : interior) {
        spec.thresholds.push_back(m);
    }
    spec.thresholds.push_back(dim);
    spec.validate();
    return spec;
}

}  // namespace pano
