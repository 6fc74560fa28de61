#include "pano/bounds.hpp"

#include <cmath>

namespace pano {

TransformedVector precompute_tails(std::span<const float> coeffs, const LevelSpec& levels) {
    PANO_REQUIRE(levels.dim == coeffs.size(), "precompute_tails: dimension mismatch");
    const std::size_t L = levels.num_levels();
    TransformedVector out;
    out.coeffs.assign(coeffs.begin(), coeffs.end());
    out.tails.assign(L + 1, 0.0);
    // single backward pass; tails[L] = 0 by construction
    double acc = 0.0;
    std::size_t level = L;
    for (std::size_t j = levels.dim; j-- > 0;) {
        while (level > 0 && levels.thresholds[level] > j) {
            --level;
        }
        // j < thresholds[level+1]; acc currently holds sum over indices > j
        acc += static_cast<double>(coeffs[j]) * static_cast<double>(coeffs[j]);
        if (levels.thresholds[level] == j) {
            out.tails[level] = acc;
        }
    }
    return out;
}

RefineState init_refine_state(const TransformedVector& q, const TransformedVector& x) {
    RefineState s;
    s.partial = 0.0;
    s.level = 0;
    distance_bounds(q.norm_sq(), x.norm_sq(), 0.0, q.tails[0], x.tails[0], s.lb, s.ub);
    return s;
}

RefineState refine_step(const RefineState& state, const TransformedVector& q,
                        const TransformedVector& x, std::size_t level, const LevelSpec& levels) {
    PANO_REQUIRE(level >= 1 && level <= levels.num_levels(), "refine_step: level out of range");
    PANO_REQUIRE(state.level == level - 1, "refine_step: level skipped");
    RefineState next = state;
    const std::size_t begin = levels.level_begin(level);
    const std::size_t end = levels.level_end(level);
    double acc = 0.0;
    for (std::size_t j = begin; j < end; ++j) {
        acc += static_cast<double>(q.coeffs[j]) * static_cast<double>(x.coeffs[j]);
    }
    next.partial += acc;
    next.level = level;
    distance_bounds(q.norm_sq(), x.norm_sq(), next.partial, q.tails[level], x.tails[level],
                    next.lb, next.ub);
    return next;
}

double refine_exact(const TransformedVector& q, const TransformedVector& x,
                    const LevelSpec& levels) {
    RefineState s = init_refine_state(q, x);
    for (std::size_t l = 1; l <= levels.num_levels(); ++l) {
        s = refine_step(s, q, x, l, levels);
    }
    return s.lb;
}

}  // namespace pano
