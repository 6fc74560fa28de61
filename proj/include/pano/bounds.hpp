#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "pano/common.hpp"
#include "pano/levels.hpp"

namespace pano {

/// A transformed vector together with its precomputed per-level tail
/// energies: tails[l] = sum of squared coefficients after the first m_l
/// dimensions. tails[0] is the squared norm, tails[L] is 0.
struct TransformedVector {
    std::vector<float> coeffs;
    std::vector<double> tails;

    double norm_sq() const { return tails.empty() ? 0.0 : tails[0]; }
};

/// Running refinement state for one (query, candidate) pair: the partial
/// inner product over consumed levels, the current level, and the distance
/// bounds at that level.
struct RefineState {
    double partial = 0.0;  // p^(0,level), accumulated in wide precision
    std::size_t level = 0;
    double lb = 0.0;
    double ub = 0.0;
    bool pruned = false;
};

/// Computes the tail-energy table for one vector in a single backward pass.
TransformedVector precompute_tails(std::span<const float> coeffs, const LevelSpec& levels);

/// Distance bounds from a partial inner product and the remaining tail
/// energies of both vectors:
///   lb = |q|^2 + |x|^2 - 2(p + sqrt(Rq Rx))
///   ub = |q|^2 + |x|^2 - 2(p - sqrt(Rq Rx))
/// Tails are clamped at zero before the root; rounding can leave a
/// residual like -1e-18.
inline void distance_bounds(double norm_sq_q, double norm_sq_x, double partial, double tail_q,
                            double tail_x, double& lb, double& ub) {
    double radicand = std::max(0.0, tail_q) * std::max(0.0, tail_x);
    double cross = std::sqrt(radicand);
    double base = norm_sq_q + norm_sq_x;
    lb = base - 2.0 * (partial + cross);
    ub = base - 2.0 * (partial - cross);
}

/// Level-0 state: no coefficients consumed, bounds from norms alone,
/// lb = (|q|-|x|)^2 and ub = (|q|+|x|)^2.
RefineState init_refine_state(const TransformedVector& q, const TransformedVector& x);

/// Consumes level `level` (state.level must be level-1) and tightens the
/// bounds. At the last level lb == ub == the exact squared distance.
RefineState refine_step(const RefineState& state, const TransformedVector& q,
                        const TransformedVector& x, std::size_t level, const LevelSpec& levels);

/// Exact squared distance via the decomposition route, refining through all
/// levels.
double refine_exact(const TransformedVector& q, const TransformedVector& x,
                    const LevelSpec& levels);

}  // namespace pano
