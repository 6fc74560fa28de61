#pragma once

// Shared test fixtures: synthetic data generators and the independent
// brute-force oracle the engine suites are checked against.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "pano/common.hpp"
#include "pano/engine.hpp"
#include "pano/transform.hpp"

namespace panotest {

using pano::idx_t;
using pano::MatrixF;
using pano::Neighbor;

/// Brute-force k smallest squared distances over rows of `coeffs`,
/// accumulating plain squared differences in doubles. Ties at the k-th
/// position break by ascending id. Independent of the bound-based
/// refinement path.
inline std::vector<Neighbor> brute_force_topk(const MatrixF& coeffs, std::span<const float> query,
                                              std::size_t k) {
    std::vector<Neighbor> all(coeffs.rows);
    for (std::size_t i = 0; i < coeffs.rows; ++i) {
        auto row = coeffs.row(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < query.size(); ++j) {
            double diff = static_cast<double>(query[j]) - static_cast<double>(row[j]);
            acc += diff * diff;
        }
        all[i] = {acc, static_cast<idx_t>(i)};
    }
    auto cmp = [](const Neighbor& a, const Neighbor& b) {
        return a.distance_sq != b.distance_sq ? a.distance_sq < b.distance_sq : a.id < b.id;
    };
    std::size_t keep = std::min(k, all.size());
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(), cmp);
    all.resize(keep);
    return all;
}

inline bool same_ids(const std::vector<Neighbor>& a, const std::vector<Neighbor>& b) {
    if (a.size() != b.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].id != b[i].id) {
            return false;
        }
    }
    return true;
}

inline MatrixF gaussian_matrix(std::size_t n, std::size_t d, std::uint64_t seed,
                               double stddev = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, stddev);
    MatrixF out(n, d);
    for (auto& v : out.values) {
        v = static_cast<float>(normal(rng));
    }
    return out;
}

inline pano::SkewParams random_skew(std::size_t d, std::uint64_t seed, double scale = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, scale);
    pano::SkewParams skew = pano::SkewParams::zeros(d);
    for (auto& u : skew.upper) {
        u = normal(rng);
    }
    return skew;
}

/// Gaussian data whose covariance eigenvalues decay as exp(-decay*j/d),
/// rotated by a random orthogonal matrix so the energy is hidden from the
/// coordinate axes. Queries drawn with the same rotation_seed are
/// in-distribution.
inline MatrixF compacted_gaussian(std::size_t n, std::size_t d, double decay, std::uint64_t seed,
                                  std::uint64_t rotation_seed = 0x9e3779b97f4a7c15ull) {
    pano::MatrixD rotation = pano::cayley_map(random_skew(d, rotation_seed), 1.0);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    MatrixF out(n, d);
    std::vector<double> scales(d);
    for (std::size_t j = 0; j < d; ++j) {
        scales[j] = std::sqrt(std::exp(-decay * static_cast<double>(j) / static_cast<double>(d)));
    }
    std::vector<double> g(d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            g[j] = scales[j] * normal(rng);
        }
        auto row = out.row(i);
        for (std::size_t r = 0; r < d; ++r) {
            double acc = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                acc += rotation.at(r, j) * g[j];
            }
            row[r] = static_cast<float>(acc);
        }
    }
    return out;
}

}  // namespace panotest
