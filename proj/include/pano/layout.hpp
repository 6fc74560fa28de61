#pragma once

#include <span>
#include <vector>

#include "pano/bounds.hpp"
#include "pano/common.hpp"
#include "pano/levels.hpp"

namespace pano {

/// A dataset of transformed vectors with their per-level tail energies,
/// stored vector-major. The input representation for batch building and the
/// point-centric refinement path.
struct TransformedDataset {
    LevelSpec levels;
    MatrixF coeffs;              // N x d transformed coefficients
    std::vector<double> tails;   // N x (L+1), row-major
    std::vector<idx_t> ids;      // candidate identifiers, one per row

    std::size_t size() const { return coeffs.rows; }
    std::span<const float> vector(std::size_t i) const { return coeffs.row(i); }
    std::span<const double> tail_row(std::size_t i) const {
        return {tails.data() + i * (levels.num_levels() + 1), levels.num_levels() + 1};
    }
    TransformedVector view_as_vector(std::size_t i) const;
};

/// Builds a TransformedDataset from raw coefficients (tails computed here).
/// ids default to 0..N-1.
TransformedDataset make_transformed_dataset(MatrixF coeffs, const LevelSpec& levels,
                                            std::vector<idx_t> ids = {});

/// Level-major storage for one batch of candidates: all candidates' level-1
/// spans, then all level-2 spans, and so on. Tail energies are stored
/// level-major as well (all candidates' tails[l] contiguous) so bulk pruning
/// reads one contiguous strip per level.
struct LevelMajorBatch {
    std::size_t batch_size = 0;  // B, possibly partial for the last batch
    LevelSpec levels;
    std::vector<float> data;     // sum_l B*w_l coefficients
    std::vector<double> tails;   // (L+1) x B, level-major
    std::vector<idx_t> ids;

    /// Contiguous view of all candidates' level-l coefficients (1 <= l <= L).
    std::span<const float> level_slice(std::size_t level) const;

    /// Tail energies R^(l,d) of every candidate, 0 <= l <= L.
    std::span<const double> tail_slice(std::size_t level) const {
        return {tails.data() + level * batch_size, batch_size};
    }

    std::span<const float> level_span_of(std::size_t level, std::size_t i) const;
};

/// Groups a dataset into level-major batches of width B (last batch may be
/// partial).
std::vector<LevelMajorBatch> build_batches(const TransformedDataset& dataset, std::size_t B);

/// Inverse of build_batches; bit-exact.
TransformedDataset reconstruct(const std::vector<LevelMajorBatch>& batches);

}  // namespace pano
