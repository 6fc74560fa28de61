#pragma once

#include <filesystem>
#include <optional>

#include "pano/common.hpp"
#include "pano/engine.hpp"
#include "pano/layout.hpp"
#include "pano/transform.hpp"

namespace pano {

enum class SearchMode { baseline, panorama };

SearchMode search_mode_from_name(const std::string& name);
const char* to_string(SearchMode mode);

struct SearchResult {
    std::vector<Neighbor> neighbors;
    WorkCounters counters;
};

/// Brute-force scan index over level-major batches. Queries are transformed
/// on entry when the index was built with a transform.
class FlatIndex {
public:
    FlatIndex() = default;

    /// Stores T(x) for every row of `data`; identity when `transform` is
    /// null. Vector ids are the row indices.
    static FlatIndex build(const MatrixF& data, const LevelSpec& levels,
                           const TransformModel* transform = nullptr, std::size_t batch_size = 256);

    SearchResult search(std::span<const float> query, std::size_t k, SearchMode mode,
                        const EngineConfig& config = {}) const;

    std::size_t size() const { return ntotal_; }
    std::size_t dim() const { return dim_; }
    const LevelSpec& levels() const { return levels_; }
    const std::vector<LevelMajorBatch>& batches() const { return batches_; }
    bool has_transform() const { return !transform_matrix_.values.empty(); }

    void save(const std::filesystem::path& path) const;
    static FlatIndex load(const std::filesystem::path& path);

    /// Applies the index's transform (or identity) and precomputes tails.
    TransformedVector prepare_query(std::span<const float> query) const;

private:
    friend class IvfFlatIndex;
    std::size_t dim_ = 0;
    std::size_t ntotal_ = 0;
    std::size_t batch_size_ = 256;
    LevelSpec levels_;
    MatrixF transform_matrix_;  // empty = identity
    std::vector<LevelMajorBatch> batches_;
};

/// Full-distance scan over batches with direct difference accumulation;
/// the baseline both flat and IVF searches share. Charges d terms per
/// candidate.
void baseline_scan(const TransformedVector& query, const LevelMajorBatch& batch, ResultHeap& heap,
                   WorkCounters& counters);

namespace detail {
MatrixF maybe_transform(const MatrixF& data, const MatrixF& transform_matrix);
TransformedVector prepare_query_impl(std::span<const float> query, const MatrixF& transform_matrix,
                                     const LevelSpec& levels);
}  // namespace detail

}  // namespace pano
