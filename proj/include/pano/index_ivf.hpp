#pragma once

#include <cstdint>
#include <filesystem>

#include "pano/common.hpp"
#include "pano/engine.hpp"
#include "pano/index_flat.hpp"
#include "pano/layout.hpp"
#include "pano/transform.hpp"

namespace pano {

struct KMeansResult {
    MatrixF centroids;                  // n_list x d
    std::vector<std::uint32_t> assign;  // cluster of each input row
};

/// k-means++ seeding followed by a fixed number of Lloyd iterations;
/// deterministic for a given seed. Empty clusters are re-seeded from the
/// largest cluster's farthest point.
KMeansResult kmeans(const MatrixF& data, std::size_t n_list, std::uint64_t seed,
                    int iterations = 25);

/// Inverted-file index: n_list k-means clusters, each stored as level-major
/// batches of transformed vectors. A query scans the n_probe nearest
/// clusters by centroid distance.
class IvfFlatIndex {
public:
    IvfFlatIndex() = default;

    static IvfFlatIndex build(const MatrixF& data, std::size_t n_list, std::uint64_t seed,
                              const LevelSpec& levels, const TransformModel* transform = nullptr,
                              std::size_t batch_size = 256);

    SearchResult search(std::span<const float> query, std::size_t k, std::size_t n_probe,
                        SearchMode mode, const EngineConfig& config = {}) const;

    std::size_t size() const { return ntotal_; }
    std::size_t dim() const { return dim_; }
    std::size_t n_list() const { return centroids_.rows; }
    const LevelSpec& levels() const { return levels_; }
    const std::vector<std::uint32_t>& assignments() const { return assign_; }

    void save(const std::filesystem::path& path) const;
    static IvfFlatIndex load(const std::filesystem::path& path);

    TransformedVector prepare_query(std::span<const float> query) const;

private:
    void build_cluster_batches(const MatrixF& transformed);

    std::size_t dim_ = 0;
    std::size_t ntotal_ = 0;
    std::size_t batch_size_ = 256;
    std::uint64_t seed_ = 0;
    LevelSpec levels_;
    MatrixF transform_matrix_;            // empty = identity
    MatrixF centroids_;                   // in transformed space
    std::vector<std::uint32_t> assign_;   // by original row id
    std::vector<std::vector<LevelMajorBatch>> cluster_batches_;
};

}  // namespace pano
