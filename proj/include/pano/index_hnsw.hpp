#pragma once

#include <cstdint>
#include <filesystem>
#include <random>

#include "pano/common.hpp"
#include "pano/engine.hpp"
#include "pano/index_flat.hpp"
#include "pano/layout.hpp"
#include "pano/transform.hpp"

namespace pano {

struct HnswParams {
    std::size_t M = 16;               // neighbors per node on layers > 0
    std::size_t ef_construction = 40;
    std::uint64_t seed = 0;
};

/// Multi-layer small-world graph over transformed vectors. Baseline search
/// computes full distances during layer-0 traversal; panorama search defers
/// exact distances with progressive bounds, ordering the candidate beam by
/// (lb+ub)/2 surrogates for pruned nodes.
class HnswIndex {
public:
    HnswIndex() = default;

    static HnswIndex build(const MatrixF& data, const HnswParams& params, const LevelSpec& levels,
                           const TransformModel* transform = nullptr);

    SearchResult search(std::span<const float> query, std::size_t k, std::size_t ef_search,
                        SearchMode mode) const;

    std::size_t size() const { return data_.size(); }
    std::size_t dim() const { return dim_; }
    const HnswParams& params() const { return params_; }
    int max_level() const { return max_level_; }
    std::uint32_t entry_point() const { return entry_point_; }

    void save(const std::filesystem::path& path) const;
    static HnswIndex load(const std::filesystem::path& path);

    TransformedVector prepare_query(std::span<const float> query) const;

    /// Layer-l adjacency of node id.
    std::span<const std::uint32_t> neighbors(std::uint32_t id, int layer) const;

private:
    void insert(std::uint32_t id, std::mt19937_64& rng);
    std::uint32_t greedy_descend(const TransformedVector& q, std::uint32_t start, int from_layer,
                                 int to_layer, WorkCounters& counters) const;
    std::vector<Neighbor> search_layer(const TransformedVector& q, std::uint32_t entry,
                                       std::size_t ef, int layer) const;
    double exact_distance(const TransformedVector& q, std::uint32_t id, WorkCounters& counters) const;

    std::size_t dim_ = 0;
    HnswParams params_;
    LevelSpec levels_;
    MatrixF transform_matrix_;  // empty = identity
    TransformedDataset data_;
    std::vector<int> node_level_;
    // adjacency_[id][layer] is a flat neighbor list
    std::vector<std::vector<std::vector<std::uint32_t>>> adjacency_;
    std::uint32_t entry_point_ = 0;
    int max_level_ = -1;
    double level_mult_ = 0.0;
};

}  // namespace pano
