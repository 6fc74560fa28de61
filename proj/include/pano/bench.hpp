#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pano/analytics.hpp"
#include "pano/common.hpp"
#include "pano/index_flat.hpp"
#include "pano/index_hnsw.hpp"
#include "pano/index_ivf.hpp"

namespace pano {

/// Exact brute-force kNN over the original vectors; ties at the k-th
/// distance break by ascending id, matching the refinement engine.
std::vector<std::vector<idx_t>> ground_truth(const MatrixF& data, const MatrixF& queries,
                                             std::size_t k);

struct BenchOptions {
    std::size_t k = 10;
    std::size_t repetitions = 5;
    double denoise_factor = 1.2;
    std::size_t speedup_samples = 5;
    EngineConfig engine;
};

/// One CSV row of a benchmark sweep. `row` is grid, pareto, or speedup;
/// timing columns (qps, wall_ms) are environment-dependent, everything else
/// is deterministic for a fixed seed.
struct SweepRow {
    std::string row;
    std::string index;
    std::string mode;
    std::string param;
    double value = 0.0;
    double recall = 0.0;
    double qps = 0.0;
    double phi = 0.0;
    std::uint64_t feature_terms = 0;
    double wall_ms = 0.0;
    double speedup = 0.0;

    static void write_header(std::ostream& out);
    void write(std::ostream& out) const;
};

/// Aggregate measurements of one (mode, parameter) point.
struct RunStats {
    double recall = 0.0;
    double qps = 0.0;
    double phi = 0.0;
    std::uint64_t feature_terms = 0;
    double wall_ms = 0.0;
};

RunStats run_flat(const FlatIndex& index, const MatrixF& queries,
                  const std::vector<std::vector<idx_t>>& truth, SearchMode mode,
                  const BenchOptions& opts);
RunStats run_ivf(const IvfFlatIndex& index, const MatrixF& queries,
                 const std::vector<std::vector<idx_t>>& truth, std::size_t n_probe, SearchMode mode,
                 const BenchOptions& opts);
RunStats run_hnsw(const HnswIndex& index, const MatrixF& queries,
                  const std::vector<std::vector<idx_t>>& truth, std::size_t ef_search,
                  SearchMode mode, const BenchOptions& opts);

/// Runs both modes over the grid, applies Pareto denoising per mode, and
/// interpolates speedup at evenly spaced recall values over the modes'
/// common recall range.
std::vector<SweepRow> sweep_ivf(const IvfFlatIndex& index, const MatrixF& queries,
                                const std::vector<std::vector<idx_t>>& truth,
                                const std::vector<std::size_t>& n_probe_grid,
                                const BenchOptions& opts);
std::vector<SweepRow> sweep_hnsw(const HnswIndex& index, const MatrixF& queries,
                                 const std::vector<std::vector<idx_t>>& truth,
                                 const std::vector<std::size_t>& ef_grid,
                                 const BenchOptions& opts);
std::vector<SweepRow> sweep_flat(const FlatIndex& index, const MatrixF& queries,
                                 const std::vector<std::vector<idx_t>>& truth,
                                 const BenchOptions& opts);

}  // namespace pano
