#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "pano/bounds.hpp"
#include "pano/common.hpp"
#include "pano/layout.hpp"

namespace pano {

/// One scored candidate.
struct Neighbor {
    double distance_sq = 0.0;
    idx_t id = -1;
};

/// Bounded collection of the k smallest squared distances seen so far.
/// Entries are either exact distances or upper bounds (Batch-UB variant);
/// at most one entry per candidate. Ties at the k-th position break by
/// ascending id, so ordering is lexicographic on (distance, id).
class ResultHeap {
public:
    struct Entry {
        double key = 0.0;  // exact distance or an upper bound on it
        idx_t id = -1;
        bool exact = true;
    };

    explicit ResultHeap(std::size_t k) : capacity_(k) { PANO_REQUIRE(k >= 1, "heap capacity must be >= 1"); }

    /// Current pruning threshold d_k: the largest entry key when full,
    /// +infinity otherwise.
    double threshold() const {
        return full() ? worst_key_ : std::numeric_limits<double>::infinity();
    }
    bool full() const { return entries_.size() == capacity_; }
    std::size_t size() const { return entries_.size(); }
    std::size_t capacity() const { return capacity_; }

    /// Inserts an exact distance, replacing the candidate's upper-bound
    /// entry if one exists, then crops to k entries.
    void push_exact(double distance_sq, idx_t id) { push(distance_sq, id, true); }

    /// Inserts (or tightens) an upper-bound entry for a candidate, then
    /// crops. Only the Batch-UB variant calls this.
    void push_ub(double bound, idx_t id) { push(bound, id, false); }

    bool all_exact() const;

    /// Final results sorted ascending by (distance, id). Requires every
    /// entry to be exact.
    std::vector<Neighbor> finalize() const;

private:
    void push(double key, idx_t id, bool exact);
    void recompute_worst();

    std::size_t capacity_;
    std::vector<Entry> entries_;  // unordered; k is small, linear ops suffice
    double worst_key_ = -std::numeric_limits<double>::infinity();
    idx_t worst_id_ = -1;
};

enum class EngineVariant : std::uint8_t {
    point_centric,  // B = 1, immediate heap updates
    batch_noub,     // level-by-level over a batch, heap updated after the batch
    batch_ub,       // as batch_noub plus upper-bound heap entries mid-batch
};

struct EngineConfig {
    EngineVariant variant = EngineVariant::batch_noub;
    std::size_t batch_size = 256;   // ignored for point_centric (forced to 1)
    double prune_slack = 1e-6;      // relative slack on the LB > d_k test
    bool record_pruned = false;     // collect pruned ids for instrumentation

    void validate() const;
};

/// Work accounting for one refinement run. A candidate pruned after
/// consuming levels 1..l is charged m_l dimension terms (whole-level
/// granularity); survivors and seeds are charged d.
struct WorkCounters {
    std::uint64_t feature_terms = 0;
    std::uint64_t candidates = 0;
    std::size_t dim = 0;
    std::vector<idx_t> pruned_ids;      // filled only when record_pruned
    std::vector<double> threshold_trace;  // d_k after each heap update, when record_pruned

    /// phi = average fraction of dimensions processed per candidate.
    double phi() const {
        return candidates == 0 ? 0.0
                               : static_cast<double>(feature_terms) /
                                     (static_cast<double>(candidates) * static_cast<double>(dim));
    }
    void merge(const WorkCounters& o);
};

/// Streaming refinement over a candidate sequence. The caller seeds the run
/// by construction: the first k candidates get full exact distances, later
/// ones are pruned against d_k as levels tighten their lower bounds.
class RefineRun {
public:
    RefineRun(const TransformedVector& query, std::size_t k, const EngineConfig& config,
              const LevelSpec& levels);

    /// Processes one level-major batch per the configured variant.
    void consume_batch(const LevelMajorBatch& batch);

    /// Point-centric path over vector-major storage.
    void consume_dataset(const TransformedDataset& dataset);

    std::vector<Neighbor> results() const { return heap_.finalize(); }
    const WorkCounters& counters() const { return counters_; }
    const ResultHeap& heap() const { return heap_; }

private:
    void seed_candidate(std::span<const float> coeffs, std::span<const double> tails_vm, idx_t id);
    void consume_point(std::span<const float> coeffs, const double* tails, idx_t id);
    void consume_batch_bulk(const LevelMajorBatch& batch, std::size_t first, bool use_ub);
    void note_pruned(idx_t id, std::size_t charged_terms);
    void note_exact(idx_t id, double distance_sq);

    const TransformedVector& query_;
    EngineConfig config_;
    LevelSpec levels_;
    ResultHeap heap_;
    WorkCounters counters_;
    std::size_t seeded_ = 0;

    // per-batch scratch, sized to the widest batch seen
    std::vector<double> partials_;
    std::vector<std::uint8_t> alive_;
};

/// Convenience wrappers over RefineRun.
std::vector<Neighbor> refine_point_centric(const TransformedVector& query,
                                           const TransformedDataset& candidates, std::size_t k,
                                           const EngineConfig& config, WorkCounters* counters = nullptr);

std::vector<Neighbor> refine_batches(const TransformedVector& query,
                                     const std::vector<LevelMajorBatch>& batches, std::size_t k,
                                     const EngineConfig& config, WorkCounters* counters = nullptr);

}  // namespace pano
