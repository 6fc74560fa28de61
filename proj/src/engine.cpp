#include "pano/engine.hpp"

#include <algorithm>
#include <cmath>

namespace pano {

namespace {

inline double level_dot(std::span<const float> a, std::span<const float> b) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        acc += static_cast<double>(a[j]) * static_cast<double>(b[j]);
    }
    return acc;
}

inline double cross_term(double tail_q, double tail_x) {
    return std::sqrt(std::max(0.0, tail_q) * std::max(0.0, tail_x));
}

}  // namespace

void EngineConfig::validate() const {
    PANO_REQUIRE(batch_size >= 1, "engine: batch size must be >= 1");
    PANO_REQUIRE(prune_slack >= 0.0, "engine: prune slack must be >= 0");
    if (variant == EngineVariant::point_centric) {
        PANO_REQUIRE(batch_size == 1, "engine: point_centric requires batch size 1");
    }
}

bool ResultHeap::all_exact() const {
    return std::all_of(entries_.begin(), entries_.end(), [](const Entry& e) { return e.exact; });
}

std::vector<Neighbor> ResultHeap::finalize() const {
    PANO_ASSERT(all_exact(), "heap: non-exact entry at finalize");
    std::vector<Neighbor> out;
    out.reserve(entries_.size());
    for (const Entry& e : entries_) {
        out.push_back({e.key, e.id});
    }
    std::sort(out.begin(), out.end(), [](const Neighbor& a, const Neighbor& b) {
        return a.distance_sq != b.distance_sq ? a.distance_sq < b.distance_sq : a.id < b.id;
    });
    return out;
}

void ResultHeap::push(double key, idx_t id, bool exact) {
    for (Entry& e : entries_) {
        if (e.id == id) {
            // tighten (or finalize) this candidate's entry
            if (exact) {
                PANO_ASSERT(!e.exact, "heap: duplicate exact push");
                e.key = key;
                e.exact = true;
            } else if (key < e.key) {
                e.key = key;
            } else {
                return;
            }
            recompute_worst();
            return;
        }
    }
    if (entries_.size() < capacity_) {
        entries_.push_back({key, id, exact});
        if (entries_.size() == capacity_) {
            recompute_worst();
        }
        return;
    }
    // full: replace the lexicographically worst entry if the new one beats it
    if (key < worst_key_ || (key == worst_key_ && id < worst_id_)) {
        for (Entry& e : entries_) {
            if (e.key == worst_key_ && e.id == worst_id_) {
                e = {key, id, exact};
                break;
            }
        }
        recompute_worst();
    }
}

void ResultHeap::recompute_worst() {
    worst_key_ = -std::numeric_limits<double>::infinity();
    worst_id_ = -1;
    for (const Entry& e : entries_) {
        if (e.key > worst_key_ || (e.key == worst_key_ && e.id > worst_id_)) {
            worst_key_ = e.key;
            worst_id_ = e.id;
        }
    }
}

void WorkCounters::merge(const WorkCounters& o) {
    feature_terms += o.feature_terms;
    candidates += o.candidates;
    if (dim == 0) {
        dim = o.dim;
    }
    pruned_ids.insert(pruned_ids.end(), o.pruned_ids.begin(), o.pruned_ids.end());
    threshold_trace.insert(threshold_trace.end(), o.threshold_trace.begin(),
                           o.threshold_trace.end());
}

RefineRun::RefineRun(const TransformedVector& query, std::size_t k, const EngineConfig& config,
                     const LevelSpec& levels)
    : query_(query), config_(config), levels_(levels), heap_(k) {
    config_.validate();
    levels_.validate();
    PANO_REQUIRE(query.coeffs.size() == levels.dim, "engine: query dimension mismatch");
    counters_.dim = levels_.dim;
}

void RefineRun::note_pruned(idx_t id, std::size_t charged_terms) {
    counters_.feature_terms += charged_terms;
    counters_.candidates += 1;
    if (config_.record_pruned) {
        counters_.pruned_ids.push_back(id);
    }
}

void RefineRun::note_exact(idx_t id, double distance_sq) {
    counters_.feature_terms += levels_.dim;
    counters_.candidates += 1;
    heap_.push_exact(std::max(0.0, distance_sq), id);
    if (config_.record_pruned) {
        counters_.threshold_trace.push_back(heap_.threshold());
    }
}

void RefineRun::seed_candidate(std::span<const float> coeffs, std::span<const double> tails_vm,
                               idx_t id) {
    double partial = 0.0;
    for (std::size_t l = 1; l <= levels_.num_levels(); ++l) {
        partial += level_dot(
            std::span<const float>(query_.coeffs).subspan(levels_.level_begin(l),
                                                          levels_.level_width(l)),
            coeffs.subspan(levels_.level_begin(l), levels_.level_width(l)));
    }
    note_exact(id, query_.norm_sq() + tails_vm[0] - 2.0 * partial);
    ++seeded_;
}

void RefineRun::consume_point(std::span<const float> coeffs, const double* tails, idx_t id) {
    const double nq = query_.norm_sq();
    const double nx = tails[0];
    const std::size_t L = levels_.num_levels();
    double dk = heap_.threshold();
    double slack = 1.0 + config_.prune_slack;

    double lb, ub;
    distance_bounds(nq, nx, 0.0, query_.tails[0], nx, lb, ub);
    if (lb > dk * slack) {
        note_pruned(id, 0);
        return;
    }
    double partial = 0.0;
    for (std::size_t l = 1; l <= L; ++l) {
        const std::size_t begin = levels_.level_begin(l);
        const std::size_t w = levels_.level_width(l);
        partial += level_dot(std::span<const float>(query_.coeffs).subspan(begin, w),
                             coeffs.subspan(begin, w));
        double cross = cross_term(query_.tails[l], tails[l]);
        lb = nq + nx - 2.0 * (partial + cross);
        if (lb > dk * slack) {
            note_pruned(id, levels_.thresholds[l]);
            return;
        }
    }
    note_exact(id, nq + nx - 2.0 * partial);
}

void RefineRun::consume_batch_bulk(const LevelMajorBatch& batch, std::size_t first, bool use_ub) {
    const std::size_t b = batch.batch_size;
    const std::size_t L = levels_.num_levels();
    const double nq = query_.norm_sq();
    const double slack = 1.0 + config_.prune_slack;

    partials_.assign(b, 0.0);
    alive_.assign(b, 1);
    for (std::size_t i = 0; i < first; ++i) {
        alive_[i] = 0;  // already seeded
    }

    // threshold frozen for the whole batch in the noUB variant
    double dk = heap_.threshold();

    // level-0 precheck from stored norms; consumes no coefficients
    auto tails0 = batch.tail_slice(0);
    for (std::size_t i = first; i < b; ++i) {
        double lb, ub;
        distance_bounds(nq, tails0[i], 0.0, query_.tails[0], tails0[i], lb, ub);
        if (lb > dk * slack) {
            alive_[i] = 0;
            note_pruned(batch.ids[i], 0);
        }
    }

    for (std::size_t l = 1; l <= L; ++l) {
        const std::size_t begin = levels_.level_begin(l);
        const std::size_t w = levels_.level_width(l);
        auto q_level = std::span<const float>(query_.coeffs).subspan(begin, w);
        auto x_level = batch.level_slice(l);
        auto tails_l = batch.tail_slice(l);
        const double tail_q = query_.tails[l];
        const bool last = (l == L);
        for (std::size_t i = first; i < b; ++i) {
            if (!alive_[i]) {
                continue;
            }
            partials_[i] += level_dot(q_level, x_level.subspan(i * w, w));
            double cross = cross_term(tail_q, tails_l[i]);
            double base = nq + tails0[i];
            double lb = base - 2.0 * (partials_[i] + cross);
            if (lb > dk * slack) {
                alive_[i] = 0;
                note_pruned(batch.ids[i], levels_.thresholds[l]);
                continue;
            }
            if (use_ub && !last) {
                double ub = base - 2.0 * (partials_[i] - cross);
                if (ub < dk) {
                    heap_.push_ub(ub, batch.ids[i]);
                    dk = heap_.threshold();
                    if (config_.record_pruned) {
                        counters_.threshold_trace.push_back(dk);
                    }
                }
            }
        }
    }

    // survivors reached level L: their bound collapsed to the exact distance
    for (std::size_t i = first; i < b; ++i) {
        if (alive_[i]) {
            note_exact(batch.ids[i], nq + tails0[i] - 2.0 * partials_[i]);
        }
    }
    if (use_ub) {
        PANO_ASSERT(heap_.all_exact(), "engine: non-exact heap entry survived a batch");
    }
}

void RefineRun::consume_batch(const LevelMajorBatch& batch) {
    PANO_REQUIRE(batch.levels == levels_, "engine: batch level spec mismatch");
    const std::size_t b = batch.batch_size;
    const std::size_t L = levels_.num_levels();
    std::size_t first = 0;
    while (seeded_ < heap_.capacity() && first < b) {
        double partial = 0.0;
        for (std::size_t l = 1; l <= L; ++l) {
            auto q_level = std::span<const float>(query_.coeffs)
                               .subspan(levels_.level_begin(l), levels_.level_width(l));
            partial += level_dot(q_level, batch.level_span_of(l, first));
        }
        note_exact(batch.ids[first], query_.norm_sq() + batch.tail_slice(0)[first] - 2.0 * partial);
        ++seeded_;
        ++first;
    }
    if (first == b) {
        return;
    }
    switch (config_.variant) {
        case EngineVariant::point_centric: {
            const std::size_t L1 = levels_.num_levels();
            std::vector<double> tails(L1 + 1);
            std::vector<float> coeffs(levels_.dim);
            for (std::size_t i = first; i < b; ++i) {
                for (std::size_t l = 0; l <= L1; ++l) {
                    tails[l] = batch.tail_slice(l)[i];
                }
                for (std::size_t l = 1; l <= L1; ++l) {
                    auto src = batch.level_span_of(l, i);
                    std::copy(src.begin(), src.end(), coeffs.begin() + levels_.level_begin(l));
                }
                consume_point(coeffs, tails.data(), batch.ids[i]);
            }
            break;
        }
        case EngineVariant::batch_noub:
            consume_batch_bulk(batch, first, /*use_ub=*/false);
            break;
        case EngineVariant::batch_ub:
            consume_batch_bulk(batch, first, /*use_ub=*/true);
            break;
    }
}

void RefineRun::consume_dataset(const TransformedDataset& dataset) {
    PANO_REQUIRE(dataset.levels == levels_, "engine: dataset level spec mismatch");
    const std::size_t stride = levels_.num_levels() + 1;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        if (seeded_ < heap_.capacity()) {
            seed_candidate(dataset.vector(i), dataset.tail_row(i), dataset.ids[i]);
        } else {
            consume_point(dataset.vector(i), dataset.tails.data() + i * stride, dataset.ids[i]);
        }
    }
}

std::vector<Neighbor> refine_point_centric(const TransformedVector& query,
                                           const TransformedDataset& candidates, std::size_t k,
                                           const EngineConfig& config, WorkCounters* counters) {
    PANO_REQUIRE(candidates.size() >= 1, "refine: empty candidate set");
    RefineRun run(query, k, config, candidates.levels);
    run.consume_dataset(candidates);
    if (counters) {
        counters->merge(run.counters());
    }
    return run.results();
}

std::vector<Neighbor> refine_batches(const TransformedVector& query,
                                     const std::vector<LevelMajorBatch>& batches, std::size_t k,
                                     const EngineConfig& config, WorkCounters* counters) {
    PANO_REQUIRE(!batches.empty(), "refine: empty candidate set");
    RefineRun run(query, k, config, batches.front().levels);
    for (const auto& batch : batches) {
        run.consume_batch(batch);
    }
    if (counters) {
        counters->merge(run.counters());
    }
    return run.results();
}

}  // namespace pano
