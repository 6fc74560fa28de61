#include "pano/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <ostream>

namespace pano {

std::vector<std::vector<idx_t>> ground_truth(const MatrixF& data, const MatrixF& queries,
                                             std::size_t k) {
    PANO_REQUIRE(data.cols == queries.cols, "ground_truth: dimension mismatch");
    PANO_REQUIRE(k >= 1 && k <= data.rows, "ground_truth: invalid k");
    std::vector<std::vector<idx_t>> out(queries.rows);
    std::vector<std::pair<double, idx_t>> scored(data.rows);
    for (std::size_t qi = 0; qi < queries.rows; ++qi) {
        auto q = queries.row(qi);
        for (std::size_t i = 0; i < data.rows; ++i) {
            auto x = data.row(i);
            double acc = 0.0;
            for (std::size_t j = 0; j < q.size(); ++j) {
                double diff = static_cast<double>(q[j]) - static_cast<double>(x[j]);
                acc += diff * diff;
            }
            scored[i] = {acc, static_cast<idx_t>(i)};
        }
        std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k),
                          scored.end());
        out[qi].reserve(k);
        for (std::size_t r = 0; r < k; ++r) {
            out[qi].push_back(scored[r].second);
        }
    }
    return out;
}

namespace {

RunStats aggregate(const MatrixF& queries, const std::vector<std::vector<idx_t>>& truth,
                   const BenchOptions& opts,
                   const std::function<SearchResult(std::span<const float>)>& search_one) {
    PANO_REQUIRE(opts.repetitions >= 1, "bench: repetitions must be >= 1");
    PANO_REQUIRE(truth.empty() || truth.size() == queries.rows,
                 "bench: ground truth size mismatch");
    RunStats stats;
    double total_seconds = 0.0;
    double recall_sum = 0.0;
    WorkCounters counters;
    for (std::size_t rep = 0; rep < opts.repetitions; ++rep) {
        auto begin = std::chrono::steady_clock::now();
        for (std::size_t qi = 0; qi < queries.rows; ++qi) {
            SearchResult r = search_one(queries.row(qi));
            if (rep == 0) {
                counters.merge(r.counters);
                if (!truth.empty()) {
                    std::vector<idx_t> ids;
                    ids.reserve(r.neighbors.size());
                    for (const Neighbor& nb : r.neighbors) {
                        ids.push_back(nb.id);
                    }
                    recall_sum += recall_at_k(ids, truth[qi]);
                }
            }
        }
        total_seconds +=
            std::chrono::duration<double>(std::chrono::steady_clock::now() - begin).count();
    }
    double mean_seconds = total_seconds / static_cast<double>(opts.repetitions);
    stats.qps = mean_seconds > 0.0 ? static_cast<double>(queries.rows) / mean_seconds : 0.0;
    stats.wall_ms = mean_seconds * 1e3;
    stats.recall = truth.empty() ? 0.0 : recall_sum / static_cast<double>(queries.rows);
    stats.phi = counters.phi();
    stats.feature_terms = counters.feature_terms;
    return stats;
}

struct ModePoint {
    double value = 0.0;
    RunStats stats;
};

void emit_mode_rows(std::vector<SweepRow>& rows, const std::string& index_kind,
                    const std::string& param, const std::string& mode,
                    const std::vector<ModePoint>& points, const BenchOptions& opts) {
    for (const ModePoint& p : points) {
        rows.push_back({"grid", index_kind, mode, param, p.value, p.stats.recall, p.stats.qps,
                        p.stats.phi, p.stats.feature_terms, p.stats.wall_ms, 0.0});
    }
    std::vector<ParetoPoint> frontier;
    frontier.reserve(points.size());
    for (const ModePoint& p : points) {
        frontier.push_back({p.stats.recall, p.stats.qps});
    }
    for (const ParetoPoint& p : pareto_denoise(frontier, opts.denoise_factor)) {
        rows.push_back({"pareto", index_kind, mode, param, 0.0, p.recall, p.qps, 0.0, 0, 0.0, 0.0});
    }
}

/// recall -> qps curve with duplicate recalls collapsed to their best QPS
void build_curve(const std::vector<ModePoint>& points, std::vector<double>& xs,
                 std::vector<double>& ys) {
    std::map<double, double> best;
    for (const ModePoint& p : points) {
        auto [it, inserted] = best.try_emplace(p.stats.recall, p.stats.qps);
        if (!inserted) {
            it->second = std::max(it->second, p.stats.qps);
        }
    }
    xs.clear();
    ys.clear();
    for (const auto& [r, q] : best) {
        xs.push_back(r);
        ys.push_back(q);
    }
}

void emit_speedup_rows(std::vector<SweepRow>& rows, const std::string& index_kind,
                       const std::vector<ModePoint>& baseline,
                       const std::vector<ModePoint>& panorama, const BenchOptions& opts) {
    std::vector<double> bx, by, px, py;
    build_curve(baseline, bx, by);
    build_curve(panorama, px, py);
    if (bx.size() < 2 || px.size() < 2) {
        return;  // not enough distinct recall values to interpolate
    }
    double lo = std::max(bx.front(), px.front());
    double hi = std::min(bx.back(), px.back());
    if (!(hi > lo)) {
        return;
    }
    for (std::size_t s = 0; s < opts.speedup_samples; ++s) {
        double r = lo + (hi - lo) * static_cast<double>(s) /
                            static_cast<double>(opts.speedup_samples - 1);
        double qb = pchip_eval(bx, by, r);
        double qp = pchip_eval(px, py, r);
        if (qb <= 0.0) {
            continue;
        }
        rows.push_back(
            {"speedup", index_kind, "panorama/baseline", "recall", r, r, 0.0, 0.0, 0, 0.0, qp / qb});
    }
}

}  // namespace

RunStats run_flat(const FlatIndex& index, const MatrixF& queries,
                  const std::vector<std::vector<idx_t>>& truth, SearchMode mode,
                  const BenchOptions& opts) {
    return aggregate(queries, truth, opts, [&](std::span<const float> q) {
        return index.search(q, opts.k, mode, opts.engine);
    });
}

RunStats run_ivf(const IvfFlatIndex& index, const MatrixF& queries,
                 const std::vector<std::vector<idx_t>>& truth, std::size_t n_probe, SearchMode mode,
                 const BenchOptions& opts) {
    return aggregate(queries, truth, opts, [&](std::span<const float> q) {
        return index.search(q, opts.k, n_probe, mode, opts.engine);
    });
}

RunStats run_hnsw(const HnswIndex& index, const MatrixF& queries,
                  const std::vector<std::vector<idx_t>>& truth, std::size_t ef_search,
                  SearchMode mode, const BenchOptions& opts) {
    return aggregate(queries, truth, opts, [&](std::span<const float> q) {
        return index.search(q, opts.k, ef_search, mode);
    });
}

std::vector<SweepRow> sweep_ivf(const IvfFlatIndex& index, const MatrixF& queries,
                                const std::vector<std::vector<idx_t>>& truth,
                                const std::vector<std::size_t>& n_probe_grid,
                                const BenchOptions& opts) {
    PANO_REQUIRE(!n_probe_grid.empty(), "sweep: empty parameter grid");
    std::vector<SweepRow> rows;
    std::vector<ModePoint> base_points, pano_points;
    for (std::size_t n_probe : n_probe_grid) {
        base_points.push_back({static_cast<double>(n_probe),
                               run_ivf(index, queries, truth, n_probe, SearchMode::baseline, opts)});
        pano_points.push_back({static_cast<double>(n_probe),
                               run_ivf(index, queries, truth, n_probe, SearchMode::panorama, opts)});
    }
    emit_mode_rows(rows, "ivf", "nprobe", "baseline", base_points, opts);
    emit_mode_rows(rows, "ivf", "nprobe", "panorama", pano_points, opts);
    emit_speedup_rows(rows, "ivf", base_points, pano_points, opts);
    return rows;
}

std::vector<SweepRow> sweep_hnsw(const HnswIndex& index, const MatrixF& queries,
                                 const std::vector<std::vector<idx_t>>& truth,
                                 const std::vector<std::size_t>& ef_grid,
                                 const BenchOptions& opts) {
    PANO_REQUIRE(!ef_grid.empty(), "sweep: empty parameter grid");
    std::vector<SweepRow> rows;
    std::vector<ModePoint> base_points, pano_points;
    for (std::size_t ef : ef_grid) {
        base_points.push_back({static_cast<double>(ef),
                               run_hnsw(index, queries, truth, ef, SearchMode::baseline, opts)});
        pano_points.push_back({static_cast<double>(ef),
                               run_hnsw(index, queries, truth, ef, SearchMode::panorama, opts)});
    }
    emit_mode_rows(rows, "hnsw", "efsearch", "baseline", base_points, opts);
    emit_mode_rows(rows, "hnsw", "efsearch", "panorama", pano_points, opts);
    emit_speedup_rows(rows, "hnsw", base_points, pano_points, opts);
    return rows;
}

std::vector<SweepRow> sweep_flat(const FlatIndex& index, const MatrixF& queries,
                                 const std::vector<std::vector<idx_t>>& truth,
                                 const BenchOptions& opts) {
    std::vector<SweepRow> rows;
    std::vector<ModePoint> base_points{{0.0, run_flat(index, queries, truth, SearchMode::baseline, opts)}};
    std::vector<ModePoint> pano_points{{0.0, run_flat(index, queries, truth, SearchMode::panorama, opts)}};
    emit_mode_rows(rows, "flat", "none", "baseline", base_points, opts);
    emit_mode_rows(rows, "flat", "none", "panorama", pano_points, opts);
    return rows;
}

void SweepRow::write_header(std::ostream& out) {
    out << "row,index,mode,param,value,recall,qps,phi,feature_terms,wall_ms,speedup\n";
}

void SweepRow::write(std::ostream& out) const {
    out << row << ',' << index << ',' << mode << ',' << param << ',' << value << ',' << recall
        << ',' << qps << ',' << phi << ',' << feature_terms << ',' << wall_ms << ',' << speedup
        << '\n';
}

}  // namespace pano
