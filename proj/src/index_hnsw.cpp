#include "pano/index_hnsw.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <unordered_map>

#include "pano/io.hpp"

namespace pano {

namespace {

double sq_distance(std::span<const float> a, std::span<const float> b) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        double diff = static_cast<double>(a[j]) - static_cast<double>(b[j]);
        acc += diff * diff;
    }
    return acc;
}

constexpr double kPruneSlack = 1e-6;

/// Progressive refinement state of one visited node during a panorama
/// search.
struct NodeState {
    RefineState rs;
    bool started = false;
    bool exact_known = false;
};

}  // namespace

HnswIndex HnswIndex::build(const MatrixF& data, const HnswParams& params, const LevelSpec& levels,
                           const TransformModel* transform) {
    levels.validate();
    PANO_REQUIRE(data.cols == levels.dim, "hnsw: data dimension mismatch");
    PANO_REQUIRE(data.rows >= 1, "hnsw: empty dataset");
    PANO_REQUIRE(params.M >= 2, "hnsw: M must be >= 2");
    HnswIndex index;
    index.dim_ = data.cols;
    index.params_ = params;
    index.levels_ = levels;
    index.level_mult_ = 1.0 / std::log(static_cast<double>(params.M));
    if (transform) {
        PANO_REQUIRE(transform->dim == data.cols, "hnsw: transform dimension mismatch");
        index.transform_matrix_ = transform->matrix;
    }
    MatrixF transformed = detail::maybe_transform(data, index.transform_matrix_);
    index.data_ = make_transformed_dataset(std::move(transformed), levels);
    index.node_level_.resize(data.rows);
    index.adjacency_.resize(data.rows);
    std::mt19937_64 rng(params.seed);
    for (std::size_t i = 0; i < data.rows; ++i) {
        index.insert(static_cast<std::uint32_t>(i), rng);
    }
    return index;
}

std::span<const std::uint32_t> HnswIndex::neighbors(std::uint32_t id, int layer) const {
    const auto& layers = adjacency_[id];
    if (layer < 0 || static_cast<std::size_t>(layer) >= layers.size()) {
        return {};
    }
    return layers[static_cast<std::size_t>(layer)];
}

void HnswIndex::insert(std::uint32_t id, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double u = unit(rng);
    u = std::max(u, 1e-300);  // guard log(0)
    int level = static_cast<int>(-std::log(u) * level_mult_);
    node_level_[id] = level;
    adjacency_[id].assign(static_cast<std::size_t>(level) + 1, {});

    if (id == 0) {
        entry_point_ = 0;
        max_level_ = level;
        return;
    }

    auto vec = data_.vector(id);
    std::uint32_t cur = entry_point_;
    double cur_dist = sq_distance(vec, data_.vector(cur));
    for (int lc = max_level_; lc > level; --lc) {
        bool improved = true;
        while (improved) {
            improved = false;
            for (std::uint32_t nb : neighbors(cur, lc)) {
                double dist = sq_distance(vec, data_.vector(nb));
                if (dist < cur_dist) {
                    cur_dist = dist;
                    cur = nb;
                    improved = true;
                }
            }
        }
    }

    for (int lc = std::min(level, max_level_); lc >= 0; --lc) {
        std::vector<Neighbor> found = search_layer(data_.view_as_vector(id), cur, params_.ef_construction, lc);
        const std::size_t cap = (lc == 0) ? 2 * params_.M : params_.M;
        const std::size_t connect = std::min(params_.M, found.size());
        auto& my_list = adjacency_[id][static_cast<std::size_t>(lc)];
        for (std::size_t c = 0; c < connect; ++c) {
            auto nb = static_cast<std::uint32_t>(found[c].id);
            my_list.push_back(nb);
            auto& their_list = adjacency_[nb][static_cast<std::size_t>(lc)];
            their_list.push_back(id);
            if (their_list.size() > cap) {
                // keep the closest cap neighbors (simple nearest selection)
                auto their_vec = data_.vector(nb);
                std::vector<std::pair<double, std::uint32_t>> scored;
                scored.reserve(their_list.size());
                for (std::uint32_t t : their_list) {
                    scored.emplace_back(sq_distance(their_vec, data_.vector(t)), t);
                }
                std::sort(scored.begin(), scored.end());
                their_list.clear();
                for (std::size_t s = 0; s < cap; ++s) {
                    their_list.push_back(scored[s].second);
                }
            }
        }
        if (!found.empty()) {
            cur = static_cast<std::uint32_t>(found.front().id);
        }
    }

    if (level > max_level_) {
        entry_point_ = id;
        max_level_ = level;
    }
}

std::vector<Neighbor> HnswIndex::search_layer(const TransformedVector& q, std::uint32_t entry,
                                              std::size_t ef, int layer) const {
    using Scored = std::pair<double, std::uint32_t>;
    std::priority_queue<Scored, std::vector<Scored>, std::greater<>> candidates;
    std::priority_queue<Scored> top;  // max at front, size <= ef
    std::vector<std::uint8_t> visited(data_.size(), 0);

    double entry_dist = sq_distance(q.coeffs, data_.vector(entry));
    candidates.emplace(entry_dist, entry);
    top.emplace(entry_dist, entry);
    visited[entry] = 1;

    while (!candidates.empty()) {
        auto [dist, v] = candidates.top();
        candidates.pop();
        if (dist > top.top().first && top.size() == ef) {
            break;
        }
        for (std::uint32_t nb : neighbors(v, layer)) {
            if (visited[nb]) {
                continue;
            }
            visited[nb] = 1;
            double nb_dist = sq_distance(q.coeffs, data_.vector(nb));
            if (top.size() < ef || nb_dist < top.top().first) {
                candidates.emplace(nb_dist, nb);
                top.emplace(nb_dist, nb);
                if (top.size() > ef) {
                    top.pop();
                }
            }
        }
    }
    std::vector<Neighbor> out;
    out.reserve(top.size());
    while (!top.empty()) {
        out.push_back({top.top().first, static_cast<idx_t>(top.top().second)});
        top.pop();
    }
    std::sort(out.begin(), out.end(), [](const Neighbor& a, const Neighbor& b) {
        return a.distance_sq != b.distance_sq ? a.distance_sq < b.distance_sq : a.id < b.id;
    });
    return out;
}

TransformedVector HnswIndex::prepare_query(std::span<const float> query) const {
    return detail::prepare_query_impl(query, transform_matrix_, levels_);
}

double HnswIndex::exact_distance(const TransformedVector& q, std::uint32_t id,
                                 WorkCounters& counters) const {
    counters.feature_terms += dim_;
    counters.candidates += 1;
    return sq_distance(q.coeffs, data_.vector(id));
}

std::uint32_t HnswIndex::greedy_descend(const TransformedVector& q, std::uint32_t start,
                                        int from_layer, int to_layer,
                                        WorkCounters& counters) const {
    std::uint32_t cur = start;
    double cur_dist = exact_distance(q, cur, counters);
    for (int lc = from_layer; lc >= to_layer; --lc) {
        bool improved = true;
        while (improved) {
            improved = false;
            for (std::uint32_t nb : neighbors(cur, lc)) {
                double dist = exact_distance(q, nb, counters);
                if (dist < cur_dist) {
                    cur_dist = dist;
                    cur = nb;
                    improved = true;
                }
            }
        }
    }
    return cur;
}

SearchResult HnswIndex::search(std::span<const float> query, std::size_t k, std::size_t ef_search,
                               SearchMode mode) const {
    PANO_REQUIRE(data_.size() >= 1, "hnsw: empty index");
    PANO_REQUIRE(k >= 1, "search: k must be >= 1");
    PANO_REQUIRE(ef_search >= k, "search: ef_search must be >= k");

    TransformedVector q = prepare_query(query);
    SearchResult result;
    result.counters.dim = dim_;

    std::uint32_t root =
        max_level_ > 0 ? greedy_descend(q, entry_point_, max_level_, 1, result.counters)
                       : entry_point_;

    const std::size_t L = levels_.num_levels();
    std::unordered_map<std::uint32_t, NodeState> states;
    states.reserve(1024);
    ResultHeap w(k);

    // refines a node against tau, resuming from its stored level; returns
    // the beam key (exact distance, or the (lb+ub)/2 surrogate when pruned)
    auto refine_node = [&](std::uint32_t id, double tau, NodeState& st) -> double {
        if (st.exact_known) {
            return st.rs.lb;
        }
        auto coeffs = data_.vector(id);
        auto tails = data_.tail_row(id);
        if (!st.started) {
            st.started = true;
            result.counters.candidates += 1;
            st.rs.partial = 0.0;
            st.rs.level = 0;
            distance_bounds(q.norm_sq(), tails[0], 0.0, q.tails[0], tails[0], st.rs.lb, st.rs.ub);
        }
        const double slack = 1.0 + kPruneSlack;
        while (true) {
            if (st.rs.lb > tau * slack && st.rs.level < L) {
                st.rs.pruned = true;  // deferred, may resume when tau changes
                return 0.5 * (st.rs.lb + st.rs.ub);
            }
            if (st.rs.level == L) {
                st.exact_known = true;
                st.rs.pruned = false;
                w.push_exact(std::max(0.0, st.rs.lb), static_cast<idx_t>(id));
                return st.rs.lb;
            }
            std::size_t next = st.rs.level + 1;
            const std::size_t begin = levels_.level_begin(next);
            const std::size_t w_l = levels_.level_width(next);
            double acc = 0.0;
            const float* qc = q.coeffs.data() + begin;
            const float* xc = coeffs.data() + begin;
            for (std::size_t j = 0; j < w_l; ++j) {
                acc += static_cast<double>(qc[j]) * static_cast<double>(xc[j]);
            }
            st.rs.partial += acc;
            st.rs.level = next;
            result.counters.feature_terms += w_l;
            distance_bounds(q.norm_sq(), tails[0], st.rs.partial, q.tails[next], tails[next],
                            st.rs.lb, st.rs.ub);
        }
    };

    auto eval_node = [&](std::uint32_t id, NodeState& st) -> double {
        double tau = w.threshold();
        if (mode == SearchMode::baseline) {
            if (!st.exact_known) {
                st.exact_known = true;
                st.rs.lb = st.rs.ub = exact_distance(q, id, result.counters);
                w.push_exact(std::max(0.0, st.rs.lb), static_cast<idx_t>(id));
            }
            return st.rs.lb;
        }
        return refine_node(id, tau, st);
    };

    std::set<std::pair<double, std::uint32_t>> beam;
    double root_key = eval_node(root, states[root]);
    beam.emplace(root_key, root);

    while (!beam.empty()) {
        auto [key, v] = *beam.begin();
        beam.erase(beam.begin());
        NodeState& vstate = states[v];
        if (mode == SearchMode::panorama && !vstate.exact_known) {
            // re-test against the current threshold before expanding
            refine_node(v, w.threshold(), vstate);
        }
        for (std::uint32_t u : neighbors(v, 0)) {
            if (states.contains(u)) {
                continue;
            }
            double u_key = eval_node(u, states[u]);
            beam.emplace(u_key, u);
            if (beam.size() > ef_search) {
                beam.erase(std::prev(beam.end()));
            }
        }
    }

    result.neighbors = w.finalize();
    return result;
}

void HnswIndex::save(const std::filesystem::path& path) const {
    wire::Writer w;
    w.magic("PHNW1");
    w.u32(1);
    w.u32(static_cast<std::uint32_t>(dim_));
    w.u32(static_cast<std::uint32_t>(levels_.thresholds.size()));
    for (std::size_t m : levels_.thresholds) {
        w.u32(static_cast<std::uint32_t>(m));
    }
    w.u32(static_cast<std::uint32_t>(params_.M));
    w.u32(static_cast<std::uint32_t>(params_.ef_construction));
    w.u64(params_.seed);
    w.u64(data_.size());
    w.u32(entry_point_);
    w.u32(static_cast<std::uint32_t>(max_level_));
    w.u8(transform_matrix_.values.empty() ? 0 : 1);
    if (!transform_matrix_.values.empty()) {
        w.f32_span(transform_matrix_.values);
    }
    for (std::size_t i = 0; i < data_.size(); ++i) {
        w.u32(static_cast<std::uint32_t>(node_level_[i]));
        for (const auto& layer : adjacency_[i]) {
            w.u32(static_cast<std::uint32_t>(layer.size()));
            for (std::uint32_t nb : layer) {
                w.u32(nb);
            }
        }
    }
    w.f32_span(data_.coeffs.values);
    w.to_file(path);
}

HnswIndex HnswIndex::load(const std::filesystem::path& path) {
    wire::Reader r(path);
    r.expect_magic("PHNW1", "hnsw index");
    PANO_REQUIRE(r.u32() == 1, "hnsw index file: unsupported version");
    HnswIndex index;
    index.dim_ = r.u32();
    LevelSpec levels;
    levels.dim = index.dim_;
    std::size_t n_thresholds = r.u32();
    levels.thresholds.resize(n_thresholds);
    for (auto& m : levels.thresholds) {
        m = r.u32();
    }
    levels.validate();
    index.levels_ = levels;
    index.params_.M = r.u32();
    index.params_.ef_construction = r.u32();
    index.params_.seed = r.u64();
    std::size_t n = r.u64();
    index.entry_point_ = r.u32();
    index.max_level_ = static_cast<int>(r.u32());
    index.level_mult_ = 1.0 / std::log(static_cast<double>(index.params_.M));
    if (r.u8() != 0) {
        index.transform_matrix_ = MatrixF(index.dim_, index.dim_);
        r.f32_span(index.transform_matrix_.values);
    }
    index.node_level_.resize(n);
    index.adjacency_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        index.node_level_[i] = static_cast<int>(r.u32());
        index.adjacency_[i].resize(static_cast<std::size_t>(index.node_level_[i]) + 1);
        for (auto& layer : index.adjacency_[i]) {
            layer.resize(r.u32());
            for (auto& nb : layer) {
                nb = r.u32();
                PANO_REQUIRE(nb < n, "hnsw index file: neighbor out of range");
            }
        }
    }
    MatrixF coeffs(n, index.dim_);
    r.f32_span(coeffs.values);
    PANO_REQUIRE(r.at_end(), "hnsw index file: trailing bytes");
    index.data_ = make_transformed_dataset(std::move(coeffs), levels);
    return index;
}

}  // namespace pano
