#include "pano/index_ivf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

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

std::size_t nearest_centroid(std::span<const float> x, const MatrixF& centroids) {
    std::size_t best = 0;
    double best_dist = sq_distance(x, centroids.row(0));
    for (std::size_t c = 1; c < centroids.rows; ++c) {
        double dist = sq_distance(x, centroids.row(c));
        if (dist < best_dist) {
            best_dist = dist;
            best = c;
        }
    }
    return best;
}

}  // namespace

KMeansResult kmeans(const MatrixF& data, std::size_t n_list, std::uint64_t seed, int iterations) {
    PANO_REQUIRE(n_list >= 1, "kmeans: n_list must be >= 1");
    PANO_REQUIRE(n_list <= data.rows, "kmeans: n_list exceeds the dataset size");
    const std::size_t n = data.rows;
    const std::size_t d = data.cols;
    std::mt19937_64 rng(seed);

    // k-means++ seeding
    MatrixF centroids(n_list, d);
    std::vector<double> min_dist(n, std::numeric_limits<double>::infinity());
    {
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        auto first = data.row(pick(rng));
        std::copy(first.begin(), first.end(), centroids.row(0).begin());
    }
    for (std::size_t c = 1; c < n_list; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double dist = sq_distance(data.row(i), centroids.row(c - 1));
            min_dist[i] = std::min(min_dist[i], dist);
            total += min_dist[i];
        }
        std::size_t chosen = 0;
        if (total > 0.0) {
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            double target = unit(rng) * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                acc += min_dist[i];
                if (acc >= target) {
                    chosen = i;
                    break;
                }
            }
        } else {
            std::uniform_int_distribution<std::size_t> pick(0, n - 1);
            chosen = pick(rng);
        }
        auto src = data.row(chosen);
        std::copy(src.begin(), src.end(), centroids.row(c).begin());
    }

    KMeansResult result;
    result.assign.assign(n, 0);
    std::vector<double> sums(n_list * d);
    std::vector<std::size_t> counts(n_list);
    for (int it = 0; it < iterations; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            result.assign[i] = static_cast<std::uint32_t>(nearest_centroid(data.row(i), centroids));
        }
        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            auto row = data.row(i);
            double* dst = sums.data() + result.assign[i] * d;
            for (std::size_t j = 0; j < d; ++j) {
                dst[j] += static_cast<double>(row[j]);
            }
            ++counts[result.assign[i]];
        }
        for (std::size_t c = 0; c < n_list; ++c) {
            if (counts[c] == 0) {
                continue;  // re-seeded below
            }
            auto dst = centroids.row(c);
            for (std::size_t j = 0; j < d; ++j) {
                dst[j] = static_cast<float>(sums[c * d + j] / static_cast<double>(counts[c]));
            }
        }
        // re-seed empty clusters from the largest cluster's farthest point
        for (std::size_t c = 0; c < n_list; ++c) {
            if (counts[c] > 0) {
                continue;
            }
            std::size_t largest =
                std::distance(counts.begin(), std::max_element(counts.begin(), counts.end()));
            std::size_t farthest = 0;
            double far_dist = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (result.assign[i] != largest) {
                    continue;
                }
                double dist = sq_distance(data.row(i), centroids.row(largest));
                if (dist > far_dist) {
                    far_dist = dist;
                    farthest = i;
                }
            }
            auto src = data.row(farthest);
            std::copy(src.begin(), src.end(), centroids.row(c).begin());
            result.assign[farthest] = static_cast<std::uint32_t>(c);
            counts[c] = 1;
            --counts[largest];
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        result.assign[i] = static_cast<std::uint32_t>(nearest_centroid(data.row(i), centroids));
    }
    result.centroids = std::move(centroids);
    return result;
}

void IvfFlatIndex::build_cluster_batches(const MatrixF& transformed) {
    const std::size_t n_clusters = centroids_.rows;
    const std::size_t L = levels_.num_levels();
    (void)L;
    cluster_batches_.clear();
    cluster_batches_.resize(n_clusters);
    for (std::size_t c = 0; c < n_clusters; ++c) {
        std::vector<idx_t> members;
        for (std::size_t i = 0; i < transformed.rows; ++i) {
            if (assign_[i] == c) {
                members.push_back(static_cast<idx_t>(i));
            }
        }
        if (members.empty()) {
            continue;
        }
        MatrixF coeffs(members.size(), dim_);
        for (std::size_t m = 0; m < members.size(); ++m) {
            auto src = transformed.row(static_cast<std::size_t>(members[m]));
            std::copy(src.begin(), src.end(), coeffs.row(m).begin());
        }
        cluster_batches_[c] =
            build_batches(make_transformed_dataset(std::move(coeffs), levels_, members), batch_size_);
    }
}

IvfFlatIndex IvfFlatIndex::build(const MatrixF& data, std::size_t n_list, std::uint64_t seed,
                                 const LevelSpec& levels, const TransformModel* transform,
                                 std::size_t batch_size) {
    levels.validate();
    PANO_REQUIRE(data.cols == levels.dim, "ivf: data dimension mismatch");
    PANO_REQUIRE(n_list <= data.rows, "ivf: n_list exceeds the dataset size");
    IvfFlatIndex index;
    index.dim_ = data.cols;
    index.ntotal_ = data.rows;
    index.batch_size_ = batch_size;
    index.seed_ = seed;
    index.levels_ = levels;
    if (transform) {
        PANO_REQUIRE(transform->dim == data.cols, "ivf: transform dimension mismatch");
        index.transform_matrix_ = transform->matrix;
    }
    MatrixF transformed = detail::maybe_transform(data, index.transform_matrix_);
    KMeansResult km = kmeans(transformed, n_list, seed);
    index.centroids_ = std::move(km.centroids);
    index.assign_ = std::move(km.assign);
    index.build_cluster_batches(transformed);
    return index;
}

TransformedVector IvfFlatIndex::prepare_query(std::span<const float> query) const {
    return detail::prepare_query_impl(query, transform_matrix_, levels_);
}

SearchResult IvfFlatIndex::search(std::span<const float> query, std::size_t k, std::size_t n_probe,
                                  SearchMode mode, const EngineConfig& config) const {
    PANO_REQUIRE(k >= 1, "search: k must be >= 1");
    PANO_REQUIRE(n_probe >= 1 && n_probe <= centroids_.rows, "search: invalid n_probe");
    TransformedVector q = prepare_query(query);

    // probe order: ascending centroid distance, ties by cluster id
    std::vector<std::pair<double, std::size_t>> order(centroids_.rows);
    for (std::size_t c = 0; c < centroids_.rows; ++c) {
        order[c] = {sq_distance(q.coeffs, centroids_.row(c)), c};
    }
    std::sort(order.begin(), order.end());

    SearchResult result;
    result.counters.dim = dim_;
    if (mode == SearchMode::baseline) {
        ResultHeap heap(k);
        for (std::size_t p = 0; p < n_probe; ++p) {
            for (const auto& batch : cluster_batches_[order[p].second]) {
                baseline_scan(q, batch, heap, result.counters);
            }
        }
        result.neighbors = heap.finalize();
    } else {
        RefineRun run(q, k, config, levels_);
        for (std::size_t p = 0; p < n_probe; ++p) {
            for (const auto& batch : cluster_batches_[order[p].second]) {
                run.consume_batch(batch);
            }
        }
        result.counters.merge(run.counters());
        result.neighbors = run.results();
    }
    return result;
}

void IvfFlatIndex::save(const std::filesystem::path& path) const {
    wire::Writer w;
    w.magic("PIVF1");
    w.u32(1);
    w.u32(static_cast<std::uint32_t>(dim_));
    w.u32(static_cast<std::uint32_t>(levels_.thresholds.size()));
    for (std::size_t m : levels_.thresholds) {
        w.u32(static_cast<std::uint32_t>(m));
    }
    w.u32(static_cast<std::uint32_t>(batch_size_));
    w.u64(ntotal_);
    w.u64(seed_);
    w.u32(static_cast<std::uint32_t>(centroids_.rows));
    w.u8(transform_matrix_.values.empty() ? 0 : 1);
    if (!transform_matrix_.values.empty()) {
        w.f32_span(transform_matrix_.values);
    }
    w.f32_span(centroids_.values);
    for (std::uint32_t a : assign_) {
        w.u32(a);
    }
    // transformed vectors in original id order
    MatrixF coeffs(ntotal_, dim_);
    for (const auto& batches : cluster_batches_) {
        for (const auto& batch : batches) {
            TransformedDataset part = reconstruct({batch});
            for (std::size_t i = 0; i < part.size(); ++i) {
                auto src = part.coeffs.row(i);
                std::copy(src.begin(), src.end(),
                          coeffs.row(static_cast<std::size_t>(part.ids[i])).begin());
            }
        }
    }
    w.f32_span(coeffs.values);
    w.to_file(path);
}

IvfFlatIndex IvfFlatIndex::load(const std::filesystem::path& path) {
    wire::Reader r(path);
    r.expect_magic("PIVF1", "ivf index");
    PANO_REQUIRE(r.u32() == 1, "ivf index file: unsupported version");
    IvfFlatIndex index;
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
    index.batch_size_ = r.u32();
    index.ntotal_ = r.u64();
    index.seed_ = r.u64();
    std::size_t n_list = r.u32();
    if (r.u8() != 0) {
        index.transform_matrix_ = MatrixF(index.dim_, index.dim_);
        r.f32_span(index.transform_matrix_.values);
    }
    index.centroids_ = MatrixF(n_list, index.dim_);
    r.f32_span(index.centroids_.values);
    index.assign_.resize(index.ntotal_);
    for (auto& a : index.assign_) {
        a = r.u32();
        PANO_REQUIRE(a < n_list, "ivf index file: assignment out of range");
    }
    MatrixF coeffs(index.ntotal_, index.dim_);
    r.f32_span(coeffs.values);
    PANO_REQUIRE(r.at_end(), "ivf index file: trailing bytes");
    index.build_cluster_batches(coeffs);
    return index;
}

}  // namespace pano
