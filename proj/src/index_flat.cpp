#include "pano/index_flat.hpp"

#include <cmath>

#include "pano/io.hpp"

namespace pano {

SearchMode search_mode_from_name(const std::string& name) {
    if (name == "baseline") return SearchMode::baseline;
    if (name == "panorama") return SearchMode::panorama;
    PANO_REQUIRE(false, "unknown search mode '" + name + "' (want baseline|panorama)");
    return SearchMode::baseline;
}

const char* to_string(SearchMode mode) {
    return mode == SearchMode::baseline ? "baseline" : "panorama";
}

namespace detail {

MatrixF maybe_transform(const MatrixF& data, const MatrixF& transform_matrix) {
    if (transform_matrix.values.empty()) {
        return data;
    }
    PANO_REQUIRE(transform_matrix.rows == data.cols && transform_matrix.cols == data.cols,
                 "index: transform dimension mismatch");
    MatrixF out(data.rows, data.cols);
    const std::size_t d = data.cols;
    for (std::size_t i = 0; i < data.rows; ++i) {
        auto x = data.row(i);
        auto y = out.row(i);
        for (std::size_t r = 0; r < d; ++r) {
            double acc = 0.0;
            const float* mrow = transform_matrix.row(r).data();
            for (std::size_t j = 0; j < d; ++j) {
                acc += static_cast<double>(mrow[j]) * static_cast<double>(x[j]);
            }
            y[r] = static_cast<float>(acc);
        }
    }
    return out;
}

TransformedVector prepare_query_impl(std::span<const float> query, const MatrixF& transform_matrix,
                                     const LevelSpec& levels) {
    PANO_REQUIRE(query.size() == levels.dim, "search: query dimension mismatch");
    if (transform_matrix.values.empty()) {
        return precompute_tails(query, levels);
    }
    const std::size_t d = levels.dim;
    std::vector<float> transformed(d);
    for (std::size_t r = 0; r < d; ++r) {
        double acc = 0.0;
        const float* mrow = transform_matrix.row(r).data();
        for (std::size_t j = 0; j < d; ++j) {
            acc += static_cast<double>(mrow[j]) * static_cast<double>(query[j]);
        }
        transformed[r] = static_cast<float>(acc);
    }
    return precompute_tails(transformed, levels);
}

}  // namespace detail

void baseline_scan(const TransformedVector& query, const LevelMajorBatch& batch, ResultHeap& heap,
                   WorkCounters& counters) {
    const std::size_t L = batch.levels.num_levels();
    for (std::size_t i = 0; i < batch.batch_size; ++i) {
        double acc = 0.0;
        // levels enumerate the dimensions in ascending order, so this matches
        // a plain j-loop over the full vectors
        for (std::size_t l = 1; l <= L; ++l) {
            auto x = batch.level_span_of(l, i);
            const float* q = query.coeffs.data() + batch.levels.level_begin(l);
            for (std::size_t j = 0; j < x.size(); ++j) {
                double diff = static_cast<double>(q[j]) - static_cast<double>(x[j]);
                acc += diff * diff;
            }
        }
        heap.push_exact(acc, batch.ids[i]);
        counters.feature_terms += batch.levels.dim;
        counters.candidates += 1;
    }
}

FlatIndex FlatIndex::build(const MatrixF& data, const LevelSpec& levels,
                           const TransformModel* transform, std::size_t batch_size) {
    levels.validate();
    PANO_REQUIRE(data.cols == levels.dim, "index: data dimension mismatch");
    PANO_REQUIRE(data.rows >= 1, "index: empty dataset");
    FlatIndex index;
    index.dim_ = data.cols;
    index.ntotal_ = data.rows;
    index.batch_size_ = batch_size;
    index.levels_ = levels;
    if (transform) {
        PANO_REQUIRE(transform->dim == data.cols, "index: transform dimension mismatch");
        index.transform_matrix_ = transform->matrix;
    }
    MatrixF coeffs = detail::maybe_transform(data, index.transform_matrix_);
    index.batches_ = build_batches(make_transformed_dataset(std::move(coeffs), levels), batch_size);
    return index;
}

TransformedVector FlatIndex::prepare_query(std::span<const float> query) const {
    return detail::prepare_query_impl(query, transform_matrix_, levels_);
}

SearchResult FlatIndex::search(std::span<const float> query, std::size_t k, SearchMode mode,
                               const EngineConfig& config) const {
    PANO_REQUIRE(k >= 1, "search: k must be >= 1");
    TransformedVector q = prepare_query(query);
    SearchResult result;
    result.counters.dim = dim_;
    if (mode == SearchMode::baseline) {
        ResultHeap heap(k);
        for (const auto& batch : batches_) {
            baseline_scan(q, batch, heap, result.counters);
        }
        result.neighbors = heap.finalize();
    } else {
        result.neighbors = refine_batches(q, batches_, k, config, &result.counters);
    }
    return result;
}

void FlatIndex::save(const std::filesystem::path& path) const {
    wire::Writer w;
    w.magic("PFLT1");
    w.u32(1);  // format version
    w.u32(static_cast<std::uint32_t>(dim_));
    w.u32(static_cast<std::uint32_t>(levels_.thresholds.size()));
    for (std::size_t m : levels_.thresholds) {
        w.u32(static_cast<std::uint32_t>(m));
    }
    w.u32(static_cast<std::uint32_t>(batch_size_));
    w.u64(ntotal_);
    w.u8(transform_matrix_.values.empty() ? 0 : 1);
    if (!transform_matrix_.values.empty()) {
        w.f32_span(transform_matrix_.values);
    }
    TransformedDataset ds = reconstruct(batches_);
    w.f32_span(ds.coeffs.values);
    w.to_file(path);
}

FlatIndex FlatIndex::load(const std::filesystem::path& path) {
    wire::Reader r(path);
    r.expect_magic("PFLT1", "flat index");
    PANO_REQUIRE(r.u32() == 1, "flat index file: unsupported version");
    FlatIndex index;
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
    if (r.u8() != 0) {
        index.transform_matrix_ = MatrixF(index.dim_, index.dim_);
        r.f32_span(index.transform_matrix_.values);
    }
    MatrixF coeffs(index.ntotal_, index.dim_);
    r.f32_span(coeffs.values);
    PANO_REQUIRE(r.at_end(), "flat index file: trailing bytes");
    index.batches_ =
        build_batches(make_transformed_dataset(std::move(coeffs), levels), index.batch_size_);
    return index;
}

}  // namespace pano
