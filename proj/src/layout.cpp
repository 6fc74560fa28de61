#include "pano/layout.hpp"

#include <cstring>
#include <numeric>

namespace pano {

TransformedVector TransformedDataset::view_as_vector(std::size_t i) const {
    TransformedVector v;
    auto row = coeffs.row(i);
    v.coeffs.assign(row.begin(), row.end());
    auto t = tail_row(i);
    v.tails.assign(t.begin(), t.end());
    return v;
}

TransformedDataset make_transformed_dataset(MatrixF coeffs, const LevelSpec& levels,
                                            std::vector<idx_t> ids) {
    levels.validate();
    PANO_REQUIRE(coeffs.cols == levels.dim, "dataset: dimension mismatch with levels");
    TransformedDataset ds;
    ds.levels = levels;
    const std::size_t n = coeffs.rows;
    const std::size_t L = levels.num_levels();
    ds.tails.resize(n * (L + 1));
    for (std::size_t i = 0; i < n; ++i) {
        TransformedVector tv = precompute_tails(coeffs.row(i), levels);
        std::copy(tv.tails.begin(), tv.tails.end(), ds.tails.begin() + i * (L + 1));
    }
    ds.coeffs = std::move(coeffs);
    if (ids.empty()) {
        ids.resize(n);
        std::iota(ids.begin(), ids.end(), idx_t{0});
    }
    PANO_REQUIRE(ids.size() == n, "dataset: id count mismatch");
    ds.ids = std::move(ids);
    return ds;
}

std::span<const float> LevelMajorBatch::level_slice(std::size_t level) const {
    PANO_REQUIRE(level >= 1 && level <= levels.num_levels(), "level_slice: level out of range");
    // offset = B * m_{l-1}: the levels before l occupy the prefix
    std::size_t offset = batch_size * levels.level_begin(level);
    return {data.data() + offset, batch_size * levels.level_width(level)};
}

std::span<const float> LevelMajorBatch::level_span_of(std::size_t level, std::size_t i) const {
    std::size_t w = levels.level_width(level);
    std::size_t offset = batch_size * levels.level_begin(level) + i * w;
    return {data.data() + offset, w};
}

std::vector<LevelMajorBatch> build_batches(const TransformedDataset& dataset, std::size_t B) {
    PANO_REQUIRE(B >= 1, "build_batches: batch size must be >= 1");
    const std::size_t n = dataset.size();
    const std::size_t L = dataset.levels.num_levels();
    const std::size_t d = dataset.levels.dim;
    std::vector<LevelMajorBatch> batches;
    batches.reserve((n + B - 1) / B);
    for (std::size_t base = 0; base < n; base += B) {
        const std::size_t b = std::min(B, n - base);
        LevelMajorBatch batch;
        batch.batch_size = b;
        batch.levels = dataset.levels;
        batch.data.resize(b * d);
        batch.tails.resize(b * (L + 1));
        batch.ids.assign(dataset.ids.begin() + base, dataset.ids.begin() + base + b);
        float* out = batch.data.data();
        for (std::size_t l = 1; l <= L; ++l) {
            const std::size_t begin = dataset.levels.level_begin(l);
            const std::size_t w = dataset.levels.level_width(l);
            for (std::size_t i = 0; i < b; ++i) {
                const float* src = dataset.coeffs.row(base + i).data() + begin;
                std::memcpy(out, src, w * sizeof(float));
                out += w;
            }
        }
        for (std::size_t l = 0; l <= L; ++l) {
            for (std::size_t i = 0; i < b; ++i) {
                batch.tails[l * b + i] = dataset.tails[(base + i) * (L + 1) + l];
            }
        }
        batches.push_back(std::move(batch));
    }
    return batches;
}

TransformedDataset reconstruct(const std::vector<LevelMajorBatch>& batches) {
    TransformedDataset ds;
    if (batches.empty()) {
        return ds;
    }
    const LevelSpec& levels = batches.front().levels;
    const std::size_t L = levels.num_levels();
    const std::size_t d = levels.dim;
    std::size_t n = 0;
    for (const auto& b : batches) {
        n += b.batch_size;
    }
    ds.levels = levels;
    ds.coeffs = MatrixF(n, d);
    ds.tails.resize(n * (L + 1));
    ds.ids.reserve(n);
    std::size_t base = 0;
    for (const auto& batch : batches) {
        PANO_REQUIRE(batch.levels == levels, "reconstruct: inconsistent level specs");
        for (std::size_t i = 0; i < batch.batch_size; ++i) {
            float* dst = ds.coeffs.row(base + i).data();
            for (std::size_t l = 1; l <= L; ++l) {
                auto src = batch.level_span_of(l, i);
                std::memcpy(dst + levels.level_begin(l), src.data(), src.size() * sizeof(float));
            }
            for (std::size_t l = 0; l <= L; ++l) {
                ds.tails[(base + i) * (L + 1) + l] = batch.tails[l * batch.batch_size + i];
            }
            ds.ids.push_back(batch.ids[i]);
        }
        base += batch.batch_size;
    }
    return ds;
}

}  // namespace pano
