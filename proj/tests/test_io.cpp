#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "pano/bench.hpp"
#include "pano/index_flat.hpp"
#include "pano/io.hpp"
#include "support.hpp"

using namespace pano;

namespace {

std::filesystem::path scratch_dir() {
    auto dir = std::filesystem::temp_directory_path() / "pano_io_test";
    std::filesystem::create_directories(dir);
    return dir;
}

void write_raw(const std::filesystem::path& p, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

std::vector<std::uint8_t> le_f32(float v) {
    std::uint32_t u;
    std::memcpy(&u, &v, 4);
    return {static_cast<std::uint8_t>(u), static_cast<std::uint8_t>(u >> 8),
            static_cast<std::uint8_t>(u >> 16), static_cast<std::uint8_t>(u >> 24)};
}

}  // namespace

TEST_SUITE_BEGIN("io");

TEST_CASE("empty file reads as zero vectors") {
    auto p = scratch_dir() / "empty.fvecs";
    write_raw(p, {});
    MatrixF out = read_vectors(p, VectorFormat::fvecs);
    CHECK(out.rows == 0);
}

TEST_CASE("hand-assembled fvecs record") {
    // d=2 little-endian, then 1.0f and 2.0f
    std::vector<std::uint8_t> bytes{0x02, 0x00, 0x00, 0x00};
    for (float v : {1.0f, 2.0f}) {
        auto b = le_f32(v);
        bytes.insert(bytes.end(), b.begin(), b.end());
    }
    auto p = scratch_dir() / "one.fvecs";
    write_raw(p, bytes);
    MatrixF out = read_vectors(p, VectorFormat::fvecs);
    REQUIRE(out.rows == 1);
    REQUIRE(out.cols == 2);
    CHECK(out.at(0, 0) == 1.0f);
    CHECK(out.at(0, 1) == 2.0f);
}

TEST_CASE("inconsistent dimensionality is rejected") {
    std::vector<std::uint8_t> bytes{0x01, 0x00, 0x00, 0x00};
    auto b = le_f32(1.0f);
    bytes.insert(bytes.end(), b.begin(), b.end());
    bytes.insert(bytes.end(), {0x02, 0x00, 0x00, 0x00});
    for (float v : {1.0f, 2.0f}) {
        auto c = le_f32(v);
        bytes.insert(bytes.end(), c.begin(), c.end());
    }
    auto p = scratch_dir() / "mixed.fvecs";
    write_raw(p, bytes);
    CHECK_THROWS_WITH(read_vectors(p, VectorFormat::fvecs),
                      doctest::Contains("inconsistent dimensionality"));
}

TEST_CASE("truncated and malformed records are rejected") {
    auto p = scratch_dir() / "trunc.fvecs";
    write_raw(p, {0x02, 0x00, 0x00, 0x00, 0x01, 0x02});
    CHECK_THROWS(read_vectors(p, VectorFormat::fvecs));

    auto neg = scratch_dir() / "neg.fvecs";
    write_raw(neg, {0xff, 0xff, 0xff, 0xff});
    CHECK_THROWS(read_vectors(neg, VectorFormat::fvecs));

    CHECK_THROWS(read_vectors(scratch_dir() / "missing.fvecs", VectorFormat::fvecs));
}

TEST_CASE("vector files round-trip across formats") {
    auto dir = scratch_dir();
    std::mt19937_64 rng(1);
    MatrixF floats = panotest::gaussian_matrix(11, 7, 2);
    auto p = dir / "rt.fvecs";
    write_vectors(p, floats, VectorFormat::fvecs);
    CHECK(read_vectors(p, VectorFormat::fvecs).values == floats.values);

    MatrixF ints(5, 3);
    for (auto& v : ints.values) {
        v = static_cast<float>(static_cast<int>(rng() % 1000) - 500);
    }
    auto pi = dir / "rt.ivecs";
    write_vectors(pi, ints, VectorFormat::ivecs);
    CHECK(read_vectors(pi, VectorFormat::ivecs).values == ints.values);

    MatrixF bytes(4, 9);
    for (auto& v : bytes.values) {
        v = static_cast<float>(rng() % 256);
    }
    auto pb = dir / "rt.bvecs";
    write_vectors(pb, bytes, VectorFormat::bvecs);
    CHECK(read_vectors(pb, VectorFormat::bvecs).values == bytes.values);

    CHECK(vector_format_from_name("data/base.bvecs") == VectorFormat::bvecs);
    CHECK_THROWS(vector_format_from_name("base.txt"));
}

TEST_CASE("ground-truth id files round-trip") {
    auto p = scratch_dir() / "gt.ivecs";
    std::vector<std::vector<idx_t>> rows{{3, 1, 2}, {0, 5, 9}};
    write_ivecs_ids(p, rows);
    CHECK(read_ivecs_ids(p) == rows);
}

TEST_CASE("ground truth ranks an exact match first") {
    MatrixF data = panotest::gaussian_matrix(30, 6, 5);
    MatrixF queries(1, 6);
    auto src = data.row(17);
    std::copy(src.begin(), src.end(), queries.row(0).begin());
    auto truth = ground_truth(data, queries, 3);
    CHECK(truth[0][0] == 17);
}

TEST_CASE("ground truth on a three-point toy set") {
    MatrixF data(3, 1);
    data.at(0, 0) = 5.0f;
    data.at(1, 0) = 1.0f;
    data.at(2, 0) = 3.0f;
    MatrixF queries(1, 1);
    queries.at(0, 0) = 0.0f;
    auto truth = ground_truth(data, queries, 1);
    CHECK(truth[0][0] == 1);
}

TEST_CASE("ground truth agrees with flat baseline search") {
    MatrixF data = panotest::gaussian_matrix(400, 16, 6);
    MatrixF queries = panotest::gaussian_matrix(6, 16, 7);
    auto truth = ground_truth(data, queries, 10);
    FlatIndex index = FlatIndex::build(data, make_uniform_levels(16, 8));
    for (std::size_t qi = 0; qi < queries.rows; ++qi) {
        auto result = index.search(queries.row(qi), 10, SearchMode::baseline);
        REQUIRE(result.neighbors.size() == truth[qi].size());
        for (std::size_t r = 0; r < truth[qi].size(); ++r) {
            CHECK(result.neighbors[r].id == truth[qi][r]);
        }
    }
}

TEST_SUITE_END();
