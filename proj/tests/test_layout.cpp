#include <doctest.h>

#include <random>

#include "pano/engine.hpp"
#include "pano/layout.hpp"
#include "support.hpp"

using namespace pano;

TEST_SUITE_BEGIN("layout");

TEST_CASE("level-major order for the two-vector example") {
    // B=2, d=4, 2 equal levels, vectors v0, v1
    MatrixF coeffs(2, 4);
    for (std::size_t j = 0; j < 4; ++j) {
        coeffs.at(0, j) = static_cast<float>(j);        // v0 = (0,1,2,3)
        coeffs.at(1, j) = static_cast<float>(10 + j);   // v1 = (10,11,12,13)
    }
    auto batches = build_batches(make_transformed_dataset(coeffs, make_uniform_levels(4, 2)), 2);
    REQUIRE(batches.size() == 1);
    std::vector<float> expected{0, 1, 10, 11, 2, 3, 12, 13};
    CHECK(batches[0].data == expected);
    CHECK(batches[0].ids == std::vector<idx_t>{0, 1});
}

TEST_CASE("single level degenerates to vector-major concatenation") {
    MatrixF coeffs(3, 4);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            coeffs.at(i, j) = static_cast<float>(i * 4 + j);
        }
    }
    auto batches = build_batches(make_transformed_dataset(coeffs, make_uniform_levels(4, 1)), 3);
    REQUIRE(batches.size() == 1);
    CHECK(batches[0].data == coeffs.values);
}

TEST_CASE("level_slice views") {
    MatrixF coeffs(2, 4);
    for (std::size_t j = 0; j < 4; ++j) {
        coeffs.at(0, j) = static_cast<float>(j);
        coeffs.at(1, j) = static_cast<float>(10 + j);
    }
    LevelSpec levels = make_uniform_levels(4, 2);
    auto batches = build_batches(make_transformed_dataset(coeffs, levels), 2);
    auto slice1 = batches[0].level_slice(1);
    REQUIRE(slice1.size() == 4);
    CHECK(slice1[0] == 0.0f);
    CHECK(slice1[1] == 1.0f);
    CHECK(slice1[2] == 10.0f);
    CHECK(slice1[3] == 11.0f);
    CHECK_THROWS(batches[0].level_slice(0));
    CHECK_THROWS(batches[0].level_slice(3));

    // slice offsets are strictly increasing in the level
    const float* base = batches[0].data.data();
    CHECK(batches[0].level_slice(2).data() > batches[0].level_slice(1).data());
    CHECK(batches[0].level_slice(1).data() == base);
}

TEST_CASE("partial final batch keeps its own width") {
    MatrixF coeffs = panotest::gaussian_matrix(7, 6, 5);
    LevelSpec levels = make_uniform_levels(6, 3);
    auto batches = build_batches(make_transformed_dataset(coeffs, levels), 4);
    REQUIRE(batches.size() == 2);
    CHECK(batches[0].batch_size == 4);
    CHECK(batches[1].batch_size == 3);
    CHECK(batches[1].level_slice(3).size() == 3 * levels.level_width(3));
}

TEST_CASE("round-trip is bit-exact over random shapes") {
    std::mt19937_64 rng(99);
    for (int rep = 0; rep < 25; ++rep) {
        std::size_t n = 1 + rng() % 40;
        std::size_t d = 1 + rng() % 24;
        std::size_t B = 1 + rng() % 12;
        std::size_t L = 1 + rng() % 6;
        MatrixF coeffs = panotest::gaussian_matrix(n, d, rng());
        TransformedDataset ds = make_transformed_dataset(coeffs, make_uniform_levels(d, L));
        TransformedDataset back = reconstruct(build_batches(ds, B));
        CHECK(back.coeffs == ds.coeffs);
        CHECK(back.tails == ds.tails);
        CHECK(back.ids == ds.ids);
    }
}

TEST_CASE("batched refinement matches vector-major point-centric refinement") {
    std::mt19937_64 rng(123);
    for (int rep = 0; rep < 10; ++rep) {
        std::size_t n = 50 + rng() % 200;
        std::size_t d = 8 + rng() % 32;
        MatrixF coeffs = panotest::gaussian_matrix(n, d, rng());
        TransformedDataset ds = make_transformed_dataset(coeffs, make_uniform_levels(d, 8));
        auto batches = build_batches(ds, 32);

        EngineConfig pc;
        pc.variant = EngineVariant::point_centric;
        pc.batch_size = 1;
        auto from_vm = refine_point_centric(ds.view_as_vector(0), ds, 10, pc);
        auto from_lm = refine_batches(ds.view_as_vector(0), batches, 10, pc);
        REQUIRE(from_vm.size() == from_lm.size());
        for (std::size_t i = 0; i < from_vm.size(); ++i) {
            CHECK(from_vm[i].id == from_lm[i].id);
            CHECK(from_vm[i].distance_sq == doctest::Approx(from_lm[i].distance_sq).epsilon(1e-12));
        }
    }
}

TEST_SUITE_END();
