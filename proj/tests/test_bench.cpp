#include <doctest.h>

#include <sstream>

#include "pano/bench.hpp"
#include "support.hpp"

using namespace pano;

TEST_SUITE_BEGIN("bench");

TEST_CASE("single-point grid yields one grid row per mode") {
    MatrixF data = panotest::gaussian_matrix(200, 16, 1);
    MatrixF queries = panotest::gaussian_matrix(4, 16, 2);
    IvfFlatIndex index = IvfFlatIndex::build(data, 4, 1, make_uniform_levels(16, 8));
    auto truth = ground_truth(data, queries, 5);
    BenchOptions opts;
    opts.k = 5;
    opts.repetitions = 1;
    auto rows = sweep_ivf(index, queries, truth, {2}, opts);
    int grid_rows = 0;
    for (const auto& row : rows) {
        if (row.row == "grid") {
            ++grid_rows;
            CHECK(row.param == "nprobe");
            CHECK(row.value == doctest::Approx(2.0));
        }
    }
    CHECK(grid_rows == 2);
}

TEST_CASE("full-probe grid points reach recall one in both modes") {
    MatrixF data = panotest::gaussian_matrix(300, 16, 3);
    MatrixF queries = panotest::gaussian_matrix(5, 16, 4);
    IvfFlatIndex index = IvfFlatIndex::build(data, 6, 2, make_uniform_levels(16, 8));
    auto truth = ground_truth(data, queries, 5);
    BenchOptions opts;
    opts.k = 5;
    opts.repetitions = 1;
    auto rows = sweep_ivf(index, queries, truth, {1, 6}, opts);
    for (const auto& row : rows) {
        if (row.row == "grid" && row.value == doctest::Approx(6.0)) {
            CHECK(row.recall == doctest::Approx(1.0));
        }
    }
}

TEST_CASE("panorama phi beats the baseline at every grid point on compacted data") {
    MatrixF data = panotest::compacted_gaussian(1200, 32, 6.0, 5);
    MatrixF queries = panotest::compacted_gaussian(6, 32, 6.0, 6);
    TrainConfig tc;
    tc.seed = 1;
    tc.alpha_target = 6.0;
    tc.max_epochs = 12;
    TransformModel model = train_transform(data, tc);
    IvfFlatIndex index = IvfFlatIndex::build(data, 8, 3, make_uniform_levels(32, 16), &model);
    auto truth = ground_truth(data, queries, 10);
    BenchOptions opts;
    opts.repetitions = 1;
    auto rows = sweep_ivf(index, queries, truth, {1, 2, 4, 8}, opts);
    double base_phi = -1.0;
    for (const auto& row : rows) {
        if (row.row != "grid") {
            continue;
        }
        if (row.mode == "baseline") {
            CHECK(row.phi == doctest::Approx(1.0));
            base_phi = row.phi;
        } else {
            CHECK(row.phi < base_phi);
        }
    }
}

TEST_CASE("csv schema stays stable") {
    SweepRow row{"grid", "ivf", "panorama", "nprobe", 4, 0.98, 1234.5, 0.12, 99, 1.5, 0.0};
    std::ostringstream out;
    SweepRow::write_header(out);
    row.write(out);
    CHECK(out.str() ==
          "row,index,mode,param,value,recall,qps,phi,feature_terms,wall_ms,speedup\n"
          "grid,ivf,panorama,nprobe,4,0.98,1234.5,0.12,99,1.5,0\n");
}

TEST_CASE("speedup rows interpolate over the common recall range") {
    MatrixF data = panotest::compacted_gaussian(900, 32, 6.0, 7);
    MatrixF queries = panotest::compacted_gaussian(5, 32, 6.0, 8);
    IvfFlatIndex index = IvfFlatIndex::build(data, 8, 4, make_uniform_levels(32, 16));
    auto truth = ground_truth(data, queries, 10);
    BenchOptions opts;
    opts.repetitions = 1;
    auto rows = sweep_ivf(index, queries, truth, {1, 2, 4, 6, 8}, opts);
    for (const auto& row : rows) {
        if (row.row == "speedup") {
            CHECK(row.speedup > 0.0);
            CHECK(row.recall >= 0.0);
            CHECK(row.recall <= 1.0);
        }
    }
}

TEST_SUITE_END();
