#include <doctest.h>

#include <cmath>
#include <random>

#include "pano/bounds.hpp"
#include "pano/levels.hpp"
#include "support.hpp"

using namespace pano;

TEST_SUITE_BEGIN("bounds");

TEST_CASE("level spec construction and validation") {
    LevelSpec uniform = make_uniform_levels(64, 32);
    CHECK(uniform.num_levels() == 32);
    CHECK(uniform.level_width(1) == 2);
    CHECK(uniform.thresholds.front() == 0);
    CHECK(uniform.thresholds.back() == 64);

    // remainder is absorbed by the last level
    LevelSpec ragged = make_uniform_levels(100, 32);
    CHECK(ragged.num_levels() == 32);
    CHECK(ragged.level_width(32) == 100 - 31 * 3);

    LevelSpec per_dim = make_per_dimension_levels(5);
    CHECK(per_dim.num_levels() == 5);

    CHECK_THROWS(make_levels(4, {3, 2}));
    CHECK_THROWS(make_levels(4, {0}));
}

TEST_CASE("precompute_tails worked example") {
    // coeffs (1,2,2) with per-dimension levels
    std::vector<float> coeffs{1.0f, 2.0f, 2.0f};
    TransformedVector v = precompute_tails(coeffs, make_per_dimension_levels(3));
    REQUIRE(v.tails.size() == 4);
    CHECK(v.tails[0] == doctest::Approx(9.0));
    CHECK(v.tails[1] == doctest::Approx(8.0));
    CHECK(v.tails[2] == doctest::Approx(4.0));
    CHECK(v.tails[3] == 0.0);
}

TEST_CASE("precompute_tails zero vector and single level") {
    std::vector<float> zeros(6, 0.0f);
    TransformedVector z = precompute_tails(zeros, make_uniform_levels(6, 3));
    for (double t : z.tails) {
        CHECK(t == 0.0);
    }

    std::vector<float> coeffs{1.0f, 2.0f, 2.0f};
    TransformedVector single = precompute_tails(coeffs, make_uniform_levels(3, 1));
    REQUIRE(single.tails.size() == 2);
    CHECK(single.tails[0] == doctest::Approx(9.0));
    CHECK(single.tails[1] == 0.0);
}

TEST_CASE("precompute_tails dimension mismatch") {
    std::vector<float> coeffs{1.0f, 2.0f};
    CHECK_THROWS(precompute_tails(coeffs, make_per_dimension_levels(3)));
}

TEST_CASE("tails are nonincreasing and consistent with the norm") {
    std::mt19937_64 rng(7);
    std::normal_distribution<float> normal(0.0f, 2.0f);
    for (int rep = 0; rep < 20; ++rep) {
        std::size_t d = 1 + static_cast<std::size_t>(rng() % 64);
        std::vector<float> coeffs(d);
        for (auto& c : coeffs) {
            c = normal(rng);
        }
        LevelSpec levels = make_uniform_levels(d, 1 + rng() % 8);
        TransformedVector v = precompute_tails(coeffs, levels);
        double direct = 0.0;
        for (float c : coeffs) {
            direct += static_cast<double>(c) * static_cast<double>(c);
        }
        CHECK(v.tails[0] == doctest::Approx(direct).epsilon(1e-6));
        for (std::size_t l = 1; l < v.tails.size(); ++l) {
            CHECK(v.tails[l] <= v.tails[l - 1] + 1e-12);
        }
        CHECK(v.tails.back() == 0.0);
    }
}

TEST_CASE("refine_step level-0 state uses norms only") {
    LevelSpec levels = make_per_dimension_levels(3);
    TransformedVector q = precompute_tails(std::vector<float>{1.0f, 2.0f, 2.0f}, levels);
    TransformedVector x = precompute_tails(std::vector<float>{2.0f, 0.0f, 1.0f}, levels);
    RefineState s0 = init_refine_state(q, x);
    double nq = 3.0, nx = std::sqrt(5.0);
    CHECK(s0.lb == doctest::Approx((nq - nx) * (nq - nx)));
    CHECK(s0.ub == doctest::Approx((nq + nx) * (nq + nx)));
    CHECK(s0.level == 0);
}

TEST_CASE("refine_step worked example after level 1") {
    // q=(1,2,2), x=(2,0,1), identity transform, per-dimension levels
    LevelSpec levels = make_per_dimension_levels(3);
    TransformedVector q = precompute_tails(std::vector<float>{1.0f, 2.0f, 2.0f}, levels);
    TransformedVector x = precompute_tails(std::vector<float>{2.0f, 0.0f, 1.0f}, levels);
    RefineState s = refine_step(init_refine_state(q, x), q, x, 1, levels);
    CHECK(s.partial == doctest::Approx(2.0));
    // 14 - 2*(2 + sqrt(8*1)) and 14 - 2*(2 - sqrt(8))
    CHECK(s.lb == doctest::Approx(14.0 - 2.0 * (2.0 + std::sqrt(8.0))).epsilon(1e-12));
    CHECK(s.ub == doctest::Approx(14.0 - 2.0 * (2.0 - std::sqrt(8.0))).epsilon(1e-12));
    CHECK(s.lb == doctest::Approx(4.34315).epsilon(1e-5));
    CHECK(s.ub == doctest::Approx(15.65685).epsilon(1e-5));
    // exact distance 6 lies between
    CHECK(s.lb <= 6.0);
    CHECK(s.ub >= 6.0);

    s = refine_step(s, q, x, 2, levels);
    s = refine_step(s, q, x, 3, levels);
    CHECK(s.lb == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(s.ub == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("refine_step rejects skipped levels") {
    LevelSpec levels = make_per_dimension_levels(3);
    TransformedVector q = precompute_tails(std::vector<float>{1.0f, 0.0f, 0.0f}, levels);
    RefineState s0 = init_refine_state(q, q);
    CHECK_THROWS(refine_step(s0, q, q, 2, levels));
    CHECK_THROWS(refine_step(s0, q, q, 0, levels));
}

TEST_CASE("sandwich and monotone tightening over random pairs") {
    std::mt19937_64 rng(42);
    std::normal_distribution<float> normal(0.0f, 1.5f);
    int pairs_checked = 0;
    for (std::size_t d : {2u, 3u, 8u, 64u}) {
        LevelSpec levels = make_uniform_levels(d, 8);
        for (int rep = 0; rep < 300; ++rep) {
            std::vector<float> qa(d), xa(d);
            for (std::size_t j = 0; j < d; ++j) {
                qa[j] = normal(rng);
                xa[j] = normal(rng);
            }
            TransformedVector q = precompute_tails(qa, levels);
            TransformedVector x = precompute_tails(xa, levels);
            double exact = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                double diff = static_cast<double>(qa[j]) - static_cast<double>(xa[j]);
                exact += diff * diff;
            }
            double scale = std::max(1.0, exact);
            RefineState s = init_refine_state(q, x);
            double prev_lb = s.lb, prev_ub = s.ub;
            CHECK(s.lb <= exact + 1e-9 * scale);
            CHECK(s.ub >= exact - 1e-9 * scale);
            for (std::size_t l = 1; l <= levels.num_levels(); ++l) {
                s = refine_step(s, q, x, l, levels);
                CHECK(s.lb >= prev_lb - 1e-9 * scale);
                CHECK(s.ub <= prev_ub + 1e-9 * scale);
                CHECK(s.lb <= exact + 1e-9 * scale);
                CHECK(s.ub >= exact - 1e-9 * scale);
                prev_lb = s.lb;
                prev_ub = s.ub;
            }
            CHECK(s.lb == doctest::Approx(exact).epsilon(1e-5));
            CHECK(s.ub == doctest::Approx(exact).epsilon(1e-5));
            ++pairs_checked;
        }
    }
    CHECK(pairs_checked >= 1000);
}

TEST_CASE("terminal exactness in wide precision on representable inputs") {
    // small integers are exact in f32, so the only error left is the f64
    // accumulation of the decomposition
    std::mt19937_64 rng(3);
    LevelSpec levels = make_uniform_levels(16, 4);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<float> qa(16), xa(16);
        for (std::size_t j = 0; j < 16; ++j) {
            qa[j] = static_cast<float>(static_cast<int>(rng() % 17) - 8);
            xa[j] = static_cast<float>(static_cast<int>(rng() % 17) - 8);
        }
        TransformedVector q = precompute_tails(qa, levels);
        TransformedVector x = precompute_tails(xa, levels);
        double exact = 0.0;
        for (std::size_t j = 0; j < 16; ++j) {
            double diff = static_cast<double>(qa[j]) - static_cast<double>(xa[j]);
            exact += diff * diff;
        }
        double got = refine_exact(q, x, levels);
        CHECK(got == doctest::Approx(exact).epsilon(1e-12));
    }
}

TEST_CASE("orthogonal transforms preserve distances") {
    const std::size_t d = 16;
    MatrixD rotation = cayley_map(panotest::random_skew(d, 11), 1.0);
    MatrixF rot = rotation.to_float();
    std::mt19937_64 rng(12);
    std::normal_distribution<float> normal(0.0f, 1.0f);
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<float> qa(d), xa(d), tq(d), tx(d);
        for (std::size_t j = 0; j < d; ++j) {
            qa[j] = normal(rng);
            xa[j] = normal(rng);
        }
        for (std::size_t r = 0; r < d; ++r) {
            double accq = 0.0, accx = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                accq += static_cast<double>(rot.at(r, j)) * static_cast<double>(qa[j]);
                accx += static_cast<double>(rot.at(r, j)) * static_cast<double>(xa[j]);
            }
            tq[r] = static_cast<float>(accq);
            tx[r] = static_cast<float>(accx);
        }
        double before = 0.0, after = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            double db = static_cast<double>(qa[j]) - static_cast<double>(xa[j]);
            double da = static_cast<double>(tq[j]) - static_cast<double>(tx[j]);
            before += db * db;
            after += da * da;
        }
        CHECK(after == doctest::Approx(before).epsilon(1e-4));
    }
}

TEST_SUITE_END();
