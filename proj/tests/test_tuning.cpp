#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "msrl/errors.hpp"
#include "msrl/kernels.hpp"
#include "msrl/linalg.hpp"
#include "msrl/tuning.hpp"

#include "test_helpers.hpp"

using namespace msrl;
using namespace msrl::testing;

TEST_CASE("stiefel draws have orthonormal columns") {
    Rng rng(301);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t q = 1 + rng.uniform_index(5);
        const std::size_t n = q + rng.uniform_index(10);
        const Mat o = sample_stiefel_uniform(n, q, rng);
        CHECK(max_abs_diff(crossprod(o, o), Mat::identity(q)) < 1e-10);
    }
    CHECK_THROWS_AS(sample_stiefel_uniform(2, 3, rng), data_error);
}

TEST_CASE("square stiefel draws are orthogonal with unit determinant magnitude") {
    Rng rng(302);
    for (int trial = 0; trial < 20; ++trial) {
        const Mat o = sample_stiefel_uniform(4, 4, rng);
        double log_abs_det = 0.0;
        for (double d : thin_svd(o).d) log_abs_det += std::log(d);
        CHECK(std::abs(std::exp(log_abs_det) - 1.0) < 1e-8);
    }
}

TEST_CASE("q = 1 stiefel draws are uniform on the sphere") {
    Rng rng(303);
    const int draws = 20000;
    double mean_first = 0.0;
    for (int i = 0; i < draws; ++i) mean_first += sample_stiefel_uniform(3, 1, rng)(0, 0);
    mean_first /= draws;
    CHECK(std::abs(mean_first) < 3.0 / std::sqrt(static_cast<double>(draws)));
}

TEST_CASE("mc_tune matches the closed-form sphere-coordinate median") {
    // n=2, p=1, q=1, X = (sqrt(2), 0)': the statistic is c |cos(theta)| with
    // theta uniform, whose median is c / sqrt(2)
    Dataset d;
    d.x = Mat::from_rows({{std::sqrt(2.0)}, {0.0}});
    d.y = Mat::from_rows({{1.0}, {-1.0}});
    const TuneDistribution dist = mc_tune(d, PenaltyKind::L1, 1.01, 50000, 42);
    const double median = quantile(dist, 0.5);
    CHECK(std::abs(median - 1.01 / std::sqrt(2.0)) < 0.01);
}

TEST_CASE("mc_tune never looks at the responses") {
    Rng rng(304);
    const Mat x = random_mat(12, 4, rng);
    Dataset d1, d2;
    d1.x = x;
    d2.x = x;
    d1.y = random_mat(12, 3, rng);        // one error covariance
    d2.y = scaled(random_mat(12, 3, rng), 5.0); // a very different one
    const TuneDistribution t1 = mc_tune(d1, PenaltyKind::GroupL1, 1.01, 200, 7);
    const TuneDistribution t2 = mc_tune(d2, PenaltyKind::GroupL1, 1.01, 200, 7);
    REQUIRE(t1.samples.size() == t2.samples.size());
    for (std::size_t i = 0; i < t1.samples.size(); ++i)
        CHECK(t1.samples[i] == t2.samples[i]); // bitwise
}

TEST_CASE("mc_tune is deterministic under a seed and rejects bad arguments") {
    Rng rng(305);
    Dataset d;
    d.x = random_mat(10, 3, rng);
    d.y = random_mat(10, 2, rng);
    const TuneDistribution a = mc_tune(d, PenaltyKind::L1, 1.01, 100, 11);
    const TuneDistribution b = mc_tune(d, PenaltyKind::L1, 1.01, 100, 11);
    for (std::size_t i = 0; i < a.samples.size(); ++i) CHECK(a.samples[i] == b.samples[i]);
    CHECK_THROWS_AS(mc_tune(d, PenaltyKind::L1, 1.0, 100, 11), data_error);
    Dataset wide;
    wide.x = random_mat(3, 2, rng);
    wide.y = random_mat(3, 5, rng);
    CHECK_THROWS_AS(mc_tune(wide, PenaltyKind::L1, 1.01, 10, 0), data_error);
}

TEST_CASE("quantile: type-7 interpolation and monotonicity") {
    TuneDistribution dist;
    dist.samples = {3.0, 1.0, 2.0};
    dist.sorted = {1.0, 2.0, 3.0};
    CHECK(quantile(dist, 0.5) == doctest::Approx(2.0));
    CHECK(quantile(dist, 0.25) == doctest::Approx(1.5));
    CHECK_THROWS_AS(quantile(dist, 0.0), data_error);
    CHECK_THROWS_AS(quantile(dist, 1.0), data_error);

    Rng rng(306);
    Dataset d;
    d.x = random_mat(10, 4, rng);
    d.y = random_mat(10, 2, rng);
    const TuneDistribution mc = mc_tune(d, PenaltyKind::L1, 1.01, 500, 3);
    double prev = 0.0;
    for (double level : {0.50, 0.75, 0.85, 0.95}) {
        const double v = quantile(mc, level);
        CHECK(v >= prev);
        CHECK(v >= mc.sorted.front());
        CHECK(v <= mc.sorted.back());
        prev = v;
    }
}

TEST_CASE("corollary closed form, L1 plug-in value") {
    CorollaryConstants consts;
    consts.c = 1.01;
    consts.c1 = 1.01;
    const double expected = 1.01 * std::sqrt(2.0 * 1.01 * std::log(2.0 * 500 * 50) / 199.0);
    CHECK(corollary_lambda(PenaltyKind::L1, 200, 500, 50, consts, 0.0) ==
          doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("corollary L1 sample-size condition") {
    CorollaryConstants consts;
    CHECK_THROWS_WITH_AS(corollary_lambda(PenaltyKind::L1, 10, 500, 50, consts, 0.0),
                         doctest::Contains("n > 2*c1*log(2pq) + 1"), data_error);
}

TEST_CASE("corollary nuclear formula is linear in the design spectral norm") {
    CorollaryConstants consts;
    consts.c3 = 3.0;
    const double base = corollary_lambda(PenaltyKind::Nuclear, 200, 100, 20, consts, 30.0);
    const double doubled = corollary_lambda(PenaltyKind::Nuclear, 200, 100, 20, consts, 60.0);
    CHECK(doubled == doctest::Approx(2.0 * base).epsilon(1e-12));
}

TEST_CASE("corollary group condition is checked") {
    CorollaryConstants consts;
    // c2 = 1.01 at p = 500 leaves (sqrt(2)-1) sqrt(2 c2 log p) below sqrt(pi)
    CHECK_THROWS_AS(corollary_lambda(PenaltyKind::GroupL1, 100, 500, 5, consts, 0.0),
                    data_error);
    consts.c2 = 2.0;
    CHECK_NOTHROW(corollary_lambda(PenaltyKind::GroupL1, 100, 500, 5, consts, 0.0));
    const double expected =
        consts.c * std::sqrt(4.0 * consts.c2 * std::log(500.0) / 98.0) +
        consts.c * std::sqrt(5.0 / 100.0);
    CHECK(corollary_lambda(PenaltyKind::GroupL1, 100, 500, 5, consts, 0.0) ==
          doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("corollary constants must exceed one") {
    CorollaryConstants consts;
    consts.c1 = 0.5;
    CHECK_THROWS_AS(corollary_lambda(PenaltyKind::L1, 200, 50, 5, consts, 0.0), data_error);
}

TEST_CASE("lambda_max: zero responses give zero") {
    Rng rng(307);
    Dataset d;
    d.x = random_mat(10, 3, rng);
    d.y = Mat(10, 2, 0.0);
    CHECK(lambda_max(d, PenaltyKind::L1) == 0.0);
}

TEST_CASE("lambda_max agrees with solver behavior across random instances") {
    Rng rng(308);
    for (int trial = 0; trial < 10; ++trial) {
        const Dataset d = random_instance(15 + rng.uniform_index(10), 4, 2, rng);
        for (PenaltyKind kind :
             {PenaltyKind::L1, PenaltyKind::GroupL1, PenaltyKind::Nuclear}) {
            const double lmax = lambda_max(d, kind);
            AdmmConfig cfg;
            cfg.eps_rel = 1e-9;
            cfg.max_iter = 100000;
            const FitResult hi = admm_fit(d, PenaltySpec{kind, 1.001 * lmax}, cfg);
            REQUIRE(frob_norm(hi.b_hat) <= 1e-6);
            const FitResult lo = admm_fit(d, PenaltySpec{kind, 0.9 * lmax}, cfg);
            REQUIRE(frob_norm(lo.b_hat) > 1e-6);
        }
    }
}

TEST_CASE("default grid starts exactly at lambda_max and descends log-spaced") {
    const std::vector<double> grid = default_lambda_grid(2.5, 100, 1e-4);
    CHECK(grid.size() == 100);
    CHECK(grid.front() == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(grid.back() == doctest::Approx(2.5e-4).epsilon(1e-10));
    for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] < grid[i - 1]);
}

TEST_CASE("leave-one-out cross validation matches a hand-rolled loop") {
    Rng rng(309);
    const Dataset d = random_instance(9, 3, 2, rng);
    const std::vector<double> grid = default_lambda_grid(lambda_max(d, PenaltyKind::L1) * 0.95, 4, 0.05);
    SolverConfigs cfgs;

    // explicit fold assignment: row i in fold i
    std::vector<std::size_t> assignment(9);
    for (std::size_t i = 0; i < 9; ++i) assignment[i] = i;
    const PathResult cv =
        cross_validate(d, PenaltyKind::L1, grid, 9, 0, cfgs, &assignment);

    for (std::size_t l = 0; l < grid.size(); ++l) {
        double acc = 0.0;
        for (std::size_t held = 0; held < 9; ++held) {
            Mat ytr(8, 2), xtr(8, 3), yv(1, 2), xv(1, 3);
            std::size_t r = 0;
            for (std::size_t i = 0; i < 9; ++i) {
                if (i == held) {
                    for (std::size_t j = 0; j < 2; ++j) yv(0, j) = d.y(i, j);
                    for (std::size_t j = 0; j < 3; ++j) xv(0, j) = d.x(i, j);
                } else {
                    for (std::size_t j = 0; j < 2; ++j) ytr(r, j) = d.y(i, j);
                    for (std::size_t j = 0; j < 3; ++j) xtr(r, j) = d.x(i, j);
                    ++r;
                }
            }
            const Dataset train = center_and_normalize(ytr, xtr, true);
            for (std::size_t j = 0; j < 3; ++j)
                xv(0, j) = (xv(0, j) - train.x_means[j]) * train.column_scales[j];
            for (std::size_t j = 0; j < 2; ++j) yv(0, j) -= train.y_means[j];
            const std::vector<FitResult> path =
                hybrid_path_fit(train, PenaltyKind::L1, grid, cfgs.admm, cfgs.apgd);
            acc += frob_norm_sq(sub(yv, matmul(xv, path[l].b_hat))) / 2.0;
        }
        CHECK(cv.cv[l].mean == doctest::Approx(acc / 9.0).epsilon(1e-9));
    }
}

TEST_CASE("duplicated rows with aligned folds give identical error curves") {
    Rng rng(310);
    const Mat y_half = random_mat(8, 2, rng);
    const Mat x_half = random_mat(8, 4, rng);
    Mat y(16, 2), x(16, 4);
    for (std::size_t i = 0; i < 8; ++i) {
        for (std::size_t j = 0; j < 2; ++j) y(i, j) = y(i + 8, j) = y_half(i, j);
        for (std::size_t j = 0; j < 4; ++j) x(i, j) = x(i + 8, j) = x_half(i, j);
    }
    const Dataset d = center_and_normalize(y, x, true);
    const std::vector<double> grid =
        default_lambda_grid(lambda_max(d, PenaltyKind::L1) * 0.9, 3, 0.1);
    std::vector<std::size_t> assignment(16);
    for (std::size_t i = 0; i < 16; ++i) assignment[i] = i < 8 ? 0 : 1;
    SolverConfigs cfgs;
    const PathResult cv = cross_validate(d, PenaltyKind::L1, grid, 2, 0, cfgs, &assignment);
    // both folds see the same training data and the same held-out data
    for (std::size_t l = 0; l < grid.size(); ++l) CHECK(cv.cv[l].std_error < 1e-10);
}

TEST_CASE("cross validation fold assignment is deterministic and validated") {
    Rng rng(311);
    const Dataset d = random_instance(12, 3, 2, rng);
    const std::vector<double> grid =
        default_lambda_grid(lambda_max(d, PenaltyKind::L1) * 0.9, 3, 0.1);
    SolverConfigs cfgs;
    const PathResult a = cross_validate(d, PenaltyKind::L1, grid, 3, 17, cfgs);
    const PathResult b = cross_validate(d, PenaltyKind::L1, grid, 3, 17, cfgs);
    for (std::size_t l = 0; l < grid.size(); ++l) {
        CHECK(a.cv[l].mean == b.cv[l].mean);
        CHECK(a.cv[l].std_error == b.cv[l].std_error);
    }
    CHECK_THROWS_AS(cross_validate(d, PenaltyKind::L1, grid, 1, 0, cfgs), data_error);
    CHECK_THROWS_AS(cross_validate(d, PenaltyKind::L1, grid, 13, 0, cfgs), data_error);
}
