#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "msrl/admm.hpp"
#include "msrl/errors.hpp"
#include "msrl/kernels.hpp"
#include "msrl/linalg.hpp"
#include "msrl/tuning.hpp"

#include "test_helpers.hpp"

using namespace msrl;
using namespace msrl::testing;

namespace {

AdmmConfig tight_config() {
    AdmmConfig cfg;
    cfg.eps_rel = 1e-9;
    cfg.max_iter = 200000;
    return cfg;
}

// nuclear norm of a two-column matrix from the closed-form eigenvalues of
// its 2x2 Gram matrix; the brute-force oracle must not share the library's
// SVD path
double nuclear_norm_2col(const Mat& r) {
    double g00 = 0.0, g01 = 0.0, g11 = 0.0;
    for (std::size_t i = 0; i < r.rows(); ++i) {
        g00 += r(i, 0) * r(i, 0);
        g01 += r(i, 0) * r(i, 1);
        g11 += r(i, 1) * r(i, 1);
    }
    const double tr = g00 + g11;
    const double det = g00 * g11 - g01 * g01;
    const double disc = std::sqrt(std::max(tr * tr - 4.0 * det, 0.0));
    const double l1 = 0.5 * (tr + disc);
    const double l2 = std::max(0.5 * (tr - disc), 0.0);
    return std::sqrt(l1) + std::sqrt(l2);
}

double tiny_objective(const Dataset& d, double lambda, const double b[4]) {
    Mat r = d.y;
    for (std::size_t i = 0; i < d.n(); ++i)
        for (std::size_t k = 0; k < 2; ++k)
            r(i, k) -= d.x(i, 0) * b[2 * 0 + k] + d.x(i, 1) * b[2 * 1 + k];
    double l1 = 0.0;
    for (int t = 0; t < 4; ++t) l1 += std::abs(b[t]);
    return nuclear_norm_2col(r) / std::sqrt(static_cast<double>(d.n())) + lambda * l1;
}

} // namespace

TEST_CASE("objective value matches direct recomputation") {
    Rng rng(101);
    const Dataset d = random_instance(12, 3, 2, rng);
    const PenaltySpec pen{PenaltyKind::L1, 0.3};

    // zero coefficients: (1/sqrt(n)) ||Y||_*
    const Mat zero(3, 2, 0.0);
    CHECK(objective_value(d, pen, zero) ==
          doctest::Approx(nuclear_norm(d.y) / std::sqrt(12.0) + 0.0));

    // exact fit with lambda = 0
    Rng rng2(102);
    const Mat x = random_mat(10, 2, rng2);
    const Mat btrue = random_mat(2, 2, rng2);
    Dataset exact;
    exact.y = matmul(x, btrue);
    exact.x = x;
    CHECK(objective_value(exact, PenaltySpec{PenaltyKind::L1, 0.0}, btrue) ==
          doctest::Approx(0.0).epsilon(1e-12));

    // random point, recomputed from the norm definitions
    const Mat b = random_mat(3, 2, rng);
    const double expected =
        nuclear_norm(sub(d.y, matmul(d.x, b))) / std::sqrt(12.0) +
        pen.lambda * penalty_value(pen.kind, b);
    CHECK(objective_value(d, pen, b) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("zero solution at and above lambda_max, nonzero below") {
    Rng rng(103);
    for (PenaltyKind kind : {PenaltyKind::L1, PenaltyKind::GroupL1, PenaltyKind::Nuclear}) {
        const Dataset d = random_instance(20, 5, 3, rng);
        const double lmax = lambda_max(d, kind);
        const FitResult above =
            admm_fit(d, PenaltySpec{kind, 1.001 * lmax}, tight_config());
        CHECK(frob_norm(above.b_hat) <= 1e-6);
        const FitResult below = admm_fit(d, PenaltySpec{kind, 0.9 * lmax}, tight_config());
        CHECK(frob_norm(below.b_hat) > 1e-6);
    }
}

TEST_CASE("lambda zero recovers least squares on full-rank tall instances") {
    Rng rng(104);
    const Dataset d = random_instance(40, 5, 3, rng);
    AdmmConfig cfg = tight_config();
    const FitResult fit = admm_fit(d, PenaltySpec{PenaltyKind::L1, 0.0}, cfg);
    const Mat ls = solve_sym(crossprod(d.x, d.x), crossprod(d.x, d.y));
    CHECK(rel_frob_diff(ls, fit.b_hat) < 1e-4);
}

TEST_CASE("tiny instance matches a refining brute-force grid oracle") {
    Rng rng(105);
    const Dataset d = random_instance(8, 2, 2, rng, 0.8);
    const double lambda = 0.4 * lambda_max(d, PenaltyKind::L1);

    double center[4] = {0.0, 0.0, 0.0, 0.0};
    double best[4] = {0.0, 0.0, 0.0, 0.0};
    double best_val = tiny_objective(d, lambda, best);
    double halfwidth = 2.0;
    int points = 21;
    for (int round = 0; round < 5; ++round) {
        const double step = 2.0 * halfwidth / (points - 1);
        double b[4];
        for (int i0 = 0; i0 < points; ++i0) {
            b[0] = center[0] - halfwidth + i0 * step;
            for (int i1 = 0; i1 < points; ++i1) {
                b[1] = center[1] - halfwidth + i1 * step;
                for (int i2 = 0; i2 < points; ++i2) {
                    b[2] = center[2] - halfwidth + i2 * step;
                    for (int i3 = 0; i3 < points; ++i3) {
                        b[3] = center[3] - halfwidth + i3 * step;
                        const double v = tiny_objective(d, lambda, b);
                        if (v < best_val) {
                            best_val = v;
                            for (int t = 0; t < 4; ++t) best[t] = b[t];
                        }
                    }
                }
            }
        }
        for (int t = 0; t < 4; ++t) center[t] = best[t];
        halfwidth = 2.0 * step; // keep the next window safely around the argmin
        points = 17;
        if (step <= 1e-3) break;
    }

    const FitResult fit = admm_fit(d, PenaltySpec{PenaltyKind::L1, lambda}, tight_config());
    CHECK(fit.converged);
    CHECK(std::abs(fit.objective - best_val) <= 1e-3);
}

TEST_CASE("majorization step never increases the augmented Lagrangian") {
    Rng rng(106);
    for (PenaltyKind kind : {PenaltyKind::L1, PenaltyKind::GroupL1, PenaltyKind::Nuclear}) {
        const Dataset d = random_instance(15, 6, 3, rng);
        AdmmConfig cfg;
        cfg.adaptive_rho = false; // fixed rho for the descent certificate
        cfg.record_majorization = true;
        const double lambda = 0.3 * lambda_max(d, kind);
        const FitResult fit = admm_fit(d, PenaltySpec{kind, lambda}, cfg);
        REQUIRE(!fit.majorization_gaps.empty());
        for (double gap : fit.majorization_gaps) REQUIRE(gap <= 1e-10);
    }
}

TEST_CASE("warm starts land on the cold-start solution along a path") {
    Rng rng(107);
    const Dataset d = random_instance(25, 8, 3, rng);
    const double lmax = lambda_max(d, PenaltyKind::L1);
    const std::vector<double> grid = default_lambda_grid(lmax * 0.99, 8, 1e-2);
    AdmmConfig cfg = tight_config();
    cfg.eps_rel = 1e-13; // the stopping rule compares squared residuals,
    cfg.eps_abs = 1e-14; // so both tolerances act on the square scale
    cfg.max_iter = 500000;

    FitResult prev;
    bool have_prev = false;
    for (double lambda : grid) {
        const PenaltySpec pen{PenaltyKind::L1, lambda};
        const FitResult warm = admm_fit(d, pen, cfg, have_prev ? &prev.state : nullptr);
        const FitResult cold = admm_fit(d, pen, cfg);
        CHECK(frob_norm(sub(warm.b_hat, cold.b_hat)) < 1e-5);
        prev = warm;
        have_prev = true;
    }
}

TEST_CASE("feasibility gap sits below the primal threshold at convergence") {
    Rng rng(108);
    const Dataset d = random_instance(18, 5, 2, rng);
    const PenaltySpec pen{PenaltyKind::L1, 0.2 * lambda_max(d, PenaltyKind::L1)};
    const FitResult fit = admm_fit(d, pen, AdmmConfig{});
    REQUIRE(fit.converged);
    const double gap =
        frob_norm_sq(sub(sub(d.y, matmul(d.x, fit.state.b)), fit.state.phi));
    CHECK(gap == doctest::Approx(fit.primal_residuals.back()).epsilon(1e-12));
}

TEST_CASE("residual check certifies monotone convergence with tau = 1") {
    Rng rng(109);
    const Dataset d = random_instance(15, 4, 2, rng);
    AdmmConfig cfg;
    cfg.tau = 1.0;
    const PenaltySpec pen{PenaltyKind::L1, 0.3 * lambda_max(d, PenaltyKind::L1)};
    const MonotonicityReport report = admm_residual_check(d, pen, cfg);
    CHECK(report.increase_fraction == 0.0);
    CHECK(report.tail_slope <= -0.7);
}

TEST_CASE("residual check on a trivial instance is identically zero") {
    Dataset d;
    d.x = Mat::from_rows({{1.0, 0.0}, {0.0, 1.0}, {0.5, -0.5}});
    d.y = Mat(3, 2, 0.0); // optimum is beta = 0, Phi = 0, Gamma = 0 = the cold start
    const MonotonicityReport report =
        admm_residual_check(d, PenaltySpec{PenaltyKind::L1, 0.1}, AdmmConfig{});
    for (double v : report.d_rho) CHECK(v == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("residual check refuses tau != 1") {
    Rng rng(110);
    const Dataset d = random_instance(10, 3, 2, rng);
    AdmmConfig cfg;
    cfg.tau = 1.5;
    CHECK_THROWS_AS(admm_residual_check(d, PenaltySpec{PenaltyKind::L1, 0.1}, cfg),
                    data_error);
}

TEST_CASE("non-finite iterates raise a hard error naming the iteration") {
    Rng rng(111);
    const Dataset d = random_instance(10, 3, 2, rng);
    SolverState broken;
    broken.b = Mat(3, 2, 0.0);
    broken.phi = d.y;
    broken.gamma = Mat(10, 2, 0.0);
    broken.rho = 1e-320; // 1/rho overflows, poisoning the first beta update
    CHECK_THROWS_WITH_AS(
        admm_fit(d, PenaltySpec{PenaltyKind::L1, 0.1}, AdmmConfig{}, &broken),
        doctest::Contains("iteration"), numerical_error);
}

TEST_CASE("config validation") {
    AdmmConfig cfg;
    cfg.tau = 2.0; // 2*tau = 4 > 1 + sqrt(5)
    CHECK_THROWS_AS(cfg.validate(), data_error);
    cfg = AdmmConfig{};
    cfg.rho0 = 0.0;
    CHECK_THROWS_AS(cfg.validate(), data_error);
    cfg = AdmmConfig{};
    cfg.kappa = 0;
    CHECK_THROWS_AS(cfg.validate(), data_error);
}
