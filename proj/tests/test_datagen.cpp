#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "msrl/datagen.hpp"
#include "msrl/errors.hpp"
#include "msrl/kernels.hpp"
#include "msrl/linalg.hpp"

#include "test_helpers.hpp"

using namespace msrl;
using namespace msrl::testing;

TEST_CASE("compound symmetry covariance is exact") {
    SimDesign design;
    design.model = CovModel::CompoundSymmetry;
    design.q = 3;
    design.xi = 0.5;
    Rng rng(401);
    const Mat s = make_sigma(design, rng);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(s(i, j) == doctest::Approx(i == j ? 3.0 : 1.5));

    design.xi = 0.0;
    const Mat id3 = make_sigma(design, rng);
    CHECK(max_abs_diff(id3, scaled(Mat::identity(3), 3.0)) == 0.0);
}

TEST_CASE("condition-number covariance hits the requested spread") {
    SimDesign design;
    design.model = CovModel::ConditionNumber;
    design.q = 6;
    design.cond = 5.0;
    Rng rng(402);
    const Mat s = make_sigma(design, rng);
    const SymEig eig = eig_sym(s);
    CHECK(eig.values.front() / eig.values.back() == doctest::Approx(5.0).epsilon(1e-8));
    CHECK(max_abs_diff(s, s.transpose()) < 1e-12);
}

TEST_CASE("factor covariance has constant diagonal 1.5") {
    SimDesign design;
    design.model = CovModel::Factor;
    design.q = 8;
    design.factors = 3;
    Rng rng(403);
    const Mat s = make_sigma(design, rng);
    for (std::size_t j = 0; j < 8; ++j) CHECK(s(j, j) == doctest::Approx(1.5).epsilon(1e-8));
    const SymEig eig = eig_sym(s);
    CHECK(eig.values.back() >= 0.05 - 1e-10);
}

TEST_CASE("covariances stay positive definite across the paper grids") {
    Rng rng(404);
    SimDesign design;
    design.q = 10;
    design.model = CovModel::CompoundSymmetry;
    for (double xi : {0.3, 0.5, 0.7, 0.9, 0.95}) {
        design.xi = xi;
        CHECK(eig_sym(make_sigma(design, rng)).values.back() > 1e-10);
    }
    design.model = CovModel::ConditionNumber;
    for (double cond : {5.0, 10.0, 25.0, 50.0, 100.0}) {
        design.cond = cond;
        CHECK(eig_sym(make_sigma(design, rng)).values.back() > 1e-10);
    }
    design.model = CovModel::Factor;
    for (std::size_t r : {std::size_t{2}, std::size_t{5}, std::size_t{10}}) {
        design.factors = r;
        CHECK(eig_sym(make_sigma(design, rng)).values.back() > 1e-10);
    }
    design.model = CovModel::CompoundSymmetry;
    design.xi = 1.0;
    CHECK_THROWS_AS(make_sigma(design, rng), data_error);
    design.xi = 0.5;
    design.model = CovModel::ConditionNumber;
    design.cond = 0.5;
    CHECK_THROWS_AS(make_sigma(design, rng), data_error);
}

TEST_CASE("elementwise beta: exactly five nonzeros per column") {
    Rng rng(405);
    const Mat beta = make_beta(BetaScheme::ElementwiseSparse, 40, 6, rng);
    for (std::size_t k = 0; k < 6; ++k) {
        std::size_t nnz = 0;
        for (std::size_t j = 0; j < 40; ++j)
            if (beta(j, k) != 0.0) ++nnz;
        CHECK(nnz == 5);
    }
    Rng small(1);
    CHECK_THROWS_AS(make_beta(BetaScheme::ElementwiseSparse, 4, 3, small), data_error);
}

TEST_CASE("row-sparse beta: exactly five nonzero rows") {
    Rng rng(406);
    const Mat beta = make_beta(BetaScheme::RowSparse, 30, 5, rng);
    std::size_t nz_rows = 0;
    for (std::size_t j = 0; j < 30; ++j) {
        bool nz = false;
        for (std::size_t k = 0; k < 5; ++k)
            if (beta(j, k) != 0.0) nz = true;
        if (nz) {
            ++nz_rows;
            for (std::size_t k = 0; k < 5; ++k) CHECK(beta(j, k) != 0.0);
        }
    }
    CHECK(nz_rows == 5);
}

TEST_CASE("beta construction is deterministic under a seed") {
    Rng a(407), b(407);
    CHECK(make_beta(BetaScheme::ElementwiseSparse, 25, 4, a) ==
          make_beta(BetaScheme::ElementwiseSparse, 25, 4, b));
}

TEST_CASE("design columns follow the AR(0.5) covariance") {
    SimDesign design;
    design.n = 20000;
    design.p = 5;
    design.q = 2;
    design.seed = 408;
    const SimInstance inst = simulate(design);
    // undo the column normalization to look at raw second moments; centering
    // leaves the covariance untouched
    Mat x = inst.data.x;
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) x(i, j) /= inst.data.column_scales[j];
    for (std::size_t j = 0; j + 1 < design.p; ++j) {
        double cov = 0.0;
        for (std::size_t i = 0; i < design.n; ++i) cov += x(i, j) * x(i, j + 1);
        cov /= static_cast<double>(design.n);
        CHECK(std::abs(cov - 0.5) < 0.02);
    }
}

TEST_CASE("normal errors match the requested covariance") {
    SimDesign design;
    design.n = 20000;
    design.q = 4;
    design.model = CovModel::CompoundSymmetry;
    design.xi = 0.7;
    design.seed = 410;
    SimDesign no_signal = design;
    no_signal.p = 5;
    SimInstance inst = simulate(no_signal);
    // subtract the signal to isolate the errors (centered): E_c = Y_c - X_c B*
    Mat x_raw = inst.data.x;
    for (std::size_t i = 0; i < x_raw.rows(); ++i)
        for (std::size_t j = 0; j < x_raw.cols(); ++j)
            x_raw(i, j) /= inst.data.column_scales[j];
    const Mat e = sub(inst.data.y, matmul(x_raw, inst.beta_star));
    const Mat emp = scaled(crossprod(e, e), 1.0 / static_cast<double>(design.n));
    CHECK(frob_norm(sub(emp, inst.sigma_star)) / frob_norm(inst.sigma_star) < 0.05);
}

TEST_CASE("t5 errors have visibly heavier tails than normal") {
    SimDesign design;
    design.n = 50000;
    design.q = 2;
    design.errors = ErrorDist::StudentT5;
    design.seed = 411;
    design.model = CovModel::CompoundSymmetry;
    design.xi = 0.0;

    SimDesign no_signal = design;
    no_signal.p = 5;
    SimInstance inst = simulate(no_signal);
    Mat x_raw = inst.data.x;
    for (std::size_t i = 0; i < x_raw.rows(); ++i)
        for (std::size_t j = 0; j < x_raw.cols(); ++j)
            x_raw(i, j) /= inst.data.column_scales[j];
    const Mat e = sub(inst.data.y, matmul(x_raw, inst.beta_star));

    double m2 = 0.0, m4 = 0.0;
    for (std::size_t i = 0; i < e.rows(); ++i) {
        const double v = e(i, 0);
        m2 += v * v;
        m4 += v * v * v * v;
    }
    m2 /= static_cast<double>(e.rows());
    m4 /= static_cast<double>(e.rows());
    CHECK(m4 / (m2 * m2) - 3.0 > 1.0);

    // normal errors from the same design sit near zero excess kurtosis
    no_signal.errors = ErrorDist::Normal;
    inst = simulate(no_signal);
    x_raw = inst.data.x;
    for (std::size_t i = 0; i < x_raw.rows(); ++i)
        for (std::size_t j = 0; j < x_raw.cols(); ++j)
            x_raw(i, j) /= inst.data.column_scales[j];
    const Mat en = sub(inst.data.y, matmul(x_raw, inst.beta_star));
    m2 = m4 = 0.0;
    for (std::size_t i = 0; i < en.rows(); ++i) {
        const double v = en(i, 0);
        m2 += v * v;
        m4 += v * v * v * v;
    }
    m2 /= static_cast<double>(en.rows());
    m4 /= static_cast<double>(en.rows());
    CHECK(std::abs(m4 / (m2 * m2) - 3.0) < 0.25);
}

TEST_CASE("simulate is deterministic and reproducible per seed") {
    SimDesign design;
    design.n = 30;
    design.p = 10;
    design.q = 3;
    design.seed = 412;
    const SimInstance a = simulate(design);
    const SimInstance b = simulate(design);
    CHECK(a.data.y == b.data.y);
    CHECK(a.data.x == b.data.x);
    CHECK(a.validation.y == b.validation.y);
    CHECK(a.beta_star == b.beta_star);
    CHECK(a.sigma_star == b.sigma_star);

    design.seed = 413;
    const SimInstance c = simulate(design);
    CHECK(frob_norm(sub(c.data.y, a.data.y)) > 0.0);
}

TEST_CASE("evaluate on the trivial cases") {
    SimDesign design;
    design.n = 25;
    design.p = 12;
    design.q = 3;
    design.seed = 414;
    const SimInstance inst = simulate(design);

    // beta_hat = beta_star, mapped to the normalized scale the solvers see
    Mat beta_norm = inst.beta_star;
    for (std::size_t j = 0; j < beta_norm.rows(); ++j)
        for (std::size_t k = 0; k < beta_norm.cols(); ++k)
            beta_norm(j, k) /= inst.data.column_scales[j];
    const Metrics perfect = evaluate(beta_norm, inst, BetaScheme::ElementwiseSparse);
    CHECK(perfect.frob_sq_error == doctest::Approx(0.0).epsilon(1e-18));
    CHECK(perfect.tpr == doctest::Approx(1.0));
    CHECK(perfect.fpr == doctest::Approx(0.0));

    const Metrics zero = evaluate(Mat(12, 3, 0.0), inst, BetaScheme::ElementwiseSparse);
    CHECK(zero.tpr == 0.0);
    CHECK(zero.fpr == 0.0);
    CHECK(zero.frob_sq_error == doctest::Approx(frob_norm_sq(inst.beta_star)));

    const Metrics dense = evaluate(Mat(12, 3, 0.5), inst, BetaScheme::ElementwiseSparse);
    CHECK(dense.tpr == 1.0);
    CHECK(dense.fpr == 1.0);
}
