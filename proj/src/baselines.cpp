#include "msrl/baselines.hpp"

#include <cmath>

#include "msrl/errors.hpp"
#include "msrl/kernels.hpp"
#include "msrl/linalg.hpp"

namespace msrl {

double pls_objective(const Dataset& data, const PenaltySpec& pen, const Mat& b) {
    const Mat residual = sub(data.y, matmul(data.x, b));
    return 0.5 * frob_norm_sq(residual) / static_cast<double>(data.n()) +
           pen.lambda * penalty_value(pen.kind, b);
}

double pls_kkt_residual(const Dataset& data, const PenaltySpec& pen, const Mat& b) {
    const Mat residual = sub(data.y, matmul(data.x, b));
    const Mat g = scaled(crossprod(data.x, residual), 1.0 / static_cast<double>(data.n()));
    return subgradient_distance(pen.kind, g, b, pen.lambda);
}

double pls_lambda_max(const Dataset& data, PenaltyKind kind) {
    return dual_norm(kind, crossprod(data.x, data.y)) / static_cast<double>(data.n());
}

FitResult pls_fit(const Dataset& data, const PenaltySpec& pen, const PlsConfig& cfg,
                  const Mat* warm_start) {
    if (pen.lambda < 0.0 || !std::isfinite(pen.lambda))
        throw data_error("pls_fit: lambda must be finite and non-negative");
    const std::size_t p = data.p(), q = data.q();
    const double n = static_cast<double>(data.n());
    const double x_spec = spectral_norm(data.x);
    const double lip = x_spec > 0.0 ? x_spec * x_spec / n : 1.0;
    const double step = 1.0 / lip;

    Mat b = warm_start != nullptr ? *warm_start : Mat(p, q, 0.0);
    Mat z = b;
    double theta = 1.0;
    double obj_prev = pls_objective(data, pen, b);
    bool momentum_active = false;

    FitResult out;
    out.solver = "pls";
    long k = 0;
    bool converged = false;
    while (k < cfg.max_iter) {
        const Mat grad_z =
            scaled(crossprod(data.x, sub(data.y, matmul(data.x, z))), -1.0 / n);
        const Mat cand = prox(pen.kind, lin_comb(1.0, z, -step, grad_z), step * pen.lambda);
        const double obj = pls_objective(data, pen, cand);
        if (momentum_active && obj > obj_prev + 1e-14 * (1.0 + std::abs(obj_prev))) {
            z = b;
            theta = 1.0;
            momentum_active = false;
            continue;
        }
        if (!cand.all_finite())
            throw numerical_error("pls_fit: non-finite iterate at iteration " +
                                  std::to_string(k + 1));
        ++k;
        const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
        z = lin_comb(1.0 + (theta - 1.0) / theta_next, cand, -(theta - 1.0) / theta_next, b);
        momentum_active = true;
        theta = theta_next;
        b = cand;
        obj_prev = obj;
        if (pls_kkt_residual(data, pen, b) <= cfg.kkt_tol) {
            converged = true;
            break;
        }
    }

    out.b_hat = b;
    out.objective = obj_prev;
    out.iterations = k;
    out.converged = converged;
    return out;
}

FitResult calibrated_fit(const Dataset& data, PenaltyKind kind, double lambda,
                         const AdmmConfig& cfg) {
    if (kind != PenaltyKind::L1)
        throw data_error("calibrated_fit: only the L1 penalty separates across responses; "
                         "group and nuclear are unsupported");
    const std::size_t q = data.q();
    Mat b(data.p(), q, 0.0);
    std::vector<FitResult> column_fits(q);

    const std::int64_t total = static_cast<std::int64_t>(q);
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t kk = 0; kk < total; ++kk) {
        const std::size_t k = static_cast<std::size_t>(kk);
        Dataset slice;
        slice.y = data.y.col(k);
        slice.x = data.x;
        slice.normalized = data.normalized;
        slice.column_scales = data.column_scales;
        slice.x_means = data.x_means;
        slice.y_means = {data.y_means.empty() ? 0.0 : data.y_means[k]};
        column_fits[k] = admm_fit(slice, PenaltySpec{PenaltyKind::L1, lambda}, cfg);
    }

    FitResult out;
    out.solver = "calibrated";
    out.converged = true;
    out.objective = 0.0;
    for (std::size_t k = 0; k < q; ++k) {
        b.set_col(k, column_fits[k].b_hat);
        out.objective += column_fits[k].objective;
        out.iterations = std::max(out.iterations, column_fits[k].iterations);
        out.converged = out.converged && column_fits[k].converged;
    }
    out.b_hat = std::move(b);
    return out;
}

std::vector<FitResult> calibrated_path(const Dataset& data, PenaltyKind kind,
                                       const std::vector<double>& lambdas,
                                       const AdmmConfig& cfg) {
    if (kind != PenaltyKind::L1)
        throw data_error("calibrated_path: only the L1 penalty separates across responses");
    if (lambdas.empty()) throw data_error("calibrated_path: empty lambda grid");
    const std::size_t q = data.q(), L = lambdas.size();

    // column-major fits: each column sweeps the whole grid with warm starts
    std::vector<std::vector<FitResult>> per_column(q);
    const std::int64_t total = static_cast<std::int64_t>(q);
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t kk = 0; kk < total; ++kk) {
        const std::size_t k = static_cast<std::size_t>(kk);
        Dataset slice;
        slice.y = data.y.col(k);
        slice.x = data.x;
        slice.normalized = data.normalized;
        slice.column_scales = data.column_scales;
        slice.x_means = data.x_means;
        slice.y_means = {data.y_means.empty() ? 0.0 : data.y_means[k]};
        std::vector<FitResult>& fits = per_column[k];
        fits.reserve(L);
        for (std::size_t l = 0; l < L; ++l) {
            const SolverState* warm = l > 0 ? &fits[l - 1].state : nullptr;
            fits.push_back(admm_fit(slice, PenaltySpec{kind, lambdas[l]}, cfg, warm));
        }
    }

    std::vector<FitResult> out(L);
    for (std::size_t l = 0; l < L; ++l) {
        FitResult& r = out[l];
        r.solver = "calibrated";
        r.converged = true;
        r.b_hat = Mat(data.p(), q, 0.0);
        for (std::size_t k = 0; k < q; ++k) {
            r.b_hat.set_col(k, per_column[k][l].b_hat);
            r.objective += per_column[k][l].objective;
            r.iterations = std::max(r.iterations, per_column[k][l].iterations);
            r.converged = r.converged && per_column[k][l].converged;
        }
    }
    return out;
}

Mat refit(const Dataset& data, const Mat& beta_hat) {
    const std::size_t p = data.p(), q = data.q(), n = data.n();
    if (beta_hat.rows() != p || beta_hat.cols() != q)
        throw data_error("refit: coefficient shape mismatch");

    std::vector<std::pair<std::size_t, std::size_t>> support;
    for (std::size_t k = 0; k < q; ++k) {
        std::size_t per_response = 0;
        for (std::size_t j = 0; j < p; ++j)
            if (beta_hat(j, k) != 0.0) {
                ++per_response;
                support.emplace_back(j, k);
            }
        if (per_response >= n)
            throw data_error("refit: response " + std::to_string(k) + " has " +
                             std::to_string(per_response) +
                             " selected coefficients but only " + std::to_string(n) +
                             " observations; use a sparser lambda");
    }
    if (support.empty()) return Mat(p, q, 0.0);

    const Mat gram = crossprod(data.x, data.x);
    const Mat xty = crossprod(data.x, data.y);
    const std::size_t m = support.size();

    Mat beta = beta_hat;
    for (int sweep = 0; sweep < 100; ++sweep) {
        // covariance step
        const Mat residual = sub(data.y, matmul(data.x, beta));
        Mat sigma = scaled(crossprod(residual, residual), 1.0 / static_cast<double>(n));
        for (std::size_t j = 0; j < q; ++j) sigma(j, j) += 1e-6;
        const SymEig eig = eig_sym(sigma);
        Mat omega(q, q, 0.0);
        for (std::size_t a = 0; a < q; ++a)
            for (std::size_t bcol = 0; bcol < q; ++bcol) {
                double acc = 0.0;
                for (std::size_t t = 0; t < q; ++t)
                    acc += eig.vectors(a, t) * eig.vectors(bcol, t) / eig.values[t];
                omega(a, bcol) = acc;
            }

        // GLS step on the support: H[(j,k),(j',k')] = gram(j,j') * omega(k,k')
        Mat h(m, m);
        Mat rhs(m, 1);
        const Mat target = matmul(xty, omega);
        for (std::size_t a = 0; a < m; ++a) {
            const auto [ja, ka] = support[a];
            rhs(a, 0) = target(ja, ka);
            for (std::size_t bi = 0; bi < m; ++bi) {
                const auto [jb, kb] = support[bi];
                h(a, bi) = gram(ja, jb) * omega(ka, kb);
            }
        }
        const Mat sol = solve_sym(h, rhs);

        double delta_sq = 0.0;
        for (std::size_t a = 0; a < m; ++a) {
            const auto [j, k] = support[a];
            const double d = sol(a, 0) - beta(j, k);
            delta_sq += d * d;
            beta(j, k) = sol(a, 0);
        }
        if (std::sqrt(delta_sq) < 1e-6) break;
    }
    return beta;
}

} // namespace msrl
