#include "msrl/apgd.hpp"

#include <cmath>

#include "msrl/errors.hpp"
#include "msrl/kernels.hpp"
#include "msrl/linalg.hpp"

namespace msrl {

void ApgdConfig::validate() const {
    if (initial_step < 0.0) throw data_error("ApgdConfig: initial_step must be >= 0");
    if (!(backtrack_shrink > 0.0 && backtrack_shrink < 1.0))
        throw data_error("ApgdConfig: backtrack_shrink must lie in (0,1)");
    if (max_iter <= 0) throw data_error("ApgdConfig: max_iter must be positive");
    if (obj_tol <= 0.0) throw data_error("ApgdConfig: obj_tol must be positive");
    if (rank_tol_factor <= 0.0) throw data_error("ApgdConfig: rank_tol_factor must be positive");
}

namespace {

struct SmoothEval {
    bool full_rank = false;
    double value = 0.0; // (1/sqrt(n)) * nuclear norm of the residual
    ThinSvd svd;        // of the residual
};

SmoothEval eval_smooth(const Dataset& data, const Mat& b, double rank_tol) {
    SmoothEval out;
    const Mat residual = sub(data.y, matmul(data.x, b));
    out.svd = thin_svd(residual);
    const double sigma1 = out.svd.d.front();
    const double sigma_q = out.svd.d.back();
    out.full_rank = sigma_q > rank_tol * sigma1 && sigma1 > 0.0;
    double acc = 0.0;
    for (double d : out.svd.d) acc += d;
    out.value = acc / std::sqrt(static_cast<double>(data.n()));
    return out;
}

} // namespace

std::optional<Mat> nuclear_residual_gradient(const Dataset& data, const Mat& b,
                                             double rank_tol_factor) {
    if (data.n() <= data.q())
        throw data_error("nuclear_residual_gradient: requires n > q");
    const SmoothEval ev = eval_smooth(data, b, rank_tol_factor);
    if (!ev.full_rank) return std::nullopt;
    // -X' U V', scaled to the gradient of the plain nuclear norm
    return scaled(crossprod(data.x, tcrossprod(ev.svd.u, ev.svd.v)), -1.0);
}

ApgdResult apgd_fit(const Dataset& data, const PenaltySpec& pen, const ApgdConfig& cfg,
                    const Mat* warm_start) {
    cfg.validate();
    if (data.n() <= data.q()) throw data_error("apgd_fit: requires n > q");
    if (pen.lambda < 0.0 || !std::isfinite(pen.lambda))
        throw data_error("apgd_fit: lambda must be finite and non-negative");

    const std::size_t p = data.p(), q = data.q();
    const double sqrt_n = std::sqrt(static_cast<double>(data.n()));

    ApgdResult out;
    Mat b = warm_start != nullptr ? *warm_start : Mat(p, q, 0.0);

    SmoothEval ev_b = eval_smooth(data, b, cfg.rank_tol_factor);
    if (!ev_b.full_rank) {
        out.status = ApgdStatus::RankDeficient;
        out.last_iterate = b;
        return out;
    }
    double f_prev_total = ev_b.value + pen.lambda * penalty_value(pen.kind, b);
    out.objective_history.push_back(f_prev_total);

    double step = cfg.initial_step;
    if (step <= 0.0) {
        const double x_spec = spectral_norm(data.x);
        step = x_spec > 0.0 ? static_cast<double>(data.n()) / (x_spec * x_spec) : 1.0;
    }

    Mat z = b;
    double theta = 1.0;
    bool momentum_active = false;
    int flat_count = 0;
    long k = 0;
    bool converged = false;

    while (k < cfg.max_iter) {
        SmoothEval ev_z =
            momentum_active ? eval_smooth(data, z, cfg.rank_tol_factor) : ev_b;
        if (!ev_z.full_rank) {
            out.status = ApgdStatus::RankDeficient;
            out.last_iterate = b;
            return out;
        }
        const Mat grad =
            scaled(crossprod(data.x, tcrossprod(ev_z.svd.u, ev_z.svd.v)), -1.0 / sqrt_n);

        // backtracking on the quadratic model of the smooth part at z
        Mat cand;
        SmoothEval ev_cand;
        while (true) {
            cand = prox(pen.kind, lin_comb(1.0, z, -step, grad), step * pen.lambda);
            ev_cand = eval_smooth(data, cand, cfg.rank_tol_factor);
            if (!ev_cand.full_rank) {
                out.status = ApgdStatus::RankDeficient;
                out.last_iterate = b;
                return out;
            }
            const Mat diff = sub(cand, z);
            const double model = ev_z.value + dot(grad, diff) +
                                 frob_norm_sq(diff) / (2.0 * step);
            if (ev_cand.value <= model + 1e-12 * (1.0 + std::abs(ev_z.value))) break;
            step *= cfg.backtrack_shrink;
            if (step < 1e-300)
                throw numerical_error("apgd_fit: step size underflow during backtracking");
        }
        if (!cand.all_finite())
            throw numerical_error("apgd_fit: non-finite iterate at iteration " +
                                  std::to_string(k + 1));

        const double f_total = ev_cand.value + pen.lambda * penalty_value(pen.kind, cand);
        if (momentum_active && f_total > f_prev_total + 1e-12 * (1.0 + std::abs(f_prev_total))) {
            // restart the extrapolation from the last accepted iterate; the
            // plain proximal step from b cannot increase the objective
            z = b;
            theta = 1.0;
            momentum_active = false;
            continue;
        }

        ++k;
        const double rel_change =
            std::abs(f_total - f_prev_total) / std::max(1.0, std::abs(f_prev_total));
        flat_count = rel_change < cfg.obj_tol ? flat_count + 1 : 0;

        const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
        z = lin_comb(1.0 + (theta - 1.0) / theta_next, cand, -(theta - 1.0) / theta_next, b);
        momentum_active = true;
        theta = theta_next;
        b = cand;
        ev_b = ev_cand;
        f_prev_total = f_total;
        out.objective_history.push_back(f_total);

        if (flat_count >= 3) {
            converged = true;
            break;
        }
    }

    out.status = converged ? ApgdStatus::Converged : ApgdStatus::MaxIterations;
    out.fit.b_hat = b;
    out.fit.objective = f_prev_total;
    out.fit.iterations = k;
    out.fit.converged = converged;
    out.fit.solver = "apgd";
    out.last_iterate = b;
    return out;
}

FitResult hybrid_single_fit(const Dataset& data, const PenaltySpec& pen,
                            const AdmmConfig& cfg_admm, const ApgdConfig& cfg_apgd) {
    if (data.n() > data.q()) {
        ApgdResult res = apgd_fit(data, pen, cfg_apgd);
        if (res.status != ApgdStatus::RankDeficient) return std::move(res.fit);
        SolverState state;
        state.b = res.last_iterate;
        state.phi = sub(data.y, matmul(data.x, res.last_iterate));
        state.gamma = Mat(data.n(), data.q(), 0.0);
        state.rho = cfg_admm.rho0;
        return admm_fit(data, pen, cfg_admm, &state);
    }
    return admm_fit(data, pen, cfg_admm);
}

std::vector<FitResult> hybrid_path_fit(const Dataset& data, PenaltyKind kind,
                                       const std::vector<double>& lambdas,
                                       const AdmmConfig& cfg_admm, const ApgdConfig& cfg_apgd) {
    if (lambdas.empty()) throw data_error("hybrid_path_fit: empty lambda grid");
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (lambdas[i] <= 0.0)
            throw data_error("hybrid_path_fit: lambdas must be positive");
        if (i > 0 && lambdas[i] >= lambdas[i - 1])
            throw data_error("hybrid_path_fit: lambdas must be strictly descending");
    }

    std::vector<FitResult> results;
    results.reserve(lambdas.size());

    bool use_apgd = data.n() > data.q();
    Mat apgd_warm;
    bool have_apgd_warm = false;
    SolverState admm_state;
    bool have_admm_state = false;

    for (double lambda : lambdas) {
        const PenaltySpec pen{kind, lambda};
        if (use_apgd) {
            ApgdResult res =
                apgd_fit(data, pen, cfg_apgd, have_apgd_warm ? &apgd_warm : nullptr);
            if (res.status != ApgdStatus::RankDeficient) {
                apgd_warm = res.fit.b_hat;
                have_apgd_warm = true;
                results.push_back(std::move(res.fit));
                continue;
            }
            // rank event: this and all smaller lambdas go to ADMM
            use_apgd = false;
            admm_state.b = res.last_iterate;
            admm_state.phi = sub(data.y, matmul(data.x, res.last_iterate));
            admm_state.gamma = Mat(data.n(), data.q(), 0.0);
            admm_state.rho = cfg_admm.rho0;
            admm_state.iter = 0;
            have_admm_state = true;
        }
        FitResult fit =
            admm_fit(data, pen, cfg_admm, have_admm_state ? &admm_state : nullptr);
        admm_state = fit.state;
        have_admm_state = true;
        results.push_back(std::move(fit));
    }
    return results;
}

} // namespace msrl
