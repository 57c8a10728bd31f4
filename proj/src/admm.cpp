#include "msrl/admm.hpp"

#include <cmath>
#include <limits>

#include "msrl/errors.hpp"
#include "msrl/kernels.hpp"
#include "msrl/linalg.hpp"

namespace msrl {

void AdmmConfig::validate() const {
    if (rho0 <= 0.0) throw data_error("AdmmConfig: rho0 must be positive");
    if (!(tau > 0.0 && 2.0 * tau < 1.0 + std::sqrt(5.0)))
        throw data_error("AdmmConfig: tau must satisfy 0 < 2*tau < 1 + sqrt(5)");
    if (eta_pad < 0.0) throw data_error("AdmmConfig: eta_pad must be >= 0");
    if (kappa <= 0) throw data_error("AdmmConfig: kappa must be a positive integer");
    if (eps_rel <= 0.0 || eps_abs <= 0.0)
        throw data_error("AdmmConfig: tolerances must be positive");
    if (max_iter <= 0) throw data_error("AdmmConfig: max_iter must be positive");
}

double objective_value(const Dataset& data, const PenaltySpec& pen, const Mat& b) {
    const Mat residual = sub(data.y, matmul(data.x, b));
    const double n = static_cast<double>(data.n());
    return nuclear_norm(residual) / std::sqrt(n) + pen.lambda * penalty_value(pen.kind, b);
}

namespace {

// Phi update: singular value soft thresholding of m at level 1/rho.
Mat sv_shrink(const Mat& m, double threshold) {
    ThinSvd s = thin_svd(m);
    for (double& d : s.d) d = std::max(d - threshold, 0.0);
    return svd_reconstruct(s);
}

} // namespace

FitResult admm_fit(const Dataset& data, const PenaltySpec& pen, const AdmmConfig& cfg,
                   const SolverState* warm_start, const IterationObserver& observer) {
    cfg.validate();
    if (pen.lambda < 0.0 || !std::isfinite(pen.lambda))
        throw data_error("admm_fit: lambda must be finite and non-negative");

    const std::size_t n = data.n(), p = data.p(), q = data.q();
    const double sqrt_n = std::sqrt(static_cast<double>(n));
    const double lambda_tilde = sqrt_n * pen.lambda;

    const double x_spec = spectral_norm(data.x);
    const double eta = x_spec * x_spec + cfg.eta_pad;

    Mat b, phi, gamma;
    double rho;
    if (warm_start != nullptr) {
        b = warm_start->b;
        phi = warm_start->phi;
        gamma = warm_start->gamma;
        rho = warm_start->rho;
    } else {
        b = Mat(p, q, 0.0);
        phi = data.y; // makes the initial constraint residual zero at b = 0
        gamma = Mat(n, q, 0.0);
        rho = cfg.rho0;
    }

    const double y_norm = frob_norm(data.y);
    Mat xb = matmul(data.x, b);

    FitResult result;
    result.solver = "admm";
    result.primal_residuals.reserve(256);
    result.dual_residuals.reserve(256);

    long k = 0;
    bool converged = false;
    for (; k < cfg.max_iter; ++k) {
        // beta step: prox of the majorized quadratic around the current iterate
        Mat inner = lin_comb(1.0, data.y, 1.0 / rho, gamma);
        inner = sub(inner, phi);
        inner = sub(inner, xb);
        const Mat grad_term = crossprod(data.x, inner);
        const Mat prox_arg = lin_comb(1.0, b, 1.0 / eta, grad_term);
        if (!prox_arg.all_finite())
            throw numerical_error("admm_fit: non-finite iterate at iteration " +
                                  std::to_string(k + 1));
        const Mat b_next = prox(pen.kind, prox_arg, lambda_tilde / (rho * eta));
        const Mat xb_next = matmul(data.x, b_next);

        double majorization_gap = 0.0;
        if (cfg.record_majorization) {
            // gap in G_rho between the new and old beta at fixed (Phi, Gamma);
            // the ||Phi||_* term cancels.
            const Mat res_new = sub(sub(data.y, xb_next), phi);
            const Mat res_old = sub(sub(data.y, xb), phi);
            majorization_gap =
                lambda_tilde * (penalty_value(pen.kind, b_next) - penalty_value(pen.kind, b)) +
                dot(gamma, sub(res_new, res_old)) +
                0.5 * rho * (frob_norm_sq(res_new) - frob_norm_sq(res_old));
        }

        // Phi step: singular value shrinkage
        Mat phi_arg = lin_comb(1.0, data.y, 1.0 / rho, gamma);
        phi_arg = sub(phi_arg, xb_next);
        if (!phi_arg.all_finite())
            throw numerical_error("admm_fit: non-finite iterate at iteration " +
                                  std::to_string(k + 1));
        const Mat phi_next = sv_shrink(phi_arg, 1.0 / rho);

        // dual step
        const Mat gap = sub(sub(data.y, xb_next), phi_next);
        const Mat gamma_next = lin_comb(1.0, gamma, cfg.tau * rho, gap);

        const double r = frob_norm_sq(gap);
        const double s = rho * rho * frob_norm_sq(crossprod(data.x, sub(phi_next, phi)));
        const double e_primal =
            cfg.eps_abs * sqrt_n +
            cfg.eps_rel * std::max({frob_norm(xb_next), frob_norm(phi_next), y_norm});
        const double e_dual = cfg.eps_abs * std::sqrt(static_cast<double>(p)) +
                              cfg.eps_rel * frob_norm(crossprod(data.x, gamma_next));

        if (!std::isfinite(r) || !std::isfinite(s) || !b_next.all_finite())
            throw numerical_error("admm_fit: non-finite iterate at iteration " +
                                  std::to_string(k + 1));

        b = b_next;
        xb = xb_next;
        phi = phi_next;
        gamma = gamma_next;

        result.primal_residuals.push_back(r);
        result.dual_residuals.push_back(s);
        if (cfg.record_majorization) result.majorization_gaps.push_back(majorization_gap);

        if (observer) {
            SolverState snapshot{b, phi, gamma, rho, k + 1};
            observer(snapshot, IterationRecord{k + 1, r, s, e_primal, e_dual, rho});
        }

        if (r <= e_primal && s <= e_dual) {
            converged = true;
            ++k;
            break;
        }

        if (cfg.adaptive_rho && (k + 1) % cfg.kappa == 0) {
            const double factor = (r > 10.0 * s ? 1.0 : 0.0) -
                                  0.5 * (s > 10.0 * r ? 1.0 : 0.0) + 1.0;
            rho *= factor;
            // Gamma is kept as-is across rho changes.
        }
    }

    result.b_hat = b;
    result.objective = objective_value(data, pen, b);
    result.iterations = k;
    result.converged = converged;
    result.rho_final = rho;
    result.state = SolverState{std::move(b), std::move(phi), std::move(gamma), rho, k};
    return result;
}

MonotonicityReport admm_residual_check(const Dataset& data, const PenaltySpec& pen,
                                       AdmmConfig cfg) {
    if (cfg.tau != 1.0)
        throw data_error("admm_residual_check: requires tau = 1 (theorem hypothesis)");

    AdmmConfig high = cfg;
    high.eps_rel = 1e-10;
    high.max_iter = std::max<long>(cfg.max_iter, 200000);
    const FitResult ref = admm_fit(data, pen, high);

    const Mat& b_star = ref.state.b;
    const Mat& phi_star = ref.state.phi;
    const Mat& gamma_star = ref.state.gamma;
    const double rho = ref.rho_final;

    const double x_spec = spectral_norm(data.x);
    const double eta = x_spec * x_spec + cfg.eta_pad;

    auto d_rho_at = [&](const Mat& b, const Mat& phi, const Mat& gamma) {
        const Mat db = sub(b, b_star);
        const double q_norm_sq = eta * frob_norm_sq(db) - frob_norm_sq(matmul(data.x, db));
        return rho * q_norm_sq + rho * frob_norm_sq(sub(phi, phi_star)) +
               frob_norm_sq(sub(gamma, gamma_star)) / rho;
    };

    MonotonicityReport report;
    // distance at the cold-start initial point (beta=0, Phi=Y, Gamma=0)
    report.d_rho.push_back(
        d_rho_at(Mat(data.p(), data.q(), 0.0), data.y, Mat(data.n(), data.q(), 0.0)));

    AdmmConfig diag = cfg;
    diag.adaptive_rho = false;
    diag.rho0 = rho;
    admm_fit(data, pen, diag, nullptr,
             [&](const SolverState& st, const IterationRecord&) {
                 report.d_rho.push_back(d_rho_at(st.b, st.phi, st.gamma));
             });

    std::size_t increases = 0;
    for (std::size_t i = 1; i < report.d_rho.size(); ++i)
        if (report.d_rho[i] > report.d_rho[i - 1] + 1e-9) ++increases;
    report.increase_fraction = report.d_rho.size() > 1
        ? static_cast<double>(increases) / static_cast<double>(report.d_rho.size() - 1)
        : 0.0;

    // log-log slope over the tail half, skipping values at the noise floor
    const double floor = 1e-14 * std::max(report.d_rho.front(), 1.0);
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = report.d_rho.size() / 2; i < report.d_rho.size(); ++i)
        if (report.d_rho[i] > floor)
            pts.emplace_back(std::log(static_cast<double>(i + 1)), std::log(report.d_rho[i]));
    if (pts.size() < 2) {
        report.tail_slope = -std::numeric_limits<double>::infinity();
        return report;
    }
    double mx = 0.0, my = 0.0;
    for (const auto& [x, y] : pts) { mx += x; my += y; }
    mx /= static_cast<double>(pts.size());
    my /= static_cast<double>(pts.size());
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : pts) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    report.tail_slope = sxx > 0.0 ? sxy / sxx : 0.0;
    return report;
}

} // namespace msrl
