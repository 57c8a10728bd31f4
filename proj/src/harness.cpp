#include "msrl/harness.hpp"

#include <chrono>
#include <cmath>

#include "msrl/baselines.hpp"
#include "msrl/errors.hpp"
#include "msrl/kernels.hpp"
#include "msrl/linalg.hpp"

namespace msrl {

namespace {

const std::vector<std::string> kMethodNames = {
    "msr-cv", "msr-q50", "msr-q75", "msr-q85", "msr-q95", "pls", "calibrated"};

double validation_mse(const SimInstance& inst, const Mat& beta_hat) {
    const Mat pred = matmul(inst.validation.x, beta_hat);
    const double denom = static_cast<double>(inst.validation.y.rows()) *
                         static_cast<double>(inst.validation.y.cols());
    return frob_norm_sq(sub(inst.validation.y, pred)) / denom;
}

std::size_t argmin_mse(const SimInstance& inst, const std::vector<FitResult>& path) {
    std::size_t best = 0;
    double best_err = validation_mse(inst, path[0].b_hat);
    for (std::size_t l = 1; l < path.size(); ++l) {
        const double err = validation_mse(inst, path[l].b_hat);
        if (err < best_err) {
            best_err = err;
            best = l;
        }
    }
    return best;
}

double quantile_level_of(const std::string& method) {
    if (method == "msr-q50") return 0.50;
    if (method == "msr-q75") return 0.75;
    if (method == "msr-q85") return 0.85;
    return 0.95;
}

} // namespace

void validate_method_names(const std::vector<std::string>& methods) {
    for (const std::string& m : methods) {
        bool known = false;
        for (const std::string& k : kMethodNames)
            if (m == k) { known = true; break; }
        if (!known) {
            std::string valid;
            for (const std::string& k : kMethodNames) valid += (valid.empty() ? "" : ", ") + k;
            throw data_error("unknown method '" + m + "'; valid names: " + valid);
        }
    }
}

std::vector<RepMetrics> run_replications(const SimDesign& design,
                                         const std::vector<std::string>& methods,
                                         int reps, const HarnessConfig& cfg) {
    validate_method_names(methods);
    if (reps < 1) throw data_error("run_replications: need at least one replication");

    // the penalty follows the coefficient construction, as in the experiments
    const PenaltyKind kind = design.beta_scheme == BetaScheme::ElementwiseSparse
                                 ? PenaltyKind::L1
                                 : PenaltyKind::GroupL1;

    std::vector<RepMetrics> rows(static_cast<std::size_t>(reps) * methods.size());

    const std::int64_t total = reps;
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t rep = 0; rep < total; ++rep) {
        SimDesign rep_design = design;
        rep_design.seed = Rng::derive(design.seed, 1000 + static_cast<std::uint64_t>(rep)).next_u64();
        const SimInstance inst = simulate(rep_design);

        for (std::size_t mi = 0; mi < methods.size(); ++mi) {
            const std::string& method = methods[mi];
            const auto t0 = std::chrono::steady_clock::now();
            Mat beta;
            double lambda = 0.0;

            if (method == "msr-cv") {
                const double lmax = lambda_max(inst.data, kind);
                const std::vector<double> grid =
                    default_lambda_grid(lmax, cfg.n_lambda, cfg.lambda_min_ratio);
                const std::vector<FitResult> path =
                    hybrid_path_fit(inst.data, kind, grid, cfg.solvers.admm, cfg.solvers.apgd);
                const std::size_t best = argmin_mse(inst, path);
                beta = path[best].b_hat;
                lambda = grid[best];
            } else if (method == "pls") {
                const double lmax = pls_lambda_max(inst.data, kind);
                const std::vector<double> grid =
                    default_lambda_grid(lmax, cfg.n_lambda, cfg.lambda_min_ratio);
                std::vector<FitResult> path;
                path.reserve(grid.size());
                for (std::size_t l = 0; l < grid.size(); ++l) {
                    const Mat* warm = l > 0 ? &path[l - 1].b_hat : nullptr;
                    path.push_back(
                        pls_fit(inst.data, PenaltySpec{kind, grid[l]}, PlsConfig{}, warm));
                }
                const std::size_t best = argmin_mse(inst, path);
                beta = path[best].b_hat;
                lambda = grid[best];
            } else if (method == "calibrated") {
                // shared lambda across the per-response square-root lassos
                double lmax = 0.0;
                for (std::size_t k = 0; k < inst.data.q(); ++k) {
                    Dataset slice;
                    slice.y = inst.data.y.col(k);
                    slice.x = inst.data.x;
                    lmax = std::max(lmax, lambda_max(slice, PenaltyKind::L1));
                }
                const std::vector<double> grid =
                    default_lambda_grid(lmax, cfg.n_lambda, cfg.lambda_min_ratio);
                const std::vector<FitResult> path =
                    calibrated_path(inst.data, PenaltyKind::L1, grid, cfg.solvers.admm);
                const std::size_t best = argmin_mse(inst, path);
                beta = path[best].b_hat;
                lambda = grid[best];
            } else {
                // pivotal Monte-Carlo quantile tuning
                const TuneDistribution dist =
                    mc_tune(inst.data, kind, cfg.c, cfg.mc_draws, rep_design.seed);
                lambda = quantile(dist, quantile_level_of(method));
                const FitResult fit = hybrid_single_fit(inst.data, PenaltySpec{kind, lambda},
                                                        cfg.solvers.admm, cfg.solvers.apgd);
                beta = cfg.refit_direct ? refit(inst.data, fit.b_hat) : fit.b_hat;
            }

            const auto t1 = std::chrono::steady_clock::now();
            RepMetrics& row = rows[static_cast<std::size_t>(rep) * methods.size() + mi];
            row.rep = static_cast<int>(rep);
            row.method = method;
            row.lambda = lambda;
            row.metrics = evaluate(beta, inst, design.beta_scheme);
            row.seconds = std::chrono::duration<double>(t1 - t0).count();
        }
    }
    return rows;
}

} // namespace msrl
