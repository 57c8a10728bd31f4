#pragma once

#include <optional>
#include <vector>

#include "msrl/admm.hpp"
#include "msrl/dataset.hpp"
#include "msrl/penalty.hpp"

namespace msrl {

struct ApgdConfig {
    double initial_step = 0.0;      // 0 picks n / ||X||^2 automatically
    double backtrack_shrink = 0.5;  // in (0, 1)
    long max_iter = 10000;
    double obj_tol = 1e-8;          // relative objective change, 3 consecutive hits
    double rank_tol_factor = 1e-8;  // sigma_q <= factor * sigma_1 declares rank deficiency

    void validate() const;
};

/// Gradient of b -> ||Y - X b||_* when the residual keeps q non-zero singular
/// values: -X' U V' with (U, D, V) the thin SVD of the residual. Returns
/// nullopt when the residual is rank deficient at the given tolerance.
std::optional<Mat> nuclear_residual_gradient(const Dataset& data, const Mat& b,
                                             double rank_tol_factor = 1e-8);

enum class ApgdStatus { Converged, MaxIterations, RankDeficient };

struct ApgdResult {
    ApgdStatus status = ApgdStatus::Converged;
    FitResult fit;      // valid unless status == RankDeficient
    Mat last_iterate;   // last full-rank iterate when rank deficiency aborts
    std::vector<double> objective_history;
};

/// Accelerated proximal gradient for the same criterion as admm_fit, valid
/// while every iterate keeps a full-rank residual. Requires n > q.
ApgdResult apgd_fit(const Dataset& data, const PenaltySpec& pen, const ApgdConfig& cfg,
                    const Mat* warm_start = nullptr);

/// Warm-started sweep over a strictly descending grid: APGD while residuals
/// stay full rank, ADMM from the first rank-deficient event onward.
std::vector<FitResult> hybrid_path_fit(const Dataset& data, PenaltyKind kind,
                                       const std::vector<double>& lambdas,
                                       const AdmmConfig& cfg_admm, const ApgdConfig& cfg_apgd);

/// Single-lambda version of the hybrid strategy: APGD when applicable,
/// ADMM seeded from the last good iterate on a rank event.
FitResult hybrid_single_fit(const Dataset& data, const PenaltySpec& pen,
                            const AdmmConfig& cfg_admm, const ApgdConfig& cfg_apgd);

} // namespace msrl
