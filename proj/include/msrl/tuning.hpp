#pragma once

#include <cstdint>
#include <vector>

#include "msrl/apgd.hpp"
#include "msrl/dataset.hpp"
#include "msrl/penalty.hpp"
#include "msrl/rng.hpp"

namespace msrl {

/// Monte-Carlo sample of the pivotal statistic (c/sqrt(n)) * g~(X'O) with O
/// uniform on the set of n x q matrices with orthonormal columns. Depends on
/// the design and the penalty only, never on the responses.
struct TuneDistribution {
    std::vector<double> samples; // in draw order
    std::vector<double> sorted;  // cached ascending copy for quantile queries
    double c = 1.01;
    PenaltyKind kind = PenaltyKind::L1;
    std::size_t n_draws = 0;
    std::uint64_t seed = 0;
};

/// Haar draw on O(n, q): thin SVD of a standard normal matrix, U V'.
Mat sample_stiefel_uniform(std::size_t n, std::size_t q, Rng& rng);

TuneDistribution mc_tune(const Dataset& data, PenaltyKind kind, double c,
                         std::size_t n_draws, std::uint64_t seed);

/// Empirical quantile, type-7 linear interpolation; level in (0, 1).
double quantile(const TuneDistribution& dist, double level);

/// Constants for the closed-form tuning rules; all must exceed 1.
struct CorollaryConstants {
    double c = 1.01;
    double c1 = 1.01;
    double c2 = 1.01;
    double c3 = 1.01;
    double c4() const; // 4 log(7 + c3)
};

/// Closed-form lambda: L1, group and nuclear each take their own formula.
/// The sample-size and constant conditions are checked and violations are
/// reported with the failing condition spelled out.
double corollary_lambda(PenaltyKind kind, std::size_t n, std::size_t p, std::size_t q,
                        const CorollaryConstants& consts, double x_spectral_norm);

/// Smallest lambda whose solution is exactly zero:
/// (1/sqrt(n)) * g~(X' U_Y V_Y') with (U_Y, ., V_Y) the thin SVD of Y.
double lambda_max(const Dataset& data, PenaltyKind kind);

/// Log-spaced descending grid from lmax down to min_ratio * lmax.
std::vector<double> default_lambda_grid(double lmax, std::size_t count = 100,
                                        double min_ratio = 1e-4);

struct SolverConfigs {
    AdmmConfig admm;
    ApgdConfig apgd;
};

struct CvCurve {
    double mean = 0.0;
    double std_error = 0.0;
};

struct PathResult {
    std::vector<double> lambdas;
    std::vector<FitResult> fits; // full-data fits, aligned with lambdas
    std::vector<CvCurve> cv;     // empty unless cross_validate filled it
    std::size_t best_index = 0;  // argmin of cv mean
    std::size_t one_se_index = 0; // largest lambda within one SE of the best
};

/// K-fold cross-validation over the grid. Per fold the centering and
/// normalization are refit on the training rows and held-out rows are
/// transformed with those statistics. Fold assignment is a deterministic
/// shuffle of the row indices under the seed; an explicit assignment
/// (values in [0, folds)) overrides it.
PathResult cross_validate(const Dataset& data, PenaltyKind kind,
                          const std::vector<double>& lambdas, std::size_t folds,
                          std::uint64_t seed, const SolverConfigs& cfgs,
                          const std::vector<std::size_t>* fold_assignment = nullptr);

} // namespace msrl
