#pragma once

#include "msrl/admm.hpp"
#include "msrl/dataset.hpp"
#include "msrl/penalty.hpp"

namespace msrl {

struct PlsConfig {
    long max_iter = 50000;
    double kkt_tol = 1e-6;
};

/// Penalized least squares: (1/2n)||Y - X b||_F^2 + lambda g(b), solved by
/// accelerated proximal gradient with fixed step 1/L, L = ||X||^2 / n.
/// Terminates when the first-order residual drops below kkt_tol.
FitResult pls_fit(const Dataset& data, const PenaltySpec& pen, const PlsConfig& cfg = {},
                  const Mat* warm_start = nullptr);

/// Value of the PLS criterion at b.
double pls_objective(const Dataset& data, const PenaltySpec& pen, const Mat& b);

/// First-order residual of the PLS criterion at b.
double pls_kkt_residual(const Dataset& data, const PenaltySpec& pen, const Mat& b);

/// Smallest lambda at which the PLS solution is exactly zero.
double pls_lambda_max(const Dataset& data, PenaltyKind kind);

/// Column-wise calibrated estimator: q separate univariate square-root
/// lassos sharing one tuning parameter. Only the L1 penalty separates
/// across columns; other kinds are rejected.
FitResult calibrated_fit(const Dataset& data, PenaltyKind kind, double lambda,
                         const AdmmConfig& cfg = {});

/// Calibrated fits over a descending grid; each column sweeps the grid with
/// warm starts, columns run in parallel.
std::vector<FitResult> calibrated_path(const Dataset& data, PenaltyKind kind,
                                       const std::vector<double>& lambdas,
                                       const AdmmConfig& cfg = {});

/// Post-selection re-estimation on the support of beta_hat: alternating
/// generalized-least-squares coefficient updates and residual-covariance
/// updates (Sigma = R'R/n + 1e-6 I) until the coefficients move less than
/// 1e-6 in Frobenius norm or 100 alternations. Zeros stay zero.
Mat refit(const Dataset& data, const Mat& beta_hat);

} // namespace msrl
