#pragma once

#include <utility>

#include "msrl/dataset.hpp"
#include "msrl/penalty.hpp"
#include "msrl/rng.hpp"

namespace msrl {

/// Distance of (1/sqrt(n)) X' R (R'R)^{-1/2} from lambda * dg(b), R = Y - Xb.
/// Requires n > q and a residual with q non-zero singular values; otherwise
/// throws rank_deficient_error (the subgradient form is not implemented).
double kkt_residual(const Dataset& data, const PenaltySpec& pen, const Mat& b);

/// Both sides of the weighted residual-sum-of-squares identity:
/// first  (1/sqrt(n)) ||Y - Xb||_*,
/// second tr{(1/n) (Y - Xb) S^+ (Y - Xb)'} with S = (1/sqrt(n)) [(Y-Xb)'(Y-Xb)]^{1/2}.
std::pair<double, double> weighted_rss_identity(const Dataset& data, const Mat& b);

/// The joint criterion of the implicit-covariance characterization at
/// (b, s_half) where s_half is a symmetric positive definite q x q matrix.
double joint_objective(const Dataset& data, const PenaltySpec& pen, const Mat& b,
                       const Mat& s_half);

struct Lemma1Report {
    int violations = 0;      // perturbations strictly below the base objective
    double max_violation = 0.0;
    double base_objective = 0.0;
};

/// Perturbation check of local minimality of the joint criterion at
/// (b_hat, [(R'R)/n]^{1/2}). Each trial perturbs the covariance square root,
/// the coefficients, and both together at the given Frobenius scale.
Lemma1Report lemma1_check(const Dataset& data, const PenaltySpec& pen, const Mat& b_hat,
                          int trials, double scale, Rng& rng);

} // namespace msrl
