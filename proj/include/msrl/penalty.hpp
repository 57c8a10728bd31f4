#pragma once

#include <string>

#include "msrl/mat.hpp"

namespace msrl {

/// The three penalties the estimator supports. Groups of the group lasso are
/// exactly the rows of the coefficient matrix.
enum class PenaltyKind { L1, GroupL1, Nuclear };

struct PenaltySpec {
    PenaltyKind kind = PenaltyKind::L1;
    double lambda = 0.0;
};

/// g(b): entrywise L1, sum of row norms, or sum of singular values.
double penalty_value(PenaltyKind kind, const Mat& b);

/// Dual norm of g: max-abs entry, max row norm, or spectral norm.
double dual_norm(PenaltyKind kind, const Mat& a);

/// argmin_x (1/2)||a - x||_F^2 + threshold * g(x). Closed form for all three
/// kinds; threshold 0 returns a unchanged.
Mat prox(PenaltyKind kind, const Mat& a, double threshold);

/// Distance from g to the scaled subdifferential lambda * dg(b): the max
/// violation of the first-order conditions. Zero iff g lies in the set.
double subgradient_distance(PenaltyKind kind, const Mat& g, const Mat& b, double lambda);

/// CLI/config names: "lasso" | "group" | "nuclear".
PenaltyKind penalty_from_name(const std::string& name);
const char* penalty_name(PenaltyKind kind);

} // namespace msrl
