#pragma once

#include <cstdint>

#include "msrl/dataset.hpp"
#include "msrl/mat.hpp"
#include "msrl/rng.hpp"

namespace msrl {

enum class CovModel { CompoundSymmetry, ConditionNumber, Factor };
enum class ErrorDist { Normal, StudentT5 };
enum class BetaScheme { ElementwiseSparse, RowSparse };

struct SimDesign {
    std::size_t n = 100;
    std::size_t p = 120;
    std::size_t q = 15;
    CovModel model = CovModel::CompoundSymmetry;
    double xi = 0.9;        // compound-symmetry correlation, in [0, 1)
    double cond = 5.0;      // condition number, >= 1
    std::size_t factors = 2; // factor count r, 1 <= r <= q
    ErrorDist errors = ErrorDist::Normal;
    BetaScheme beta_scheme = BetaScheme::ElementwiseSparse;
    std::uint64_t seed = 0;
    // t5 rows are Sigma^{1/2} z sqrt(5/w) by default (shape matrix Sigma,
    // covariance (5/3) Sigma); setting this rescales so the covariance is
    // exactly Sigma.
    bool t_covariance_scaled = false;

    void validate() const;
};

/// A generated replication. Both Datasets are centered and the predictors
/// normalized; the validation set is transformed with the *training*
/// centering statistics and column scales, so predictions from coefficients
/// fitted on `data` apply to `validation` directly.
struct SimInstance {
    Dataset data;
    Dataset validation;
    Mat beta_star;  // raw predictor scale
    Mat sigma_star; // q x q
    std::vector<double> response_sds; // complete-data (train+validation) response SDs
};

/// Error covariance per model. Models 2 and 3 consume randomness.
Mat make_sigma(const SimDesign& design, Rng& rng);

/// Coefficient construction: 5 nonzero entries per column (elementwise) or
/// 5 nonzero rows with N(0, 0.1^2) entries (row scheme).
Mat make_beta(BetaScheme scheme, std::size_t p, std::size_t q, Rng& rng);

SimInstance simulate(const SimDesign& design);

struct Metrics {
    double frob_sq_error = 0.0;
    double tpr = 0.0;
    double fpr = 0.0;
    double weighted_pred_error = 0.0;
    double nuclear_pred_error = 0.0;
};

/// beta_hat is on the training Dataset's (normalized) scale; it is mapped
/// back to the raw scale for the estimation and selection metrics. The
/// support unit follows the instance's beta scheme: entries for the
/// elementwise construction, rows for the row-sparse one.
Metrics evaluate(const Mat& beta_hat, const SimInstance& instance,
                 BetaScheme scheme, double support_threshold = 1e-8,
                 double nuclear_normalizer = 1000.0);

} // namespace msrl
