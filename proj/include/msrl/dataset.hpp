#pragma once

#include <vector>

#include "msrl/mat.hpp"

namespace msrl {

/// Centered responses and predictors, plus the statistics needed to map
/// fitted coefficients back to the raw scale.
struct Dataset {
    Mat y; // n x q, column-centered
    Mat x; // n x p, column-centered; rescaled to column norm sqrt(n) when normalized
    bool normalized = false;
    std::vector<double> column_scales; // multiplier applied to each centered X column
    std::vector<double> y_means;       // centering statistics of the raw inputs
    std::vector<double> x_means;

    std::size_t n() const { return y.rows(); }
    std::size_t q() const { return y.cols(); }
    std::size_t p() const { return x.cols(); }
};

/// Column-center y and x; optionally rescale every x column to norm sqrt(n).
/// A zero-variance predictor column is an error when normalization is on.
Dataset center_and_normalize(const Mat& y_raw, const Mat& x_raw, bool normalize);

/// Map coefficients fitted on the normalized scale back to the raw-x scale
/// (row j multiplied by column_scales[j]).
Mat to_raw_scale(const Dataset& data, const Mat& beta);

/// Intercept reconstruction: y_mean - beta_raw' x_mean.
std::vector<double> intercept_from(const Dataset& data, const Mat& beta_raw);

} // namespace msrl
