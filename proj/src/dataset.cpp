#include "msrl/dataset.hpp"

#include <cmath>

#include "msrl/errors.hpp"

namespace msrl {

namespace {

std::vector<double> column_means(const Mat& m) {
    std::vector<double> mu(m.cols(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double* row = m.row(i);
        for (std::size_t j = 0; j < m.cols(); ++j) mu[j] += row[j];
    }
    const double inv_n = 1.0 / static_cast<double>(m.rows());
    for (double& v : mu) v *= inv_n;
    return mu;
}

Mat centered(const Mat& m, const std::vector<double>& mu) {
    Mat c(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) c(i, j) = m(i, j) - mu[j];
    return c;
}

} // namespace

Dataset center_and_normalize(const Mat& y_raw, const Mat& x_raw, bool normalize) {
    if (y_raw.rows() != x_raw.rows())
        throw data_error("center_and_normalize: y has " + std::to_string(y_raw.rows()) +
                         " rows but x has " + std::to_string(x_raw.rows()));
    if (y_raw.rows() < 2) throw data_error("center_and_normalize: need at least 2 rows");
    if (!y_raw.all_finite() || !x_raw.all_finite())
        throw data_error("center_and_normalize: non-finite entries");

    Dataset d;
    d.y_means = column_means(y_raw);
    d.x_means = column_means(x_raw);
    d.y = centered(y_raw, d.y_means);
    d.x = centered(x_raw, d.x_means);
    d.column_scales.assign(x_raw.cols(), 1.0);
    d.normalized = normalize;
    if (!normalize) return d;

    const double n = static_cast<double>(d.x.rows());
    for (std::size_t j = 0; j < d.x.cols(); ++j) {
        double ss = 0.0;
        for (std::size_t i = 0; i < d.x.rows(); ++i) ss += d.x(i, j) * d.x(i, j);
        if (ss <= 0.0)
            throw data_error("center_and_normalize: predictor column " + std::to_string(j) +
                             " has zero variance; cannot normalize");
        const double scale = std::sqrt(n / ss);
        d.column_scales[j] = scale;
        for (std::size_t i = 0; i < d.x.rows(); ++i) d.x(i, j) *= scale;
    }
    return d;
}

Mat to_raw_scale(const Dataset& data, const Mat& beta) {
    Mat out = beta;
    for (std::size_t j = 0; j < out.rows(); ++j)
        for (std::size_t k = 0; k < out.cols(); ++k)
            out(j, k) *= data.column_scales[j];
    return out;
}

std::vector<double> intercept_from(const Dataset& data, const Mat& beta_raw) {
    std::vector<double> b0 = data.y_means;
    for (std::size_t k = 0; k < b0.size(); ++k) {
        double acc = 0.0;
        for (std::size_t j = 0; j < beta_raw.rows(); ++j)
            acc += data.x_means[j] * beta_raw(j, k);
        b0[k] -= acc;
    }
    return b0;
}

} // namespace msrl
