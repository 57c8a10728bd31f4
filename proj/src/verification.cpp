#include "msrl/verification.hpp"

#include <cmath>

#include "msrl/errors.hpp"
#include "msrl/kernels.hpp"
#include "msrl/linalg.hpp"

namespace msrl {

namespace {

constexpr double kRankTol = 1e-8;   // sigma_q <= tol * sigma_1 is rank deficient
constexpr double kPinvClip = 1e-12; // eigenvalue clip for pseudoinverse branches

// V f(diag) V' for the eigendecomposition of a symmetric matrix
Mat eig_apply(const SymEig& eig, const std::vector<double>& f_values) {
    Mat scaled_vecs = eig.vectors;
    for (std::size_t j = 0; j < scaled_vecs.cols(); ++j)
        for (std::size_t i = 0; i < scaled_vecs.rows(); ++i)
            scaled_vecs(i, j) *= f_values[j];
    return tcrossprod(scaled_vecs, eig.vectors);
}

} // namespace

double kkt_residual(const Dataset& data, const PenaltySpec& pen, const Mat& b) {
    if (data.n() <= data.q()) throw rank_deficient_error("kkt_residual: requires n > q");
    const Mat residual = sub(data.y, matmul(data.x, b));
    const SymEig eig = eig_sym(crossprod(residual, residual));
    const double sigma1 = std::sqrt(std::max(eig.values.front(), 0.0));
    const double sigma_q = std::sqrt(std::max(eig.values.back(), 0.0));
    if (!(sigma_q > kRankTol * sigma1) || sigma1 == 0.0)
        throw rank_deficient_error(
            "kkt_residual: residual is rank deficient; the subgradient form of the "
            "first-order conditions is not implemented as a checker");
    std::vector<double> inv_sqrt(eig.values.size());
    for (std::size_t i = 0; i < eig.values.size(); ++i)
        inv_sqrt[i] = 1.0 / std::sqrt(eig.values[i]);
    const Mat gram_inv_half = eig_apply(eig, inv_sqrt);
    const Mat g = scaled(matmul(crossprod(data.x, residual), gram_inv_half),
                         1.0 / std::sqrt(static_cast<double>(data.n())));
    return subgradient_distance(pen.kind, g, b, pen.lambda);
}

std::pair<double, double> weighted_rss_identity(const Dataset& data, const Mat& b) {
    const double n = static_cast<double>(data.n());
    const Mat residual = sub(data.y, matmul(data.x, b));
    const double lhs = nuclear_norm(residual) / std::sqrt(n);

    const Mat gram = crossprod(residual, residual);
    const SymEig eig = eig_sym(gram);
    // S = gram^{1/2} / sqrt(n); pseudoinverse clips eigenvalues of S at kPinvClip
    std::vector<double> pinv(eig.values.size());
    for (std::size_t i = 0; i < eig.values.size(); ++i) {
        const double s_eig = std::sqrt(std::max(eig.values[i], 0.0)) / std::sqrt(n);
        pinv[i] = s_eig > kPinvClip ? 1.0 / s_eig : 0.0;
    }
    const Mat s_pinv = eig_apply(eig, pinv);
    const double rhs = trace(matmul(s_pinv, gram)) / n;
    return {lhs, rhs};
}

double joint_objective(const Dataset& data, const PenaltySpec& pen, const Mat& b,
                       const Mat& s_half) {
    const std::size_t q = data.q();
    if (s_half.rows() != q || s_half.cols() != q)
        throw data_error("joint_objective: covariance square root must be q x q");
    const SymEig eig = eig_sym(s_half);
    if (eig.values.back() <= 0.0)
        throw data_error("joint_objective: covariance square root must be positive definite");
    std::vector<double> inv(eig.values.size());
    for (std::size_t i = 0; i < eig.values.size(); ++i) inv[i] = 1.0 / eig.values[i];
    const Mat s_inv = eig_apply(eig, inv);

    const double n = static_cast<double>(data.n());
    const Mat residual = sub(data.y, matmul(data.x, b));
    const double quad = trace(matmul(s_inv, crossprod(residual, residual))) / (2.0 * n);
    return quad + 0.5 * trace(s_half) + pen.lambda * penalty_value(pen.kind, b);
}

Lemma1Report lemma1_check(const Dataset& data, const PenaltySpec& pen, const Mat& b_hat,
                          int trials, double scale, Rng& rng) {
    const std::size_t q = data.q();
    const double n = static_cast<double>(data.n());
    const Mat residual = sub(data.y, matmul(data.x, b_hat));
    const SymEig gram_eig = eig_sym(crossprod(residual, residual));
    const double sigma1 = std::sqrt(std::max(gram_eig.values.front(), 0.0));
    const double sigma_q = std::sqrt(std::max(gram_eig.values.back(), 0.0));
    if (!(sigma_q > kRankTol * sigma1) || sigma1 == 0.0)
        throw rank_deficient_error(
            "lemma1_check: residual must have q non-zero singular values");

    std::vector<double> sqrt_over_n(gram_eig.values.size());
    for (std::size_t i = 0; i < gram_eig.values.size(); ++i)
        sqrt_over_n[i] = std::sqrt(std::max(gram_eig.values[i], 0.0) / n);
    const Mat s_half = eig_apply(gram_eig, sqrt_over_n); // (R'R / n)^{1/2}

    Lemma1Report report;
    report.base_objective = joint_objective(data, pen, b_hat, s_half);

    auto perturb_s = [&](double eps) {
        Mat noise(q, q);
        for (std::size_t i = 0; i < q; ++i)
            for (std::size_t j = i; j < q; ++j) {
                const double v = rng.normal();
                noise(i, j) = v;
                noise(j, i) = v;
            }
        const double nf = frob_norm(noise);
        Mat cand = lin_comb(1.0, s_half, nf > 0.0 ? eps / nf : 0.0, noise);
        // project back into the positive definite cone
        const SymEig eig = eig_sym(cand);
        std::vector<double> clipped(eig.values.size());
        for (std::size_t i = 0; i < eig.values.size(); ++i)
            clipped[i] = std::max(eig.values[i], 1e-8);
        return eig_apply(eig, clipped);
    };
    auto perturb_b = [&](double eps) {
        Mat noise(b_hat.rows(), b_hat.cols());
        for (std::size_t i = 0; i < noise.rows(); ++i)
            for (std::size_t j = 0; j < noise.cols(); ++j) noise(i, j) = rng.normal();
        const double nf = frob_norm(noise);
        return lin_comb(1.0, b_hat, nf > 0.0 ? eps / nf : 0.0, noise);
    };

    auto consider = [&](double value) {
        const double gain = report.base_objective - value;
        if (gain > 1e-9) ++report.violations;
        report.max_violation = std::max(report.max_violation, gain);
    };

    for (int t = 0; t < trials; ++t) {
        consider(joint_objective(data, pen, b_hat, perturb_s(scale)));
        consider(joint_objective(data, pen, perturb_b(scale), s_half));
        consider(joint_objective(data, pen, perturb_b(scale), perturb_s(scale)));
    }
    return report;
}

} // namespace msrl
