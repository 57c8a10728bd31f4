#include "msrl/datagen.hpp"

#include <algorithm>
#include <cmath>

#include "msrl/errors.hpp"
#include "msrl/kernels.hpp"
#include "msrl/linalg.hpp"

namespace msrl {

void SimDesign::validate() const {
    if (n < 1 || p < 1 || q < 1) throw data_error("SimDesign: n, p, q must be >= 1");
    if (model == CovModel::CompoundSymmetry && !(xi >= 0.0 && xi < 1.0))
        throw data_error("SimDesign: xi must lie in [0, 1)");
    if (model == CovModel::ConditionNumber && !(cond >= 1.0))
        throw data_error("SimDesign: condition number must be >= 1");
    if (model == CovModel::Factor && !(factors >= 1 && factors <= q))
        throw data_error("SimDesign: factor count must satisfy 1 <= r <= q");
}

Mat make_sigma(const SimDesign& design, Rng& rng) {
    design.validate();
    const std::size_t q = design.q;
    switch (design.model) {
    case CovModel::CompoundSymmetry: {
        Mat s(q, q, 3.0 * design.xi);
        for (std::size_t j = 0; j < q; ++j) s(j, j) = 3.0;
        return s;
    }
    case CovModel::ConditionNumber: {
        // Haar orthogonal O via sign-corrected QR of a Gaussian matrix
        Mat z(q, q);
        for (std::size_t i = 0; i < q; ++i)
            for (std::size_t j = 0; j < q; ++j) z(i, j) = rng.normal();
        QrFactor qr = qr_thin(z);
        Mat o = qr.q;
        for (std::size_t j = 0; j < q; ++j)
            if (qr.r_diag[j] < 0.0)
                for (std::size_t i = 0; i < q; ++i) o(i, j) = -o(i, j);
        Mat og(q, q);
        for (std::size_t i = 0; i < q; ++i)
            for (std::size_t j = 0; j < q; ++j) {
                const double gamma =
                    q == 1 ? 1.0
                           : 1.0 + (1.0 / design.cond - 1.0) * static_cast<double>(j) /
                                 static_cast<double>(q - 1);
                og(i, j) = o(i, j) * gamma;
            }
        return scaled(tcrossprod(og, o), 2.0);
    }
    case CovModel::Factor: {
        const std::size_t r = design.factors;
        Mat rt(r, q);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < q; ++j) rt(i, j) = rng.normal();
        // rescale columns so diag(R'R) = 1.45 exactly
        for (std::size_t j = 0; j < q; ++j) {
            double ss = 0.0;
            for (std::size_t i = 0; i < r; ++i) ss += rt(i, j) * rt(i, j);
            if (ss < 1e-12)
                throw numerical_error("make_sigma: degenerate factor column " + std::to_string(j));
            const double k = std::sqrt(1.45 / ss);
            for (std::size_t i = 0; i < r; ++i) rt(i, j) *= k;
        }
        Mat s = crossprod(rt, rt);
        for (std::size_t j = 0; j < q; ++j) s(j, j) += 0.05;
        return s;
    }
    }
    throw data_error("make_sigma: unknown model");
}

Mat make_beta(BetaScheme scheme, std::size_t p, std::size_t q, Rng& rng) {
    if (p < 5) throw data_error("make_beta: need p >= 5 for the sparsity constructions");
    Mat beta(p, q, 0.0);
    std::vector<std::size_t> pool(p);
    switch (scheme) {
    case BetaScheme::ElementwiseSparse:
        for (std::size_t k = 0; k < q; ++k) {
            for (std::size_t i = 0; i < p; ++i) pool[i] = i;
            for (std::size_t picked = 0; picked < 5; ++picked) {
                const std::size_t at = picked + rng.uniform_index(p - picked);
                std::swap(pool[picked], pool[at]);
                beta(pool[picked], k) = rng.normal();
            }
        }
        return beta;
    case BetaScheme::RowSparse: {
        for (std::size_t i = 0; i < p; ++i) pool[i] = i;
        for (std::size_t picked = 0; picked < 5; ++picked) {
            const std::size_t at = picked + rng.uniform_index(p - picked);
            std::swap(pool[picked], pool[at]);
            for (std::size_t k = 0; k < q; ++k) beta(pool[picked], k) = 0.1 * rng.normal();
        }
        return beta;
    }
    }
    throw data_error("make_beta: unknown scheme");
}

namespace {

// rows iid N_p(0, Sigma_X) with [Sigma_X]_{jk} = 0.5^{|j-k|}, generated by
// the stationary AR(1) recursion (its analytic Cholesky)
Mat ar1_design(std::size_t n, std::size_t p, Rng& rng) {
    Mat x(n, p);
    const double phi = 0.5;
    const double innov = std::sqrt(1.0 - phi * phi);
    for (std::size_t i = 0; i < n; ++i) {
        x(i, 0) = rng.normal();
        for (std::size_t j = 1; j < p; ++j) x(i, j) = phi * x(i, j - 1) + innov * rng.normal();
    }
    return x;
}

Mat error_matrix(std::size_t n, std::size_t q, const Mat& sigma_half,
                 ErrorDist dist, bool cov_scaled, Rng& rng) {
    Mat e(n, q);
    std::vector<double> z(q);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < q; ++j) z[j] = rng.normal();
        double row_scale = 1.0;
        if (dist == ErrorDist::StudentT5) {
            const double w = rng.chi_squared(5);
            row_scale = std::sqrt(5.0 / w);
            if (cov_scaled) row_scale *= std::sqrt(3.0 / 5.0);
        }
        for (std::size_t j = 0; j < q; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < q; ++k) acc += sigma_half(j, k) * z[k];
            e(i, j) = row_scale * acc;
        }
    }
    return e;
}

Mat sym_sqrt(const Mat& sigma) {
    const SymEig eig = eig_sym(sigma);
    Mat scaled_vecs = eig.vectors;
    for (std::size_t j = 0; j < scaled_vecs.cols(); ++j) {
        const double s = std::sqrt(std::max(eig.values[j], 0.0));
        for (std::size_t i = 0; i < scaled_vecs.rows(); ++i) scaled_vecs(i, j) *= s;
    }
    return tcrossprod(scaled_vecs, eig.vectors);
}

} // namespace

SimInstance simulate(const SimDesign& design) {
    design.validate();
    Rng rng_sigma = Rng::derive(design.seed, 1);
    Rng rng_beta = Rng::derive(design.seed, 2);
    Rng rng_train_x = Rng::derive(design.seed, 3);
    Rng rng_train_e = Rng::derive(design.seed, 4);
    Rng rng_val_x = Rng::derive(design.seed, 5);
    Rng rng_val_e = Rng::derive(design.seed, 6);

    SimInstance inst;
    inst.sigma_star = make_sigma(design, rng_sigma);
    inst.beta_star = make_beta(design.beta_scheme, design.p, design.q, rng_beta);
    const Mat sigma_half = sym_sqrt(inst.sigma_star);

    const Mat x_train = ar1_design(design.n, design.p, rng_train_x);
    const Mat e_train = error_matrix(design.n, design.q, sigma_half, design.errors,
                                     design.t_covariance_scaled, rng_train_e);
    const Mat y_train = add(matmul(x_train, inst.beta_star), e_train);

    const Mat x_val = ar1_design(design.n, design.p, rng_val_x);
    const Mat e_val = error_matrix(design.n, design.q, sigma_half, design.errors,
                                   design.t_covariance_scaled, rng_val_e);
    const Mat y_val = add(matmul(x_val, inst.beta_star), e_val);

    inst.data = center_and_normalize(y_train, x_train, true);

    // validation rows mapped through the training statistics so training-scale
    // coefficients predict them directly
    Dataset val;
    val.normalized = inst.data.normalized;
    val.column_scales = inst.data.column_scales;
    val.y_means = inst.data.y_means;
    val.x_means = inst.data.x_means;
    val.x = x_val;
    val.y = y_val;
    for (std::size_t i = 0; i < val.x.rows(); ++i) {
        for (std::size_t j = 0; j < val.x.cols(); ++j)
            val.x(i, j) = (val.x(i, j) - inst.data.x_means[j]) * inst.data.column_scales[j];
        for (std::size_t j = 0; j < val.y.cols(); ++j) val.y(i, j) -= inst.data.y_means[j];
    }
    inst.validation = std::move(val);

    inst.response_sds.assign(design.q, 0.0);
    const std::size_t total = 2 * design.n;
    for (std::size_t j = 0; j < design.q; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < design.n; ++i) mean += y_train(i, j) + y_val(i, j);
        mean /= static_cast<double>(total);
        double var = 0.0;
        for (std::size_t i = 0; i < design.n; ++i) {
            var += (y_train(i, j) - mean) * (y_train(i, j) - mean);
            var += (y_val(i, j) - mean) * (y_val(i, j) - mean);
        }
        var /= static_cast<double>(total - 1);
        inst.response_sds[j] = std::max(std::sqrt(var), 1e-12);
    }
    return inst;
}

Metrics evaluate(const Mat& beta_hat, const SimInstance& instance, BetaScheme scheme,
                 double support_threshold, double nuclear_normalizer) {
    if (!beta_hat.same_shape(instance.beta_star))
        throw data_error("evaluate: coefficient shape mismatch");

    Metrics m;
    const Mat beta_raw = to_raw_scale(instance.data, beta_hat);
    m.frob_sq_error = frob_norm_sq(sub(beta_raw, instance.beta_star));

    std::size_t tp = 0, fp = 0, true_pos = 0, true_neg = 0;
    if (scheme == BetaScheme::ElementwiseSparse) {
        for (std::size_t j = 0; j < beta_raw.rows(); ++j)
            for (std::size_t k = 0; k < beta_raw.cols(); ++k) {
                const bool truth = instance.beta_star(j, k) != 0.0;
                const bool sel = std::abs(beta_raw(j, k)) > support_threshold;
                truth ? ++true_pos : ++true_neg;
                if (sel && truth) ++tp;
                if (sel && !truth) ++fp;
            }
    } else {
        const std::vector<double> hat_norms = row_norms(beta_raw);
        const std::vector<double> star_norms = row_norms(instance.beta_star);
        for (std::size_t j = 0; j < beta_raw.rows(); ++j) {
            const bool truth = star_norms[j] > 0.0;
            const bool sel = hat_norms[j] > support_threshold;
            truth ? ++true_pos : ++true_neg;
            if (sel && truth) ++tp;
            if (sel && !truth) ++fp;
        }
    }
    m.tpr = true_pos > 0 ? static_cast<double>(tp) / static_cast<double>(true_pos) : 1.0;
    m.fpr = true_neg > 0 ? static_cast<double>(fp) / static_cast<double>(true_neg) : 0.0;

    const Mat pred = matmul(instance.validation.x, beta_hat);
    Mat diff = sub(instance.validation.y, pred);
    m.nuclear_pred_error = nuclear_norm(diff) / nuclear_normalizer;
    for (std::size_t i = 0; i < diff.rows(); ++i)
        for (std::size_t j = 0; j < diff.cols(); ++j) diff(i, j) /= instance.response_sds[j];
    m.weighted_pred_error =
        frob_norm_sq(diff) /
        (static_cast<double>(diff.rows()) * static_cast<double>(diff.cols()));
    return m;
}

} // namespace msrl
