#include "msrl/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "msrl/errors.hpp"
#include "msrl/kernels.hpp"
#include "msrl/linalg.hpp"

namespace msrl {

Mat sample_stiefel_uniform(std::size_t n, std::size_t q, Rng& rng) {
    if (n < q || q < 1)
        throw data_error("sample_stiefel_uniform: need n >= q >= 1, got n=" +
                         std::to_string(n) + ", q=" + std::to_string(q));
    Mat z(n, q);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < q; ++j) z(i, j) = rng.normal();
    const ThinSvd s = thin_svd(z);
    return tcrossprod(s.u, s.v); // polar factor; Haar on O(n, q)
}

TuneDistribution mc_tune(const Dataset& data, PenaltyKind kind, double c,
                         std::size_t n_draws, std::uint64_t seed) {
    if (!(c > 1.0)) throw data_error("mc_tune: c must exceed 1");
    if (n_draws == 0) throw data_error("mc_tune: need at least one draw");
    const std::size_t n = data.n(), q = data.q();
    if (n < q)
        throw data_error("mc_tune: requires n >= q (O(n,q) is empty otherwise)");

    TuneDistribution dist;
    dist.samples.resize(n_draws);
    dist.c = c;
    dist.kind = kind;
    dist.n_draws = n_draws;
    dist.seed = seed;

    const double scale = c / std::sqrt(static_cast<double>(n));
    const std::int64_t total = static_cast<std::int64_t>(n_draws);
    // one derived stream per draw: the result is identical however the
    // iterations get scheduled
#pragma omp parallel for schedule(dynamic, 8)
    for (std::int64_t i = 0; i < total; ++i) {
        Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(i));
        const Mat o = sample_stiefel_uniform(n, q, rng);
        dist.samples[static_cast<std::size_t>(i)] =
            scale * dual_norm(kind, crossprod(data.x, o));
    }

    dist.sorted = dist.samples;
    std::sort(dist.sorted.begin(), dist.sorted.end());
    return dist;
}

double quantile(const TuneDistribution& dist, double level) {
    if (dist.sorted.empty()) throw data_error("quantile: empty distribution");
    if (!(level > 0.0 && level < 1.0))
        throw data_error("quantile: level must lie strictly inside (0,1)");
    const std::size_t n = dist.sorted.size();
    const double h = (static_cast<double>(n) - 1.0) * level;
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, n - 1);
    const double w = h - static_cast<double>(lo);
    return (1.0 - w) * dist.sorted[lo] + w * dist.sorted[hi];
}

double CorollaryConstants::c4() const { return 4.0 * std::log(7.0 + c3); }

double corollary_lambda(PenaltyKind kind, std::size_t n, std::size_t p, std::size_t q,
                        const CorollaryConstants& consts, double x_spectral_norm) {
    if (!(consts.c > 1.0 && consts.c1 > 1.0 && consts.c2 > 1.0 && consts.c3 > 1.0))
        throw data_error("corollary_lambda: constants must all exceed 1");
    const double dn = static_cast<double>(n);
    const double dp = static_cast<double>(p);
    const double dq = static_cast<double>(q);
    switch (kind) {
    case PenaltyKind::L1: {
        const double body = 2.0 * consts.c1 * std::log(2.0 * dp * dq);
        if (!(dn > body + 1.0))
            throw data_error("corollary_lambda: condition n > 2*c1*log(2pq) + 1 violated (n=" +
                             std::to_string(n) + ", bound=" + std::to_string(body + 1.0) + ")");
        return consts.c * std::sqrt(body / (dn - 1.0));
    }
    case PenaltyKind::GroupL1: {
        const double lhs = (std::numbers::sqrt2 - 1.0) * std::sqrt(2.0 * consts.c2 * std::log(dp));
        if (!(lhs > std::sqrt(std::numbers::pi)))
            throw data_error(
                "corollary_lambda: condition (sqrt(2)-1)*sqrt(2*c2*log p) > sqrt(pi) violated");
        if (n < 3) throw data_error("corollary_lambda: group formula needs n >= 3");
        return consts.c * std::sqrt(4.0 * consts.c2 * std::log(dp) / (dn - 2.0)) +
               consts.c * std::sqrt(dq / dn);
    }
    case PenaltyKind::Nuclear: {
        const double lhs = (std::numbers::sqrt2 - 1.0) * x_spectral_norm *
                           std::sqrt(2.0 * std::log(7.0 + consts.c3) * (dp + dq));
        if (!(lhs > std::sqrt(dn * std::numbers::pi)))
            throw data_error("corollary_lambda: condition (sqrt(2)-1)*||X||*sqrt(2*log(7+c3)*(p+q)) "
                             "> sqrt(n*pi) violated");
        if (n < 3) throw data_error("corollary_lambda: nuclear formula needs n >= 3");
        return 4.0 * consts.c * x_spectral_norm / std::sqrt(dn) *
               (std::sqrt(consts.c4() * (dp + dq) / (dn - 2.0)) + 1.0 / std::sqrt(dn));
    }
    }
    throw data_error("corollary_lambda: unknown kind");
}

double lambda_max(const Dataset& data, PenaltyKind kind) {
    const ThinSvd s = thin_svd(data.y);
    if (s.d.front() <= 0.0) return 0.0;
    // keep only singular vectors with positive singular values so a
    // rank-deficient Y does not inject arbitrary null-space directions
    std::size_t r = 0;
    while (r < s.d.size() && s.d[r] > 1e-12 * s.d.front()) ++r;
    Mat ur(s.u.rows(), r), vr(s.v.rows(), r);
    for (std::size_t i = 0; i < s.u.rows(); ++i)
        for (std::size_t j = 0; j < r; ++j) ur(i, j) = s.u(i, j);
    for (std::size_t i = 0; i < s.v.rows(); ++i)
        for (std::size_t j = 0; j < r; ++j) vr(i, j) = s.v(i, j);
    const Mat uv = tcrossprod(ur, vr);
    return dual_norm(kind, crossprod(data.x, uv)) / std::sqrt(static_cast<double>(data.n()));
}

std::vector<double> default_lambda_grid(double lmax, std::size_t count, double min_ratio) {
    if (lmax <= 0.0) throw data_error("default_lambda_grid: lambda_max must be positive");
    if (count == 0) throw data_error("default_lambda_grid: empty grid requested");
    if (!(min_ratio > 0.0 && min_ratio < 1.0))
        throw data_error("default_lambda_grid: min_ratio must lie in (0,1)");
    std::vector<double> grid(count);
    grid[0] = lmax;
    if (count == 1) return grid;
    const double log_max = std::log(lmax);
    const double log_min = std::log(lmax * min_ratio);
    for (std::size_t i = 1; i < count; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(count - 1);
        grid[i] = std::exp(log_max + t * (log_min - log_max));
    }
    return grid;
}

namespace {

Mat take_rows(const Mat& m, const std::vector<std::size_t>& rows) {
    Mat out(rows.size(), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(rows[i], j);
    return out;
}

} // namespace

PathResult cross_validate(const Dataset& data, PenaltyKind kind,
                          const std::vector<double>& lambdas, std::size_t folds,
                          std::uint64_t seed, const SolverConfigs& cfgs,
                          const std::vector<std::size_t>* fold_assignment) {
    const std::size_t n = data.n();
    if (folds < 2) throw data_error("cross_validate: need at least 2 folds");
    if (folds > n) throw data_error("cross_validate: more folds than rows");
    if (lambdas.empty()) throw data_error("cross_validate: empty lambda grid");

    std::vector<std::size_t> assignment;
    if (fold_assignment != nullptr) {
        if (fold_assignment->size() != n)
            throw data_error("cross_validate: fold assignment length mismatch");
        assignment = *fold_assignment;
    } else {
        std::vector<std::size_t> perm(n);
        for (std::size_t i = 0; i < n; ++i) perm[i] = i;
        Rng rng = Rng::derive(seed, 0x666f6c64); // "fold"
        for (std::size_t i = n; i > 1; --i)
            std::swap(perm[i - 1], perm[rng.uniform_index(i)]);
        assignment.resize(n);
        for (std::size_t i = 0; i < n; ++i) assignment[perm[i]] = i % folds;
    }

    for (std::size_t f = 0; f < folds; ++f) {
        std::size_t train_rows = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (assignment[i] != f) ++train_rows;
        if (train_rows < 2)
            throw data_error("cross_validate: fold " + std::to_string(f) +
                             " leaves fewer than 2 training rows");
    }

    PathResult result;
    result.lambdas = lambdas;
    result.fits = hybrid_path_fit(data, kind, lambdas, cfgs.admm, cfgs.apgd);

    const std::size_t L = lambdas.size();
    std::vector<std::vector<double>> fold_err(folds, std::vector<double>(L, 0.0));

    const std::int64_t fcount = static_cast<std::int64_t>(folds);
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t ff = 0; ff < fcount; ++ff) {
        const std::size_t f = static_cast<std::size_t>(ff);
        std::vector<std::size_t> train_idx, val_idx;
        for (std::size_t i = 0; i < n; ++i)
            (assignment[i] == f ? val_idx : train_idx).push_back(i);

        const Dataset train = center_and_normalize(take_rows(data.y, train_idx),
                                                   take_rows(data.x, train_idx),
                                                   data.normalized);
        // held-out rows mapped through the training statistics
        Mat xv = take_rows(data.x, val_idx);
        Mat yv = take_rows(data.y, val_idx);
        for (std::size_t i = 0; i < xv.rows(); ++i) {
            for (std::size_t j = 0; j < xv.cols(); ++j)
                xv(i, j) = (xv(i, j) - train.x_means[j]) * train.column_scales[j];
            for (std::size_t j = 0; j < yv.cols(); ++j) yv(i, j) -= train.y_means[j];
        }

        const std::vector<FitResult> path =
            hybrid_path_fit(train, kind, lambdas, cfgs.admm, cfgs.apgd);
        const double denom = static_cast<double>(val_idx.size()) * static_cast<double>(yv.cols());
        for (std::size_t l = 0; l < L; ++l) {
            const Mat pred = matmul(xv, path[l].b_hat);
            fold_err[f][l] = frob_norm_sq(sub(yv, pred)) / denom;
        }
    }

    result.cv.resize(L);
    for (std::size_t l = 0; l < L; ++l) {
        double mean = 0.0;
        for (std::size_t f = 0; f < folds; ++f) mean += fold_err[f][l];
        mean /= static_cast<double>(folds);
        double var = 0.0;
        for (std::size_t f = 0; f < folds; ++f) {
            const double d = fold_err[f][l] - mean;
            var += d * d;
        }
        var /= folds > 1 ? static_cast<double>(folds - 1) : 1.0;
        result.cv[l] = {mean, std::sqrt(var / static_cast<double>(folds))};
    }

    result.best_index = 0;
    for (std::size_t l = 1; l < L; ++l)
        if (result.cv[l].mean < result.cv[result.best_index].mean) result.best_index = l;
    const double cutoff =
        result.cv[result.best_index].mean + result.cv[result.best_index].std_error;
    result.one_se_index = result.best_index;
    for (std::size_t l = 0; l <= result.best_index; ++l)
        if (result.cv[l].mean <= cutoff) { result.one_se_index = l; break; }
    return result;
}

} // namespace msrl
