#include "msrl/penalty.hpp"

#include <cmath>

#include "msrl/errors.hpp"
#include "msrl/kernels.hpp"
#include "msrl/linalg.hpp"

namespace msrl {

namespace {

// Singular values of b below this are treated as zero when the nuclear
// subdifferential is split into support and orthogonal parts.
constexpr double kNuclearSupportTol = 1e-10;

Mat take_cols(const Mat& m, std::size_t count) {
    Mat out(m.rows(), count);
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < count; ++j) out(i, j) = m(i, j);
    return out;
}

} // namespace

double penalty_value(PenaltyKind kind, const Mat& b) {
    switch (kind) {
    case PenaltyKind::L1: {
        double acc = 0.0;
        const double* p = b.data();
        for (std::size_t i = 0; i < b.size(); ++i) acc += std::abs(p[i]);
        return acc;
    }
    case PenaltyKind::GroupL1: {
        double acc = 0.0;
        for (double r : row_norms(b)) acc += r;
        return acc;
    }
    case PenaltyKind::Nuclear:
        return nuclear_norm(b);
    }
    throw data_error("penalty_value: unknown kind");
}

double dual_norm(PenaltyKind kind, const Mat& a) {
    switch (kind) {
    case PenaltyKind::L1:
        return max_abs(a);
    case PenaltyKind::GroupL1: {
        double m = 0.0;
        for (double r : row_norms(a)) m = std::max(m, r);
        return m;
    }
    case PenaltyKind::Nuclear:
        return spectral_norm(a);
    }
    throw data_error("dual_norm: unknown kind");
}

Mat prox(PenaltyKind kind, const Mat& a, double threshold) {
    if (threshold < 0.0) throw data_error("prox: negative threshold");
    if (threshold == 0.0) return a;
    Mat out;
    switch (kind) {
    case PenaltyKind::L1:
        kernels::soft_threshold(a, threshold, out);
        return out;
    case PenaltyKind::GroupL1:
        kernels::scale_rows_group(a, threshold, out);
        return out;
    case PenaltyKind::Nuclear: {
        ThinSvd s = thin_svd(a);
        for (double& d : s.d) d = std::max(d - threshold, 0.0);
        return svd_reconstruct(s);
    }
    }
    throw data_error("prox: unknown kind");
}

double subgradient_distance(PenaltyKind kind, const Mat& g, const Mat& b, double lambda) {
    if (!g.same_shape(b)) throw data_error("subgradient_distance: shape mismatch");
    switch (kind) {
    case PenaltyKind::L1: {
        double worst = 0.0;
        for (std::size_t i = 0; i < b.rows(); ++i)
            for (std::size_t j = 0; j < b.cols(); ++j) {
                const double bij = b(i, j);
                const double gij = g(i, j);
                const double viol = bij != 0.0
                    ? std::abs(gij - lambda * (bij > 0.0 ? 1.0 : -1.0))
                    : std::max(std::abs(gij) - lambda, 0.0);
                worst = std::max(worst, viol);
            }
        return worst;
    }
    case PenaltyKind::GroupL1: {
        double worst = 0.0;
        for (std::size_t i = 0; i < b.rows(); ++i) {
            double bn = 0.0, gn = 0.0;
            for (std::size_t j = 0; j < b.cols(); ++j) {
                bn += b(i, j) * b(i, j);
                gn += g(i, j) * g(i, j);
            }
            bn = std::sqrt(bn);
            if (bn > 0.0) {
                double diff = 0.0;
                for (std::size_t j = 0; j < b.cols(); ++j) {
                    const double d = g(i, j) - lambda * b(i, j) / bn;
                    diff += d * d;
                }
                worst = std::max(worst, std::sqrt(diff));
            } else {
                worst = std::max(worst, std::max(std::sqrt(gn) - lambda, 0.0));
            }
        }
        return worst;
    }
    case PenaltyKind::Nuclear: {
        const ThinSvd s = thin_svd(b);
        std::size_t r = 0;
        while (r < s.d.size() && s.d[r] > kNuclearSupportTol) ++r;
        if (r == 0) return std::max(spectral_norm(g) - lambda, 0.0);
        const Mat ur = take_cols(s.u, r);
        const Mat vr = take_cols(s.v, r);
        const Mat ug = crossprod(ur, g);          // r x q
        const Mat m = matmul(ug, vr);             // r x r
        double worst = 0.0;
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < r; ++j)
                worst = std::max(worst, std::abs(m(i, j) - (i == j ? lambda : 0.0)));
        const Mat c1 = sub(ug, tcrossprod(m, vr));        // U_r' G (I - V V')
        const Mat gv = matmul(g, vr);
        const Mat c2 = sub(gv, matmul(ur, m));            // (I - U U') G V_r
        worst = std::max(worst, max_abs(c1));
        worst = std::max(worst, max_abs(c2));
        // residual block orthogonal to both factors
        Mat w = sub(g, matmul(ur, ug));                   // (I - U U') G
        w = sub(w, tcrossprod(c2, vr));                   // minus (I-UU') G V V'
        worst = std::max(worst, std::max(spectral_norm(w) - lambda, 0.0));
        return worst;
    }
    }
    throw data_error("subgradient_distance: unknown kind");
}

PenaltyKind penalty_from_name(const std::string& name) {
    if (name == "lasso") return PenaltyKind::L1;
    if (name == "group") return PenaltyKind::GroupL1;
    if (name == "nuclear") return PenaltyKind::Nuclear;
    throw data_error("unknown penalty '" + name + "' (expected lasso|group|nuclear)");
}

const char* penalty_name(PenaltyKind kind) {
    switch (kind) {
    case PenaltyKind::L1: return "lasso";
    case PenaltyKind::GroupL1: return "group";
    case PenaltyKind::Nuclear: return "nuclear";
    }
    return "?";
}

} // namespace msrl
