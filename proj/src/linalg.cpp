#include "msrl/linalg.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "msrl/errors.hpp"
#include "msrl/kernels.hpp"

namespace msrl {

namespace {

using EMat = Eigen::MatrixXd;
using EMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                            Eigen::RowMajor>>;

EMat to_eigen(const Mat& m) {
    return EMap(m.data(), static_cast<Eigen::Index>(m.rows()),
                static_cast<Eigen::Index>(m.cols()));
}

Mat from_eigen(const EMat& e) {
    Mat m(static_cast<std::size_t>(e.rows()), static_cast<std::size_t>(e.cols()));
    for (Eigen::Index i = 0; i < e.rows(); ++i)
        for (Eigen::Index j = 0; j < e.cols(); ++j)
            m(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = e(i, j);
    return m;
}

void fix_signs(Mat& u, Mat& v) {
    const std::size_t s = u.cols();
    for (std::size_t j = 0; j < s; ++j) {
        std::size_t arg = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < u.rows(); ++i) {
            const double a = std::abs(u(i, j));
            if (a > best) { best = a; arg = i; }
        }
        if (u(arg, j) < 0.0) {
            for (std::size_t i = 0; i < u.rows(); ++i) u(i, j) = -u(i, j);
            for (std::size_t i = 0; i < v.rows(); ++i) v(i, j) = -v(i, j);
        }
    }
}

} // namespace

ThinSvd thin_svd(const Mat& a) {
    if (a.empty()) throw data_error("thin_svd: empty matrix");
    if (!a.all_finite()) throw data_error("thin_svd: non-finite entries");
    const EMat e = to_eigen(a);
    ThinSvd out;
    // Jacobi is the accuracy workhorse for the small factors this library
    // sees; divide-and-conquer takes over when both dimensions are large.
    const Eigen::Index s = std::min(e.rows(), e.cols());
    if (s <= 64) {
        Eigen::JacobiSVD<EMat> svd(e, Eigen::ComputeThinU | Eigen::ComputeThinV);
        if (svd.info() != Eigen::Success)
            throw numerical_error("thin_svd: Jacobi SVD did not converge within its sweep limit");
        out.u = from_eigen(svd.matrixU());
        out.v = from_eigen(svd.matrixV());
        out.d.assign(svd.singularValues().data(), svd.singularValues().data() + s);
    } else {
        Eigen::BDCSVD<EMat> svd(e, Eigen::ComputeThinU | Eigen::ComputeThinV);
        if (svd.info() != Eigen::Success)
            throw numerical_error("thin_svd: BDC SVD did not converge within its iteration limit");
        out.u = from_eigen(svd.matrixU());
        out.v = from_eigen(svd.matrixV());
        out.d.assign(svd.singularValues().data(), svd.singularValues().data() + s);
    }
    fix_signs(out.u, out.v);
    return out;
}

double nuclear_norm(const Mat& a) {
    const ThinSvd s = thin_svd(a);
    double acc = 0.0;
    for (double v : s.d) acc += v;
    return acc;
}

double spectral_norm(const Mat& a) {
    const ThinSvd s = thin_svd(a);
    return s.d.empty() ? 0.0 : s.d.front();
}

SymEig eig_sym(const Mat& a) {
    if (a.rows() != a.cols()) throw data_error("eig_sym: matrix not square");
    Eigen::SelfAdjointEigenSolver<EMat> es(to_eigen(a));
    if (es.info() != Eigen::Success)
        throw numerical_error("eig_sym: eigendecomposition failed");
    const Eigen::Index n = es.eigenvalues().size();
    SymEig out;
    out.values.resize(static_cast<std::size_t>(n));
    out.vectors = Mat(a.rows(), a.cols());
    // Eigen returns ascending order; flip to descending.
    for (Eigen::Index j = 0; j < n; ++j) {
        const Eigen::Index src = n - 1 - j;
        out.values[static_cast<std::size_t>(j)] = es.eigenvalues()(src);
        for (Eigen::Index i = 0; i < n; ++i)
            out.vectors(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) =
                es.eigenvectors()(i, src);
    }
    return out;
}

Mat solve_sym(const Mat& a, const Mat& b) {
    if (a.rows() != a.cols()) throw data_error("solve_sym: matrix not square");
    if (a.rows() != b.rows()) throw data_error("solve_sym: rhs shape mismatch");
    Eigen::LDLT<EMat> ldlt(to_eigen(a));
    if (ldlt.info() != Eigen::Success)
        throw numerical_error("solve_sym: LDLT factorization failed");
    return from_eigen(ldlt.solve(to_eigen(b)));
}

QrFactor qr_thin(const Mat& a) {
    if (a.rows() < a.cols()) throw data_error("qr_thin: need rows >= cols");
    Eigen::HouseholderQR<EMat> qr(to_eigen(a));
    const Eigen::Index n = static_cast<Eigen::Index>(a.cols());
    const EMat q = qr.householderQ() * EMat::Identity(static_cast<Eigen::Index>(a.rows()), n);
    QrFactor out;
    out.q = from_eigen(q);
    out.r_diag.resize(a.cols());
    const auto& r = qr.matrixQR();
    for (Eigen::Index j = 0; j < n; ++j)
        out.r_diag[static_cast<std::size_t>(j)] = r(j, j);
    return out;
}

Mat svd_reconstruct(const ThinSvd& s) {
    Mat ud = s.u;
    for (std::size_t i = 0; i < ud.rows(); ++i)
        for (std::size_t j = 0; j < ud.cols(); ++j) ud(i, j) *= s.d[j];
    return tcrossprod(ud, s.v);
}

} // namespace msrl
