#pragma once

#include <vector>

#include "msrl/mat.hpp"

namespace msrl {

/// Thin singular value decomposition a = u * diag(d) * v'.
/// u is a-by-s, v is b-by-s, s = min(a.rows, a.cols); d is non-increasing.
/// Signs are fixed so the largest-magnitude entry of each column of u is
/// positive (ties broken by the first occurrence).
struct ThinSvd {
    Mat u;
    std::vector<double> d;
    Mat v;
};

ThinSvd thin_svd(const Mat& a);

double nuclear_norm(const Mat& a);
double spectral_norm(const Mat& a);

/// Eigendecomposition of a symmetric matrix, eigenvalues descending.
struct SymEig {
    Mat vectors; // column j is the eigenvector of values[j]
    std::vector<double> values;
};

SymEig eig_sym(const Mat& a);

/// Solve a * x = b for symmetric positive (semi-)definite a via LDLT.
Mat solve_sym(const Mat& a, const Mat& b);

/// Thin QR: the orthonormal factor and the diagonal of R (for Haar sign
/// correction of random orthogonal draws).
struct QrFactor {
    Mat q;
    std::vector<double> r_diag;
};

QrFactor qr_thin(const Mat& a);

/// u * diag(d) * v' for a ThinSvd triple (shared by tests and prox code).
Mat svd_reconstruct(const ThinSvd& s);

} // namespace msrl
