#pragma once

#include <vector>

#include "msrl/mat.hpp"

namespace msrl {
namespace kernels {

// Serial reference kernels. These are the ground truth the OpenMP variants
// are tested against; they accumulate each output entry in the same index
// order as the parallel versions so results agree to the last bit.
namespace serial {

Mat matmul(const Mat& a, const Mat& b);       // a (m x k) * b (k x n)
Mat crossprod(const Mat& a, const Mat& b);    // a' * b,  a (k x m), b (k x n)
Mat tcrossprod(const Mat& a, const Mat& b);   // a * b',  a (m x k), b (n x k)
void soft_threshold(const Mat& a, double t, Mat& out);
void scale_rows_group(const Mat& a, double t, Mat& out); // group-lasso prox rows

} // namespace serial

// OpenMP kernels; identical contracts and per-entry accumulation order.
Mat matmul(const Mat& a, const Mat& b);
Mat crossprod(const Mat& a, const Mat& b);
Mat tcrossprod(const Mat& a, const Mat& b);
void soft_threshold(const Mat& a, double t, Mat& out);
void scale_rows_group(const Mat& a, double t, Mat& out);

// Reductions and elementwise helpers. Kept serial: their cost is linear and
// a fixed summation order keeps every output reproducible across --threads.
double frob_norm_sq(const Mat& a);
double frob_norm(const Mat& a);
double dot(const Mat& a, const Mat& b);
double max_abs(const Mat& a);
std::vector<double> row_norms(const Mat& a);
double trace(const Mat& a);

Mat add(const Mat& a, const Mat& b);
Mat sub(const Mat& a, const Mat& b);
Mat scaled(const Mat& a, double s);
// out = alpha*a + beta*b
Mat lin_comb(double alpha, const Mat& a, double beta, const Mat& b);

} // namespace kernels

using kernels::matmul;
using kernels::crossprod;
using kernels::tcrossprod;
using kernels::frob_norm;
using kernels::frob_norm_sq;
using kernels::dot;
using kernels::max_abs;
using kernels::row_norms;
using kernels::trace;
using kernels::add;
using kernels::sub;
using kernels::scaled;
using kernels::lin_comb;

/// Worker pool size for parallel regions; 0 keeps the OpenMP default.
/// Looks at the MSRL_THREADS environment variable once at first use.
void set_threads(int n);
int effective_threads();

} // namespace msrl
