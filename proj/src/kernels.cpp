#include "msrl/kernels.hpp"

#include <cmath>
#include <cstdint>
#include <cstdlib>

#include <omp.h>

#include "msrl/errors.hpp"

namespace msrl {
namespace kernels {

namespace {

void check_mul(std::size_t inner_a, std::size_t inner_b, const char* what) {
    if (inner_a != inner_b)
        throw data_error(std::string(what) + ": inner dimensions disagree (" +
                         std::to_string(inner_a) + " vs " + std::to_string(inner_b) + ")");
}

// Below this many multiply-adds the OpenMP fork costs more than it saves.
constexpr std::uint64_t kParallelCutoff = 1u << 15;

inline void matmul_row(const Mat& a, const Mat& b, Mat& c, std::size_t i) {
    const std::size_t k = a.cols(), n = b.cols();
    double* ci = c.row(i);
    const double* ai = a.row(i);
    for (std::size_t t = 0; t < k; ++t) {
        const double ait = ai[t];
        const double* bt = b.row(t);
        for (std::size_t j = 0; j < n; ++j) ci[j] += ait * bt[j];
    }
}

inline void crossprod_row(const Mat& a, const Mat& b, Mat& c, std::size_t i) {
    // c(i, .) = sum_r a(r, i) * b(r, .)
    const std::size_t k = a.rows(), n = b.cols();
    double* ci = c.row(i);
    for (std::size_t r = 0; r < k; ++r) {
        const double ari = a(r, i);
        const double* br = b.row(r);
        for (std::size_t j = 0; j < n; ++j) ci[j] += ari * br[j];
    }
}

inline void tcrossprod_row(const Mat& a, const Mat& b, Mat& c, std::size_t i) {
    const std::size_t k = a.cols(), n = b.rows();
    const double* ai = a.row(i);
    double* ci = c.row(i);
    for (std::size_t j = 0; j < n; ++j) {
        const double* bj = b.row(j);
        double acc = 0.0;
        for (std::size_t t = 0; t < k; ++t) acc += ai[t] * bj[t];
        ci[j] = acc;
    }
}

} // namespace

namespace serial {

Mat matmul(const Mat& a, const Mat& b) {
    check_mul(a.cols(), b.rows(), "matmul");
    Mat c(a.rows(), b.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) matmul_row(a, b, c, i);
    return c;
}

Mat crossprod(const Mat& a, const Mat& b) {
    check_mul(a.rows(), b.rows(), "crossprod");
    Mat c(a.cols(), b.cols(), 0.0);
    for (std::size_t i = 0; i < a.cols(); ++i) crossprod_row(a, b, c, i);
    return c;
}

Mat tcrossprod(const Mat& a, const Mat& b) {
    check_mul(a.cols(), b.cols(), "tcrossprod");
    Mat c(a.rows(), b.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) tcrossprod_row(a, b, c, i);
    return c;
}

void soft_threshold(const Mat& a, double t, Mat& out) {
    out = Mat(a.rows(), a.cols());
    const double* src = a.data();
    double* dst = out.data();
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double v = src[i];
        const double m = std::abs(v) - t;
        dst[i] = m > 0.0 ? (v > 0.0 ? m : -m) : 0.0;
    }
}

void scale_rows_group(const Mat& a, double t, Mat& out) {
    out = Mat(a.rows(), a.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* ai = a.row(i);
        double nrm = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) nrm += ai[j] * ai[j];
        nrm = std::sqrt(nrm);
        if (nrm <= t) continue; // zero row stays zero, no division
        const double s = 1.0 - t / nrm;
        double* oi = out.row(i);
        for (std::size_t j = 0; j < a.cols(); ++j) oi[j] = s * ai[j];
    }
}

} // namespace serial

Mat matmul(const Mat& a, const Mat& b) {
    check_mul(a.cols(), b.rows(), "matmul");
    const std::uint64_t work =
        std::uint64_t(a.rows()) * a.cols() * b.cols();
    if (work < kParallelCutoff) return serial::matmul(a, b);
    Mat c(a.rows(), b.cols(), 0.0);
    const std::int64_t m = static_cast<std::int64_t>(a.rows());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < m; ++i) matmul_row(a, b, c, static_cast<std::size_t>(i));
    return c;
}

Mat crossprod(const Mat& a, const Mat& b) {
    check_mul(a.rows(), b.rows(), "crossprod");
    const std::uint64_t work =
        std::uint64_t(a.cols()) * a.rows() * b.cols();
    if (work < kParallelCutoff) return serial::crossprod(a, b);
    Mat c(a.cols(), b.cols(), 0.0);
    const std::int64_t m = static_cast<std::int64_t>(a.cols());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < m; ++i) crossprod_row(a, b, c, static_cast<std::size_t>(i));
    return c;
}

Mat tcrossprod(const Mat& a, const Mat& b) {
    check_mul(a.cols(), b.cols(), "tcrossprod");
    const std::uint64_t work =
        std::uint64_t(a.rows()) * a.cols() * b.rows();
    if (work < kParallelCutoff) return serial::tcrossprod(a, b);
    Mat c(a.rows(), b.rows(), 0.0);
    const std::int64_t m = static_cast<std::int64_t>(a.rows());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < m; ++i) tcrossprod_row(a, b, c, static_cast<std::size_t>(i));
    return c;
}

void soft_threshold(const Mat& a, double t, Mat& out) {
    if (a.size() < kParallelCutoff) { serial::soft_threshold(a, t, out); return; }
    out = Mat(a.rows(), a.cols());
    const double* src = a.data();
    double* dst = out.data();
    const std::int64_t n = static_cast<std::int64_t>(a.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const double v = src[i];
        const double m = std::abs(v) - t;
        dst[i] = m > 0.0 ? (v > 0.0 ? m : -m) : 0.0;
    }
}

void scale_rows_group(const Mat& a, double t, Mat& out) {
    if (a.size() < kParallelCutoff) { serial::scale_rows_group(a, t, out); return; }
    out = Mat(a.rows(), a.cols(), 0.0);
    const std::int64_t m = static_cast<std::int64_t>(a.rows());
#pragma omp parallel for schedule(static)
    for (std::int64_t ii = 0; ii < m; ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        const double* ai = a.row(i);
        double nrm = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) nrm += ai[j] * ai[j];
        nrm = std::sqrt(nrm);
        if (nrm <= t) continue;
        const double s = 1.0 - t / nrm;
        double* oi = out.row(i);
        for (std::size_t j = 0; j < a.cols(); ++j) oi[j] = s * ai[j];
    }
}

double frob_norm_sq(const Mat& a) {
    double acc = 0.0;
    const double* p = a.data();
    for (std::size_t i = 0; i < a.size(); ++i) acc += p[i] * p[i];
    return acc;
}

double frob_norm(const Mat& a) { return std::sqrt(frob_norm_sq(a)); }

double dot(const Mat& a, const Mat& b) {
    if (!a.same_shape(b)) throw data_error("dot: shape mismatch");
    double acc = 0.0;
    const double* pa = a.data();
    const double* pb = b.data();
    for (std::size_t i = 0; i < a.size(); ++i) acc += pa[i] * pb[i];
    return acc;
}

double max_abs(const Mat& a) {
    double m = 0.0;
    const double* p = a.data();
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(p[i]));
    return m;
}

std::vector<double> row_norms(const Mat& a) {
    std::vector<double> out(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* ai = a.row(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) acc += ai[j] * ai[j];
        out[i] = std::sqrt(acc);
    }
    return out;
}

double trace(const Mat& a) {
    const std::size_t s = std::min(a.rows(), a.cols());
    double acc = 0.0;
    for (std::size_t i = 0; i < s; ++i) acc += a(i, i);
    return acc;
}

Mat add(const Mat& a, const Mat& b) { return lin_comb(1.0, a, 1.0, b); }
Mat sub(const Mat& a, const Mat& b) { return lin_comb(1.0, a, -1.0, b); }

Mat scaled(const Mat& a, double s) {
    Mat c(a.rows(), a.cols());
    const double* pa = a.data();
    double* pc = c.data();
    for (std::size_t i = 0; i < a.size(); ++i) pc[i] = s * pa[i];
    return c;
}

Mat lin_comb(double alpha, const Mat& a, double beta, const Mat& b) {
    if (!a.same_shape(b)) throw data_error("lin_comb: shape mismatch");
    Mat c(a.rows(), a.cols());
    const double* pa = a.data();
    const double* pb = b.data();
    double* pc = c.data();
    for (std::size_t i = 0; i < a.size(); ++i) pc[i] = alpha * pa[i] + beta * pb[i];
    return c;
}

} // namespace kernels

namespace {
int g_threads = -1; // -1: not yet initialized
}

void set_threads(int n) {
    if (n > 0) {
        g_threads = n;
        omp_set_num_threads(n);
    } else {
        g_threads = 0;
    }
}

int effective_threads() {
    if (g_threads == -1) {
        const char* env = std::getenv("MSRL_THREADS");
        if (env != nullptr) {
            const int n = std::atoi(env);
            set_threads(n > 0 ? n : 0);
        } else {
            g_threads = 0;
        }
    }
    return g_threads > 0 ? g_threads : omp_get_max_threads();
}

} // namespace msrl
