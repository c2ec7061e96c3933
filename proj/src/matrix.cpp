#include "lsemix/matrix.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#if defined(__AVX512F__)
#include <immintrin.h>
#endif

namespace lsemix {

namespace {

std::string shape_str(const Matrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

} // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, const std::vector<double>& data)
    : rows_(rows), cols_(cols), data_(data.begin(), data.end()) {
    if (data_.size() != rows_ * cols_) {
        throw std::invalid_argument("Matrix: data length " + std::to_string(data_.size()) +
                                    " does not equal " + std::to_string(rows_) + "x" +
                                    std::to_string(cols_));
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

bool Matrix::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw std::invalid_argument("matmul: dimension mismatch " + shape_str(a) + " * " +
                                    shape_str(b));
    }
    // Accumulate row_i(a) scaled into rows of the output; contiguous reads
    // of b's rows keep this order cache-friendly and vectorizable.
    Matrix c(a.rows(), b.cols());
    const std::size_t n = b.cols();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* ai = a.row(i);
        double* ci = c.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            axpy(ci, ai[k], b.row(k), n);
        }
    }
    return c;
}

#if defined(__AVX512F__)

namespace {

// Dot product with four independent FMA chains; fixed combine order.
double dot_simd(const double* a, const double* b, std::size_t n) {
    __m512d s0 = _mm512_setzero_pd(), s1 = _mm512_setzero_pd();
    __m512d s2 = _mm512_setzero_pd(), s3 = _mm512_setzero_pd();
    std::size_t k = 0;
    for (; k + 32 <= n; k += 32) {
        s0 = _mm512_fmadd_pd(_mm512_loadu_pd(a + k), _mm512_loadu_pd(b + k), s0);
        s1 = _mm512_fmadd_pd(_mm512_loadu_pd(a + k + 8), _mm512_loadu_pd(b + k + 8), s1);
        s2 = _mm512_fmadd_pd(_mm512_loadu_pd(a + k + 16), _mm512_loadu_pd(b + k + 16), s2);
        s3 = _mm512_fmadd_pd(_mm512_loadu_pd(a + k + 24), _mm512_loadu_pd(b + k + 24), s3);
    }
    for (; k + 8 <= n; k += 8) {
        s0 = _mm512_fmadd_pd(_mm512_loadu_pd(a + k), _mm512_loadu_pd(b + k), s0);
    }
    double t = _mm512_reduce_add_pd(_mm512_add_pd(_mm512_add_pd(s0, s1), _mm512_add_pd(s2, s3)));
    for (; k < n; ++k) t += a[k] * b[k];
    return t;
}

// c[i][j] = <a_i, b_j> over 4x4 register tiles; rows beyond the tile
// grid fall back to single dots.
void matmul_nt_kernel(const Matrix& a, const Matrix& b, Matrix& c) {
    const std::size_t M = a.rows(), N = b.rows(), n = a.cols();
    std::size_t i = 0;
    for (; i + 4 <= M; i += 4) {
        const double* a0 = a.row(i);
        const double* a1 = a.row(i + 1);
        const double* a2 = a.row(i + 2);
        const double* a3 = a.row(i + 3);
        std::size_t j = 0;
        for (; j + 4 <= N; j += 4) {
            const double* b0 = b.row(j);
            const double* b1 = b.row(j + 1);
            const double* b2 = b.row(j + 2);
            const double* b3 = b.row(j + 3);
            __m512d s[4][4];
            for (auto& r : s)
                for (auto& v : r) v = _mm512_setzero_pd();
            std::size_t k = 0;
            for (; k + 8 <= n; k += 8) {
                const __m512d bv0 = _mm512_loadu_pd(b0 + k);
                const __m512d bv1 = _mm512_loadu_pd(b1 + k);
                const __m512d bv2 = _mm512_loadu_pd(b2 + k);
                const __m512d bv3 = _mm512_loadu_pd(b3 + k);
                __m512d av = _mm512_loadu_pd(a0 + k);
                s[0][0] = _mm512_fmadd_pd(av, bv0, s[0][0]);
                s[0][1] = _mm512_fmadd_pd(av, bv1, s[0][1]);
                s[0][2] = _mm512_fmadd_pd(av, bv2, s[0][2]);
                s[0][3] = _mm512_fmadd_pd(av, bv3, s[0][3]);
                av = _mm512_loadu_pd(a1 + k);
                s[1][0] = _mm512_fmadd_pd(av, bv0, s[1][0]);
                s[1][1] = _mm512_fmadd_pd(av, bv1, s[1][1]);
                s[1][2] = _mm512_fmadd_pd(av, bv2, s[1][2]);
                s[1][3] = _mm512_fmadd_pd(av, bv3, s[1][3]);
                av = _mm512_loadu_pd(a2 + k);
                s[2][0] = _mm512_fmadd_pd(av, bv0, s[2][0]);
                s[2][1] = _mm512_fmadd_pd(av, bv1, s[2][1]);
                s[2][2] = _mm512_fmadd_pd(av, bv2, s[2][2]);
                s[2][3] = _mm512_fmadd_pd(av, bv3, s[2][3]);
                av = _mm512_loadu_pd(a3 + k);
                s[3][0] = _mm512_fmadd_pd(av, bv0, s[3][0]);
                s[3][1] = _mm512_fmadd_pd(av, bv1, s[3][1]);
                s[3][2] = _mm512_fmadd_pd(av, bv2, s[3][2]);
                s[3][3] = _mm512_fmadd_pd(av, bv3, s[3][3]);
            }
            const double* ar[4] = {a0, a1, a2, a3};
            const double* br[4] = {b0, b1, b2, b3};
            for (int p = 0; p < 4; ++p) {
                for (int q = 0; q < 4; ++q) {
                    double t = _mm512_reduce_add_pd(s[p][q]);
                    for (std::size_t kk = k; kk < n; ++kk) t += ar[p][kk] * br[q][kk];
                    c(i + p, j + q) = t;
                }
            }
        }
        for (; j < N; ++j) {
            c(i + 0, j) = dot_simd(a0, b.row(j), n);
            c(i + 1, j) = dot_simd(a1, b.row(j), n);
            c(i + 2, j) = dot_simd(a2, b.row(j), n);
            c(i + 3, j) = dot_simd(a3, b.row(j), n);
        }
    }
    for (; i < M; ++i) {
        const double* ai = a.row(i);
        for (std::size_t j = 0; j < N; ++j) c(i, j) = dot_simd(ai, b.row(j), n);
    }
}

// c[j][d] = sum_i a[i][j] * b[i][d], accumulated 4 columns x 16 outputs
// at a time so the sums live in registers across the i loop.
void matmul_tn_kernel(const Matrix& a, const Matrix& b, Matrix& c) {
    const std::size_t B = a.rows(), K = a.cols(), D = b.cols();
    const double* ap = a.data();
    std::size_t j = 0;
    for (; j + 4 <= K; j += 4) {
        std::size_t d = 0;
        for (; d + 16 <= D; d += 16) {
            __m512d acc[4][2];
            for (auto& r : acc)
                for (auto& v : r) v = _mm512_setzero_pd();
            for (std::size_t i = 0; i < B; ++i) {
                const double* bi = b.row(i) + d;
                const __m512d x0 = _mm512_loadu_pd(bi);
                const __m512d x1 = _mm512_loadu_pd(bi + 8);
                const double* gi = ap + i * K + j;
                __m512d g = _mm512_set1_pd(gi[0]);
                acc[0][0] = _mm512_fmadd_pd(g, x0, acc[0][0]);
                acc[0][1] = _mm512_fmadd_pd(g, x1, acc[0][1]);
                g = _mm512_set1_pd(gi[1]);
                acc[1][0] = _mm512_fmadd_pd(g, x0, acc[1][0]);
                acc[1][1] = _mm512_fmadd_pd(g, x1, acc[1][1]);
                g = _mm512_set1_pd(gi[2]);
                acc[2][0] = _mm512_fmadd_pd(g, x0, acc[2][0]);
                acc[2][1] = _mm512_fmadd_pd(g, x1, acc[2][1]);
                g = _mm512_set1_pd(gi[3]);
                acc[3][0] = _mm512_fmadd_pd(g, x0, acc[3][0]);
                acc[3][1] = _mm512_fmadd_pd(g, x1, acc[3][1]);
            }
            for (int p = 0; p < 4; ++p) {
                _mm512_storeu_pd(c.row(j + p) + d, acc[p][0]);
                _mm512_storeu_pd(c.row(j + p) + d + 8, acc[p][1]);
            }
        }
        for (; d < D; ++d) {
            double t0 = 0, t1 = 0, t2 = 0, t3 = 0;
            for (std::size_t i = 0; i < B; ++i) {
                const double x = b(i, d);
                const double* gi = ap + i * K + j;
                t0 += gi[0] * x;
                t1 += gi[1] * x;
                t2 += gi[2] * x;
                t3 += gi[3] * x;
            }
            c(j + 0, d) = t0;
            c(j + 1, d) = t1;
            c(j + 2, d) = t2;
            c(j + 3, d) = t3;
        }
    }
    for (; j < K; ++j) {
        for (std::size_t d = 0; d < D; ++d) {
            double t = 0;
            for (std::size_t i = 0; i < B; ++i) t += ap[i * K + j] * b(i, d);
            c(j, d) = t;
        }
    }
}

} // namespace

#endif // __AVX512F__

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) {
        throw std::invalid_argument("matmul_nt: dimension mismatch " + shape_str(a) + " * (" +
                                    shape_str(b) + ")^T");
    }
    Matrix c(a.rows(), b.rows());
#if defined(__AVX512F__)
    matmul_nt_kernel(a, b, c);
#else
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* ai = a.row(i);
        double* ci = c.row(i);
        for (std::size_t j = 0; j < b.rows(); ++j) {
            ci[j] = dot(ai, b.row(j), a.cols());
        }
    }
#endif
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) {
        throw std::invalid_argument("matmul_tn: dimension mismatch (" + shape_str(a) + ")^T * " +
                                    shape_str(b));
    }
    Matrix c(a.cols(), b.cols());
#if defined(__AVX512F__)
    matmul_tn_kernel(a, b, c);
#else
    const std::size_t n = b.cols();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* ai = a.row(i);
        const double* bi = b.row(i);
        for (std::size_t j = 0; j < a.cols(); ++j) {
            axpy(c.row(j), ai[j], bi, n);
        }
    }
#endif
    return c;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            t(j, i) = a(i, j);
        }
    }
    return t;
}

double logsumexp_neg(const double* d, std::size_t n) {
    if (n == 0) throw std::invalid_argument("logsumexp_neg: empty vector");
    double m = d[0];
    for (std::size_t j = 1; j < n; ++j) {
        if (d[j] < m) m = d[j];
    }
    // exp(-d_j) = exp(-m) * exp(m - d_j) with m - d_j <= 0
    double t = 0.0;
    for (std::size_t j = 0; j < n; ++j) t += std::exp(m - d[j]);
    return m - std::log(t);
}

double logsumexp_neg(const std::vector<double>& d) {
    return logsumexp_neg(d.data(), d.size());
}

void softmax_neg(const double* d, double* r, std::size_t n) {
    if (n == 0) throw std::invalid_argument("softmax_neg: empty vector");
    double m = d[0];
    for (std::size_t j = 1; j < n; ++j) {
        if (d[j] < m) m = d[j];
    }
    double t = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        r[j] = std::exp(m - d[j]);
        t += r[j];
    }
    const double inv = 1.0 / t;
    for (std::size_t j = 0; j < n; ++j) r[j] *= inv;
}

std::vector<double> softmax_neg(const std::vector<double>& d) {
    std::vector<double> r(d.size());
    softmax_neg(d.data(), r.data(), d.size());
    return r;
}

ColumnStats column_stats(const Matrix& a) {
    if (a.rows() < 2) {
        throw std::invalid_argument("column_stats: requires at least 2 rows, got " +
                                    std::to_string(a.rows()));
    }
    const std::size_t n = a.rows();
    const std::size_t k = a.cols();
    ColumnStats s;
    s.mean.assign(k, 0.0);
    s.var.assign(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* ri = a.row(i);
        for (std::size_t j = 0; j < k; ++j) s.mean[j] += ri[j];
    }
    const double invn = 1.0 / static_cast<double>(n);
    for (std::size_t j = 0; j < k; ++j) s.mean[j] *= invn;
    for (std::size_t i = 0; i < n; ++i) {
        const double* ri = a.row(i);
        for (std::size_t j = 0; j < k; ++j) {
            const double c = ri[j] - s.mean[j];
            s.var[j] += c * c;
        }
    }
    for (std::size_t j = 0; j < k; ++j) s.var[j] *= invn;
    return s;
}

Matrix correlation_matrix(const Matrix& a, double eps) {
    if (a.rows() < 2) {
        throw std::invalid_argument("correlation_matrix: requires at least 2 rows, got " +
                                    std::to_string(a.rows()));
    }
    if (!(eps > 0.0)) throw std::invalid_argument("correlation_matrix: requires eps > 0");
    const std::size_t n = a.rows();
    const std::size_t k = a.cols();
    ColumnStats s = column_stats(a);

    Matrix centered(n, k);
    for (std::size_t i = 0; i < n; ++i) {
        const double* ri = a.row(i);
        double* ci = centered.row(i);
        for (std::size_t j = 0; j < k; ++j) ci[j] = ri[j] - s.mean[j];
    }
    Matrix cov = matmul_tn(centered, centered); // k x k, scaled below
    const double invn = 1.0 / static_cast<double>(n);

    std::vector<double> inv_sd(k);
    for (std::size_t j = 0; j < k; ++j) inv_sd[j] = 1.0 / std::sqrt(s.var[j] + eps);

    Matrix corr(k, k);
    for (std::size_t p = 0; p < k; ++p) {
        for (std::size_t q = p; q < k; ++q) {
            const double c = cov(p, q) * invn * inv_sd[p] * inv_sd[q];
            corr(p, q) = c;
            corr(q, p) = c;
        }
    }
    return corr;
}

} // namespace lsemix
