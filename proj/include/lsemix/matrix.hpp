#pragma once

#include <cstddef>
#include <cstdlib>
#include <new>
#include <vector>

namespace lsemix {

// Cache-line aligned storage so the SIMD matmul kernels never split
// loads across lines.
template <typename T, std::size_t Align>
struct AlignedAlloc {
    using value_type = T;

    template <class U>
    struct rebind {
        using other = AlignedAlloc<U, Align>;
    };

    AlignedAlloc() = default;
    template <class U>
    AlignedAlloc(const AlignedAlloc<U, Align>&) {}

    T* allocate(std::size_t n) {
        const std::size_t bytes = (n * sizeof(T) + Align - 1) / Align * Align;
        void* p = std::aligned_alloc(Align, bytes);
        if (!p) throw std::bad_alloc();
        return static_cast<T*>(p);
    }
    void deallocate(T* p, std::size_t) { std::free(p); }

    template <class U>
    bool operator==(const AlignedAlloc<U, Align>&) const {
        return true;
    }
};

using AlignedVec = std::vector<double, AlignedAlloc<double, 64>>;

// Dense row-major matrix of doubles. The single numeric carrier for the
// whole project: batches, parameters, gradients, statistics.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols); // zero-filled
    Matrix(std::size_t rows, std::size_t cols, const std::vector<double>& data);

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* row(std::size_t i) { return data_.data() + i * cols_; }
    const double* row(std::size_t i) const { return data_.data() + i * cols_; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    bool all_finite() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    AlignedVec data_;
};

// Dot product with a fixed 8-lane summation order. Deterministic across
// runs; the lane structure is what gcc needs to vectorize without
// -ffast-math.
inline double dot(const double* a, const double* b, std::size_t n) {
    double lane[8] = {0, 0, 0, 0, 0, 0, 0, 0};
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        for (int j = 0; j < 8; ++j) lane[j] += a[i + j] * b[i + j];
    }
    double tail = 0.0;
    for (; i < n; ++i) tail += a[i] * b[i];
    return (((lane[0] + lane[1]) + (lane[2] + lane[3])) +
            ((lane[4] + lane[5]) + (lane[6] + lane[7]))) + tail;
}

// y += alpha * x
inline void axpy(double* y, double alpha, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

// The _nt/_tn products carry the training loop and are register-tiled
// AVX-512 kernels where the ISA allows, with a portable fallback. Every
// output element has one fixed summation order per shape, so results
// are bit-reproducible run to run.
Matrix matmul(const Matrix& a, const Matrix& b);    // a * b
Matrix matmul_nt(const Matrix& a, const Matrix& b); // a * b^T
Matrix matmul_tn(const Matrix& a, const Matrix& b); // a^T * b
Matrix transpose(const Matrix& a);

// -log sum_j exp(-d_j), shifted by min(d) so no exp overflows.
// Requires a nonempty vector.
double logsumexp_neg(const double* d, std::size_t n);
double logsumexp_neg(const std::vector<double>& d);

// r_j = exp(-d_j) / sum_k exp(-d_k), stable via the same min-shift.
void softmax_neg(const double* d, double* r, std::size_t n);
std::vector<double> softmax_neg(const std::vector<double>& d);

// Per-column mean and population variance (divide by rows).
// Requires rows >= 2.
struct ColumnStats {
    std::vector<double> mean;
    std::vector<double> var;
};
ColumnStats column_stats(const Matrix& a);

// Pearson correlation with an eps guard in each denominator:
// C(i,j) = cov(i,j) / (sqrt(var_i + eps) * sqrt(var_j + eps)).
// Constant columns therefore yield near-zero correlations instead of
// dividing by zero. Requires rows >= 2 and eps > 0.
Matrix correlation_matrix(const Matrix& a, double eps = 1e-8);

} // namespace lsemix
