#pragma once

#include "wavekernel/types.hpp"

#include <span>
#include <vector>

namespace wavekernel {

/// Matrix-valued samples on the triangular lattice {(i, j) : 0 <= i <= j <= m}.
///
/// Node (i, j) stands for (xi, eta) = (i h, j h). Each node holds an n x n
/// matrix stored row-major and contiguously, rows of the triangle are packed
/// one after another.
class TriangleField {
public:
    TriangleField() = default;
    TriangleField(std::size_t m, std::size_t n);

    std::size_t size() const { return m_; }
    std::size_t dimension() const { return n_; }
    std::size_t node_count() const { return (m_ + 1) * (m_ + 2) / 2; }

    std::size_t index(std::size_t i, std::size_t j) const {
        return i * (m_ + 1) - i * (i - 1) / 2 + (j - i);
    }

    cplx* data(std::size_t i, std::size_t j) { return storage_.data() + index(i, j) * n_ * n_; }
    const cplx* data(std::size_t i, std::size_t j) const {
        return storage_.data() + index(i, j) * n_ * n_;
    }

    MatrixView view(std::size_t i, std::size_t j) {
        return MatrixView(data(i, j), static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
    }
    ConstMatrixView view(std::size_t i, std::size_t j) const {
        return ConstMatrixView(data(i, j), static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
    }
    Matrix matrix(std::size_t i, std::size_t j) const { return view(i, j); }
    void set(std::size_t i, std::size_t j, const Matrix& value) { view(i, j) = value; }

    std::span<const cplx> raw() const { return storage_; }
    std::span<cplx> raw() { return storage_; }

    /// Largest entrywise-operator-norm difference max_{nodes} ||a - b||.
    friend double max_distance(const TriangleField& a, const TriangleField& b);

private:
    std::size_t m_ = 0;
    std::size_t n_ = 0;
    std::vector<cplx> storage_;
};

namespace detail {

// dst += alpha * a * b for n x n row-major blocks
inline void mul_add(cplx* dst, const cplx* a, const cplx* b, std::size_t n, cplx alpha) {
    if (n == 1) {
        dst[0] += alpha * a[0] * b[0];
        return;
    }
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t k = 0; k < n; ++k) {
            const cplx ark = alpha * a[r * n + k];
            for (std::size_t c = 0; c < n; ++c) dst[r * n + c] += ark * b[k * n + c];
        }
    }
}

// dst += alpha * src over count entries
inline void axpy(cplx* dst, const cplx* src, std::size_t count, cplx alpha) {
    for (std::size_t k = 0; k < count; ++k) dst[k] += alpha * src[k];
}

double block_norm(const cplx* a, std::size_t n);

}  // namespace detail

}  // namespace wavekernel
