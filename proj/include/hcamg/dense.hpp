/// @file dense.hpp
/// @brief Small row-major dense matrices and the Householder QR used for per-edge constraint blocks.

#pragma once

#include "hcamg/sparse.hpp"

#include <span>
#include <vector>

namespace hcamg {

struct DenseMatrix {
    index_t rows = 0;
    index_t cols = 0;
    std::vector<double> data;

    DenseMatrix() = default;
    DenseMatrix(index_t r, index_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(index_t i, index_t j) { return data[i * cols + j]; }
    double operator()(index_t i, index_t j) const { return data[i * cols + j]; }

    void resize(index_t r, index_t c) {
        rows = r;
        cols = c;
        data.assign(r * c, 0.0);
    }
};

/// Thin Householder QR: A (m x n) = Q (m x k) R (k x n) with k = min(m, n).
/// No pivoting; column order of A is preserved in R.
void householder_qr(const DenseMatrix& a, DenseMatrix& q, DenseMatrix& r);

/// Solves Rᵀ y = b for the leading k x k upper-triangular block of R (stored with row stride `ld`).
void solve_upper_transposed(std::span<const double> r, index_t k, index_t ld, std::span<const double> b,
                            std::span<double> y);

} // namespace hcamg
