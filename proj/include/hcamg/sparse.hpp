/// @file sparse.hpp
/// @brief Compressed-sparse-row storage and the handful of kernels the solver needs.

#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hcamg {

using index_t = std::uint64_t;

inline constexpr index_t npos = std::numeric_limits<index_t>::max();

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

/// Raised when a diagonal entry needed for inversion or relaxation is zero or absent.
class ZeroDiagonalError : public Error {
public:
    explicit ZeroDiagonalError(index_t row)
        : Error("zero or missing diagonal entry in row " + std::to_string(row)), row_(row) {}
    index_t row() const { return row_; }

private:
    index_t row_;
};

struct Triplet {
    index_t row;
    index_t col;
    double value;
};

/// Read-only view of one CSR row.
struct RowView {
    std::span<const index_t> cols;
    std::span<const double> vals;
    std::size_t size() const { return cols.size(); }
};

/// Real CSR matrix. Column indices are strictly increasing within every row.
class SparseMatrix {
public:
    SparseMatrix() : row_offsets_(1, 0) {}
    /// Zero matrix of the given shape.
    SparseMatrix(index_t nrows, index_t ncols);
    /// Takes ownership of CSR arrays; validates the structural invariants.
    SparseMatrix(index_t nrows, index_t ncols, std::vector<index_t> row_offsets,
                 std::vector<index_t> col_indices, std::vector<double> values);

    static SparseMatrix identity(index_t n);
    /// Builds a matrix from unordered triplets, summing duplicates. Zeros are kept.
    static SparseMatrix from_triplets(index_t nrows, index_t ncols, std::span<const Triplet> entries);
    /// Row-major dense input; only nonzero entries are stored.
    static SparseMatrix from_dense(index_t nrows, index_t ncols, std::span<const double> dense);

    index_t rows() const { return nrows_; }
    index_t cols() const { return ncols_; }
    index_t nnz() const { return static_cast<index_t>(values_.size()); }

    std::span<const index_t> row_offsets() const { return row_offsets_; }
    std::span<const index_t> col_indices() const { return col_indices_; }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

    RowView row(index_t i) const {
        const auto b = row_offsets_[i];
        const auto e = row_offsets_[i + 1];
        return {std::span<const index_t>(col_indices_).subspan(b, e - b),
                std::span<const double>(values_).subspan(b, e - b)};
    }
    index_t row_nnz(index_t i) const { return row_offsets_[i + 1] - row_offsets_[i]; }

    /// Value at (i, j), zero if not stored.
    double at(index_t i, index_t j) const;
    /// True if (i, j) is a stored entry.
    bool contains(index_t i, index_t j) const;

    /// y = A x
    void multiply(std::span<const double> x, std::span<double> y) const;
    /// y += alpha * A x
    void multiply_add(std::span<const double> x, std::span<double> y, double alpha = 1.0) const;
    /// Row-major dense copy; intended for small matrices in tests and diagnostics.
    std::vector<double> to_dense() const;

    double max_abs() const;

    friend bool operator==(const SparseMatrix& a, const SparseMatrix& b);

private:
    index_t nrows_ = 0;
    index_t ncols_ = 0;
    std::vector<index_t> row_offsets_;
    std::vector<index_t> col_indices_;
    std::vector<double> values_;
};

/// Exact sparse product A*B. Numerically cancelled entries stay stored.
SparseMatrix spgemm(const SparseMatrix& a, const SparseMatrix& b);

SparseMatrix transpose(const SparseMatrix& a);

/// Elementwise reciprocal of the diagonal. Throws ZeroDiagonalError naming the first bad row.
std::vector<double> diag_inverse(const SparseMatrix& a);

std::vector<double> diagonal(const SparseMatrix& a);

SparseMatrix abs_matrix(const SparseMatrix& a);

/// Drops entries with |a_ij| <= tolerance (tolerance 0 drops exact zeros only).
SparseMatrix compress(const SparseMatrix& a, double tolerance = 0.0);

/// alpha*A + beta*B on the union pattern.
SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b, double alpha = 1.0, double beta = 1.0);

/// Same pattern, every value set to one.
SparseMatrix pattern_of(const SparseMatrix& a);

/// diag(left) * A
SparseMatrix scale_rows(const SparseMatrix& a, std::span<const double> left);

/// Pᵀ A P with exact zeros dropped.
SparseMatrix galerkin_product(const SparseMatrix& p, const SparseMatrix& a);

/// Rows and columns selected by index lists (columns renumbered in list order).
SparseMatrix submatrix(const SparseMatrix& a, std::span<const index_t> rows, std::span<const index_t> cols);

/// Maximum relative asymmetry max|a_ij - a_ji| / max|A|.
double asymmetry(const SparseMatrix& a);

double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);

} // namespace hcamg
