#include "hcamg/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hcamg {

SparseMatrix::SparseMatrix(index_t nrows, index_t ncols)
    : nrows_(nrows), ncols_(ncols), row_offsets_(nrows + 1, 0) {}

SparseMatrix::SparseMatrix(index_t nrows, index_t ncols, std::vector<index_t> row_offsets,
                           std::vector<index_t> col_indices, std::vector<double> values)
    : nrows_(nrows), ncols_(ncols), row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)), values_(std::move(values)) {
    if (row_offsets_.size() != nrows_ + 1 || row_offsets_.front() != 0)
        throw DimensionError("row_offsets must have nrows+1 entries starting at 0");
    if (row_offsets_.back() != col_indices_.size() || col_indices_.size() != values_.size())
        throw DimensionError("row_offsets, col_indices and values disagree in length");
    for (index_t i = 0; i < nrows_; ++i) {
        if (row_offsets_[i] > row_offsets_[i + 1])
            throw DimensionError("row_offsets must be nondecreasing");
        for (auto k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
            if (col_indices_[k] >= ncols_)
                throw DimensionError("column index out of range in row " + std::to_string(i));
            if (k > row_offsets_[i] && col_indices_[k] <= col_indices_[k - 1])
                throw DimensionError("column indices not strictly increasing in row " + std::to_string(i));
        }
    }
}

SparseMatrix SparseMatrix::identity(index_t n) {
    std::vector<index_t> offsets(n + 1);
    std::iota(offsets.begin(), offsets.end(), index_t{0});
    std::vector<index_t> cols(n);
    std::iota(cols.begin(), cols.end(), index_t{0});
    return SparseMatrix(n, n, std::move(offsets), std::move(cols), std::vector<double>(n, 1.0));
}

SparseMatrix SparseMatrix::from_triplets(index_t nrows, index_t ncols, std::span<const Triplet> entries) {
    std::vector<index_t> counts(nrows + 1, 0);
    for (const auto& t : entries) {
        if (t.row >= nrows || t.col >= ncols)
            throw DimensionError("triplet index out of range");
        ++counts[t.row + 1];
    }
    std::partial_sum(counts.begin(), counts.end(), counts.begin());
    std::vector<index_t> cols(entries.size());
    std::vector<double> vals(entries.size());
    {
        std::vector<index_t> next(counts.begin(), counts.end() - 1);
        for (const auto& t : entries) {
            const auto pos = next[t.row]++;
            cols[pos] = t.col;
            vals[pos] = t.value;
        }
    }
    // sort each row and merge duplicates
    std::vector<index_t> offsets(nrows + 1, 0);
    std::vector<index_t> out_cols;
    std::vector<double> out_vals;
    out_cols.reserve(entries.size());
    out_vals.reserve(entries.size());
    std::vector<std::size_t> perm;
    for (index_t i = 0; i < nrows; ++i) {
        const auto b = counts[i];
        const auto e = counts[i + 1];
        perm.resize(e - b);
        std::iota(perm.begin(), perm.end(), b);
        std::stable_sort(perm.begin(), perm.end(), [&](auto x, auto y) { return cols[x] < cols[y]; });
        for (auto p : perm) {
            if (out_cols.size() > offsets[i] && out_cols.back() == cols[p]) {
                out_vals.back() += vals[p];
            } else {
                out_cols.push_back(cols[p]);
                out_vals.push_back(vals[p]);
            }
        }
        offsets[i + 1] = out_cols.size();
    }
    return SparseMatrix(nrows, ncols, std::move(offsets), std::move(out_cols), std::move(out_vals));
}

SparseMatrix SparseMatrix::from_dense(index_t nrows, index_t ncols, std::span<const double> dense) {
    if (dense.size() != nrows * ncols)
        throw DimensionError("dense buffer size does not match shape");
    std::vector<index_t> offsets(nrows + 1, 0);
    std::vector<index_t> cols;
    std::vector<double> vals;
    for (index_t i = 0; i < nrows; ++i) {
        for (index_t j = 0; j < ncols; ++j) {
            const double v = dense[i * ncols + j];
            if (v != 0.0) {
                cols.push_back(j);
                vals.push_back(v);
            }
        }
        offsets[i + 1] = cols.size();
    }
    return SparseMatrix(nrows, ncols, std::move(offsets), std::move(cols), std::move(vals));
}

double SparseMatrix::at(index_t i, index_t j) const {
    const auto r = row(i);
    const auto it = std::lower_bound(r.cols.begin(), r.cols.end(), j);
    if (it == r.cols.end() || *it != j) return 0.0;
    return r.vals[static_cast<std::size_t>(it - r.cols.begin())];
}

bool SparseMatrix::contains(index_t i, index_t j) const {
    const auto r = row(i);
    return std::binary_search(r.cols.begin(), r.cols.end(), j);
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    if (x.size() != ncols_ || y.size() != nrows_) throw DimensionError("multiply: size mismatch");
    for (index_t i = 0; i < nrows_; ++i) {
        double sum = 0.0;
        for (auto k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) sum += values_[k] * x[col_indices_[k]];
        y[i] = sum;
    }
}

void SparseMatrix::multiply_add(std::span<const double> x, std::span<double> y, double alpha) const {
    if (x.size() != ncols_ || y.size() != nrows_) throw DimensionError("multiply_add: size mismatch");
    for (index_t i = 0; i < nrows_; ++i) {
        double sum = 0.0;
        for (auto k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) sum += values_[k] * x[col_indices_[k]];
        y[i] += alpha * sum;
    }
}

std::vector<double> SparseMatrix::to_dense() const {
    std::vector<double> d(nrows_ * ncols_, 0.0);
    for (index_t i = 0; i < nrows_; ++i)
        for (auto k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) d[i * ncols_ + col_indices_[k]] = values_[k];
    return d;
}

double SparseMatrix::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

bool operator==(const SparseMatrix& a, const SparseMatrix& b) {
    return a.nrows_ == b.nrows_ && a.ncols_ == b.ncols_ && a.row_offsets_ == b.row_offsets_ &&
           a.col_indices_ == b.col_indices_ && a.values_ == b.values_;
}

SparseMatrix spgemm(const SparseMatrix& a, const SparseMatrix& b) {
    if (a.cols() != b.rows())
        throw DimensionError("spgemm: inner dimensions differ (" + std::to_string(a.cols()) + " vs " +
                             std::to_string(b.rows()) + ")");
    const index_t n = a.rows();
    const index_t m = b.cols();
    std::vector<index_t> offsets(n + 1, 0);
    std::vector<index_t> cols;
    std::vector<double> vals;
    cols.reserve(a.nnz() + b.nnz());
    vals.reserve(a.nnz() + b.nnz());

    // Gustavson's algorithm; marker holds the output slot of a column within the current row.
    std::vector<index_t> marker(m, npos);
    std::vector<std::pair<index_t, double>> tmp;
    for (index_t i = 0; i < n; ++i) {
        const auto row_start = cols.size();
        const auto ar = a.row(i);
        for (std::size_t ka = 0; ka < ar.size(); ++ka) {
            const auto br = b.row(ar.cols[ka]);
            const double av = ar.vals[ka];
            for (std::size_t kb = 0; kb < br.size(); ++kb) {
                const auto j = br.cols[kb];
                if (marker[j] == npos || marker[j] < row_start) {
                    marker[j] = cols.size();
                    cols.push_back(j);
                    vals.push_back(av * br.vals[kb]);
                } else {
                    vals[marker[j]] += av * br.vals[kb];
                }
            }
        }
        const auto row_end = cols.size();
        // sort the row by column; the accumulation order above is fixed, so results are deterministic
        if (row_end - row_start > 1) {
            tmp.resize(row_end - row_start);
            for (auto k = row_start; k < row_end; ++k) tmp[k - row_start] = {cols[k], vals[k]};
            std::sort(tmp.begin(), tmp.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
            for (auto k = row_start; k < row_end; ++k) {
                cols[k] = tmp[k - row_start].first;
                vals[k] = tmp[k - row_start].second;
            }
        }
        offsets[i + 1] = row_end;
    }
    return SparseMatrix(n, m, std::move(offsets), std::move(cols), std::move(vals));
}

SparseMatrix transpose(const SparseMatrix& a) {
    const index_t n = a.rows();
    const index_t m = a.cols();
    std::vector<index_t> offsets(m + 1, 0);
    for (auto c : a.col_indices()) ++offsets[c + 1];
    std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
    std::vector<index_t> cols(a.nnz());
    std::vector<double> vals(a.nnz());
    std::vector<index_t> next(offsets.begin(), offsets.end() - 1);
    for (index_t i = 0; i < n; ++i) {
        const auto r = a.row(i);
        for (std::size_t k = 0; k < r.size(); ++k) {
            const auto pos = next[r.cols[k]]++;
            cols[pos] = i;
            vals[pos] = r.vals[k];
        }
    }
    return SparseMatrix(m, n, std::move(offsets), std::move(cols), std::move(vals));
}

std::vector<double> diagonal(const SparseMatrix& a) {
    if (a.rows() != a.cols()) throw DimensionError("diagonal: matrix not square");
    std::vector<double> d(a.rows(), 0.0);
    for (index_t i = 0; i < a.rows(); ++i) d[i] = a.at(i, i);
    return d;
}

std::vector<double> diag_inverse(const SparseMatrix& a) {
    auto d = diagonal(a);
    for (index_t i = 0; i < d.size(); ++i) {
        if (d[i] == 0.0) throw ZeroDiagonalError(i);
        d[i] = 1.0 / d[i];
    }
    return d;
}

SparseMatrix abs_matrix(const SparseMatrix& a) {
    std::vector<double> vals(a.values().begin(), a.values().end());
    for (auto& v : vals) v = std::abs(v);
    return SparseMatrix(a.rows(), a.cols(), {a.row_offsets().begin(), a.row_offsets().end()},
                        {a.col_indices().begin(), a.col_indices().end()}, std::move(vals));
}

SparseMatrix pattern_of(const SparseMatrix& a) {
    return SparseMatrix(a.rows(), a.cols(), {a.row_offsets().begin(), a.row_offsets().end()},
                        {a.col_indices().begin(), a.col_indices().end()}, std::vector<double>(a.nnz(), 1.0));
}

SparseMatrix compress(const SparseMatrix& a, double tolerance) {
    std::vector<index_t> offsets(a.rows() + 1, 0);
    std::vector<index_t> cols;
    std::vector<double> vals;
    cols.reserve(a.nnz());
    vals.reserve(a.nnz());
    for (index_t i = 0; i < a.rows(); ++i) {
        const auto r = a.row(i);
        for (std::size_t k = 0; k < r.size(); ++k) {
            if (std::abs(r.vals[k]) > tolerance) {
                cols.push_back(r.cols[k]);
                vals.push_back(r.vals[k]);
            }
        }
        offsets[i + 1] = cols.size();
    }
    return SparseMatrix(a.rows(), a.cols(), std::move(offsets), std::move(cols), std::move(vals));
}

SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b, double alpha, double beta) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("add: shape mismatch");
    std::vector<index_t> offsets(a.rows() + 1, 0);
    std::vector<index_t> cols;
    std::vector<double> vals;
    cols.reserve(a.nnz() + b.nnz());
    vals.reserve(a.nnz() + b.nnz());
    for (index_t i = 0; i < a.rows(); ++i) {
        const auto ra = a.row(i);
        const auto rb = b.row(i);
        std::size_t p = 0, q = 0;
        while (p < ra.size() || q < rb.size()) {
            if (q == rb.size() || (p < ra.size() && ra.cols[p] < rb.cols[q])) {
                cols.push_back(ra.cols[p]);
                vals.push_back(alpha * ra.vals[p++]);
            } else if (p == ra.size() || rb.cols[q] < ra.cols[p]) {
                cols.push_back(rb.cols[q]);
                vals.push_back(beta * rb.vals[q++]);
            } else {
                cols.push_back(ra.cols[p]);
                vals.push_back(alpha * ra.vals[p++] + beta * rb.vals[q++]);
            }
        }
        offsets[i + 1] = cols.size();
    }
    return SparseMatrix(a.rows(), a.cols(), std::move(offsets), std::move(cols), std::move(vals));
}

SparseMatrix scale_rows(const SparseMatrix& a, std::span<const double> left) {
    if (left.size() != a.rows()) throw DimensionError("scale_rows: size mismatch");
    std::vector<double> vals(a.values().begin(), a.values().end());
    for (index_t i = 0; i < a.rows(); ++i)
        for (auto k = a.row_offsets()[i]; k < a.row_offsets()[i + 1]; ++k) vals[k] *= left[i];
    return SparseMatrix(a.rows(), a.cols(), {a.row_offsets().begin(), a.row_offsets().end()},
                        {a.col_indices().begin(), a.col_indices().end()}, std::move(vals));
}

SparseMatrix galerkin_product(const SparseMatrix& p, const SparseMatrix& a) {
    return compress(spgemm(transpose(p), spgemm(a, p)));
}

SparseMatrix submatrix(const SparseMatrix& a, std::span<const index_t> rows, std::span<const index_t> cols) {
    std::vector<index_t> col_map(a.cols(), npos);
    for (std::size_t k = 0; k < cols.size(); ++k) {
        if (cols[k] >= a.cols()) throw DimensionError("submatrix: column out of range");
        col_map[cols[k]] = k;
    }
    std::vector<Triplet> entries;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r] >= a.rows()) throw DimensionError("submatrix: row out of range");
        const auto row = a.row(rows[r]);
        for (std::size_t k = 0; k < row.size(); ++k)
            if (col_map[row.cols[k]] != npos) entries.push_back({r, col_map[row.cols[k]], row.vals[k]});
    }
    return SparseMatrix::from_triplets(rows.size(), cols.size(), entries);
}

double asymmetry(const SparseMatrix& a) {
    if (a.rows() != a.cols()) throw DimensionError("asymmetry: matrix not square");
    const double scale = a.max_abs();
    if (scale == 0.0) return 0.0;
    const auto diff = add(a, transpose(a), 1.0, -1.0);
    return diff.max_abs() / scale;
}

double dot(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

} // namespace hcamg
