#include "hcamg/dense.hpp"

#include <algorithm>
#include <cmath>

namespace hcamg {

void householder_qr(const DenseMatrix& a, DenseMatrix& q, DenseMatrix& r) {
    const index_t m = a.rows;
    const index_t n = a.cols;
    const index_t k = std::min(m, n);
    DenseMatrix work = a;
    // reflector j is stored in column j of `vs` (rows j..m-1), with tau in taus[j]
    std::vector<double> vs(m * k, 0.0);
    std::vector<double> taus(k, 0.0);

    for (index_t j = 0; j < k; ++j) {
        double norm = 0.0;
        for (index_t i = j; i < m; ++i) norm += work(i, j) * work(i, j);
        norm = std::sqrt(norm);
        if (norm == 0.0) continue;
        const double alpha = work(j, j) >= 0.0 ? -norm : norm;
        // v = x - alpha e1, normalized so that H = I - tau v vᵀ with tau = 2 / vᵀv
        double vnorm2 = 0.0;
        for (index_t i = j; i < m; ++i) {
            const double vi = (i == j) ? work(i, j) - alpha : work(i, j);
            vs[i * k + j] = vi;
            vnorm2 += vi * vi;
        }
        if (vnorm2 == 0.0) continue;
        const double tau = 2.0 / vnorm2;
        taus[j] = tau;
        for (index_t c = j; c < n; ++c) {
            double s = 0.0;
            for (index_t i = j; i < m; ++i) s += vs[i * k + j] * work(i, c);
            s *= tau;
            for (index_t i = j; i < m; ++i) work(i, c) -= s * vs[i * k + j];
        }
    }

    r.resize(k, n);
    for (index_t i = 0; i < k; ++i)
        for (index_t c = i; c < n; ++c) r(i, c) = work(i, c);

    // Q = H_0 H_1 ... H_{k-1} applied to the first k columns of the identity
    q.resize(m, k);
    for (index_t c = 0; c < k; ++c) q(c, c) = 1.0;
    for (index_t jj = k; jj-- > 0;) {
        if (taus[jj] == 0.0) continue;
        for (index_t c = 0; c < k; ++c) {
            double s = 0.0;
            for (index_t i = jj; i < m; ++i) s += vs[i * k + jj] * q(i, c);
            s *= taus[jj];
            for (index_t i = jj; i < m; ++i) q(i, c) -= s * vs[i * k + jj];
        }
    }
}

void solve_upper_transposed(std::span<const double> r, index_t k, index_t ld, std::span<const double> b,
                            std::span<double> y) {
    // Rᵀ is lower triangular: forward substitution
    for (index_t i = 0; i < k; ++i) {
        double s = b[i];
        for (index_t j = 0; j < i; ++j) s -= r[j * ld + i] * y[j];
        y[i] = s / r[i * ld + i];
    }
}

} // namespace hcamg
