#include "hcamg/nodal_amg.hpp"

#include <cmath>
#include <string>

namespace hcamg {

SparseMatrix strength_graph(const SparseMatrix& a, double drop_tol) {
    if (a.rows() != a.cols()) throw DimensionError("strength_graph needs a square matrix");
    const index_t n = a.rows();
    const auto d = diagonal(a);
    for (index_t i = 0; i < n; ++i)
        if (!(d[i] > 0.0)) throw Error("nonpositive diagonal in row " + std::to_string(i));

    std::vector<Triplet> entries;
    entries.reserve(a.nnz() * 2);
    for (index_t i = 0; i < n; ++i) {
        entries.push_back({i, i, 1.0});
        const auto r = a.row(i);
        for (std::size_t k = 0; k < r.size(); ++k) {
            const auto j = r.cols[k];
            if (j == i) continue;
            if (std::abs(r.vals[k]) > drop_tol * std::sqrt(d[i] * d[j])) {
                entries.push_back({i, j, 1.0});
                entries.push_back({j, i, 1.0});
            }
        }
    }
    return pattern_of(SparseMatrix::from_triplets(n, n, entries));
}

Aggregation aggregate(const SparseMatrix& strength) {
    const index_t n = strength.rows();
    Aggregation agg;
    agg.n_fine = n;
    agg.membership.assign(n, npos);

    // phase 1: root aggregates from fully free neighbourhoods
    for (index_t i = 0; i < n; ++i) {
        if (agg.membership[i] != npos) continue;
        const auto r = strength.row(i);
        bool free = true;
        bool has_neighbor = false;
        for (auto j : r.cols) {
            if (j == i) continue;
            has_neighbor = true;
            if (agg.membership[j] != npos) {
                free = false;
                break;
            }
        }
        if (!free || !has_neighbor) continue;
        const index_t id = agg.n_agg++;
        agg.membership[i] = id;
        for (auto j : r.cols) agg.membership[j] = id;
    }
    const index_t phase1_count = agg.n_agg;

    // phase 2: attach leftovers to the best-connected phase-1 aggregate
    std::vector<index_t> count(phase1_count, 0);
    std::vector<index_t> touched;
    std::vector<index_t> pending(n, npos);
    for (index_t i = 0; i < n; ++i) {
        if (agg.membership[i] != npos) continue;
        touched.clear();
        for (auto j : strength.row(i).cols) {
            const auto m = agg.membership[j];
            if (j == i || m == npos || m >= phase1_count) continue;
            if (count[m]++ == 0) touched.push_back(m);
        }
        index_t best = npos;
        index_t best_count = 0;
        for (auto m : touched) {
            if (count[m] > best_count || (count[m] == best_count && m < best)) {
                best = m;
                best_count = count[m];
            }
            count[m] = 0;
        }
        pending[i] = best;
    }
    for (index_t i = 0; i < n; ++i) {
        if (agg.membership[i] != npos) continue;
        agg.membership[i] = pending[i] != npos ? pending[i] : agg.n_agg++;
    }
    return agg;
}

SparseMatrix tentative_prolongator(const Aggregation& agg) {
    std::vector<index_t> offsets(agg.n_fine + 1);
    std::vector<index_t> cols(agg.n_fine);
    for (index_t i = 0; i < agg.n_fine; ++i) {
        offsets[i + 1] = i + 1;
        cols[i] = agg.membership[i];
    }
    return SparseMatrix(agg.n_fine, agg.n_agg, std::move(offsets), std::move(cols),
                        std::vector<double>(agg.n_fine, 1.0));
}

double estimate_spectral_radius(const SparseMatrix& a, int iterations) {
    const index_t n = a.rows();
    if (n == 0) return 0.0;
    const auto dinv = diag_inverse(a);
    std::vector<double> v(n);
    std::vector<double> w(n);
    for (index_t i = 0; i < n; ++i) v[i] = 1.0 + 0.5 * std::sin(static_cast<double>(i) + 1.0);
    double rho = 0.0;
    for (int it = 0; it < iterations; ++it) {
        a.multiply(v, w); // w = A v
        double vav = 0.0;
        double vdv = 0.0;
        for (index_t i = 0; i < n; ++i) {
            vav += v[i] * w[i];
            vdv += v[i] * v[i] / dinv[i];
        }
        rho = vav / vdv;
        double norm = 0.0;
        for (index_t i = 0; i < n; ++i) {
            v[i] = dinv[i] * w[i];
            norm = std::max(norm, std::abs(v[i]));
        }
        if (norm == 0.0) return 0.0;
        for (auto& x : v) x /= norm;
    }
    return rho;
}

NodalProlongator smooth_and_normalize(const SparseMatrix& a, const SparseMatrix& p_tent, int power_iterations) {
    if (a.cols() != p_tent.rows() || a.rows() != a.cols())
        throw DimensionError("smooth_and_normalize: incompatible dimensions");
    NodalProlongator out;
    out.rho_estimate = estimate_spectral_radius(a, power_iterations);
    out.omega_used = out.rho_estimate > 0.0 ? 4.0 / (3.0 * out.rho_estimate) : 0.0;

    const auto dinv = diag_inverse(a);
    std::vector<double> scale(dinv.size());
    for (std::size_t i = 0; i < dinv.size(); ++i) scale[i] = -out.omega_used * dinv[i];
    const auto ap = spgemm(scale_rows(a, scale), p_tent);
    auto p = compress(add(p_tent, ap));

    auto vals = p.values();
    const auto offs = p.row_offsets();
    for (index_t i = 0; i < p.rows(); ++i) {
        double s = 0.0;
        for (auto k = offs[i]; k < offs[i + 1]; ++k) s += vals[k];
        if (std::abs(s) <= 1e-14) throw Error("zero row sum in smoothed prolongator row " + std::to_string(i));
        for (auto k = offs[i]; k < offs[i + 1]; ++k) vals[k] /= s;
    }
    out.P = std::move(p);
    return out;
}

} // namespace hcamg
