#include "hcamg/edge_prolongator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hcamg {

namespace {

/// Values of R row i gathered in the order of the coarse-node list J.
void gather_row(const SparseMatrix& r, index_t i, std::span<const index_t> nodes, std::vector<double>& out) {
    out.assign(nodes.size(), 0.0);
    const auto row = r.row(i);
    std::size_t a = 0;
    for (std::size_t k = 0; k < row.size(); ++k) {
        while (a < nodes.size() && nodes[a] < row.cols[k]) ++a;
        if (a == nodes.size() || nodes[a] != row.cols[k])
            throw Error("commutator row " + std::to_string(i) + " reaches outside its node pattern");
        out[a] = row.vals[k];
    }
}

} // namespace

std::string_view to_string(ProlongatorMode mode) {
    return mode == ProlongatorMode::sphcurl ? "sphcurl" : "rsamg";
}

std::string_view to_string(InitialSeed seed) {
    return seed == InitialSeed::zero ? "zero" : "ones";
}

EdgeProlongator initial_feasible_guess(const SubproblemSet& subs, const SparseMatrix& r, InitialSeed seed) {
    const auto& n = subs.N;
    if (subs.size() != n.rows() || r.rows() != n.rows()) throw DimensionError("initial_feasible_guess: size mismatch");
    std::vector<index_t> offsets(n.row_offsets().begin(), n.row_offsets().end());
    std::vector<index_t> cols(n.col_indices().begin(), n.col_indices().end());
    std::vector<double> vals(cols.size(), seed == InitialSeed::ones ? 1.0 : 0.0);
    std::vector<double> rhs;
    std::vector<double> p;
    for (index_t i = 0; i < n.rows(); ++i) {
        gather_row(r, i, subs.coarse_nodes(i), rhs);
        const auto f = subs.factors(i);
        if (f.n_rows == 0) {
            for (double v : rhs)
                if (std::abs(v) > 1e-12) throw Error("fine edge " + std::to_string(i) + " has no coarse edges but a nonzero commutator row");
            continue;
        }
        if (f.rank == 0 || f.q.size() != f.n_rows * f.rank)
            throw Error("missing factors for fine edge " + std::to_string(i));
        auto row = std::span<double>(vals).subspan(offsets[i], f.n_rows);
        project_out(f, row);
        p.assign(f.n_rows, 0.0);
        least_norm(f, rhs, p);
        for (index_t k = 0; k < f.n_rows; ++k) row[k] += p[k];
    }
    EdgeProlongator out;
    out.P_e = SparseMatrix(n.rows(), n.cols(), std::move(offsets), std::move(cols), std::move(vals));
    return out;
}

SparseMatrix project_correction(const SparseMatrix& dp, const SubproblemSet& subs) {
    if (!(dp.rows() == subs.N.rows() && dp.nnz() == subs.N.nnz()))
        throw DimensionError("project_correction: correction must be stored on the pattern N");
    SparseMatrix out = dp;
    auto vals = out.values();
    const auto offs = out.row_offsets();
    for (index_t i = 0; i < out.rows(); ++i) {
        const auto f = subs.factors(i);
        project_out(f, vals.subspan(offs[i], offs[i + 1] - offs[i]));
    }
    return out;
}

SparseMatrix masked_product(const SparseMatrix& s, const SparseMatrix& p, const SparseMatrix& mask) {
    if (s.cols() != p.rows() || mask.rows() != s.rows() || mask.cols() != p.cols())
        throw DimensionError("masked_product: incompatible dimensions");
    std::vector<index_t> pos(p.cols(), npos);
    std::vector<double> vals(mask.nnz(), 0.0);
    const auto moffs = mask.row_offsets();
    const auto mcols = mask.col_indices();
    for (index_t i = 0; i < s.rows(); ++i) {
        for (auto k = moffs[i]; k < moffs[i + 1]; ++k) pos[mcols[k]] = k;
        const auto srow = s.row(i);
        for (std::size_t a = 0; a < srow.size(); ++a) {
            const auto prow = p.row(srow.cols[a]);
            for (std::size_t b = 0; b < prow.size(); ++b) {
                const auto k = pos[prow.cols[b]];
                if (k != npos) vals[k] += srow.vals[a] * prow.vals[b];
            }
        }
        for (auto k = moffs[i]; k < moffs[i + 1]; ++k) pos[mcols[k]] = npos;
    }
    return SparseMatrix(mask.rows(), mask.cols(), std::vector<index_t>(moffs.begin(), moffs.end()),
                        std::vector<index_t>(mcols.begin(), mcols.end()), std::move(vals));
}

double prolongator_energy(const SparseMatrix& s, const SparseMatrix& p) {
    const auto sp = masked_product(s, p, p);
    double e = 0.0;
    const auto a = p.values();
    const auto b = sp.values();
    for (std::size_t k = 0; k < a.size(); ++k) e += a[k] * b[k];
    return e;
}

EdgeProlongator emin_step(const SparseMatrix& s, const EdgeProlongator& pk, const EminConfig& cfg,
                          const SubproblemSet& subs) {
    if (!(cfg.omega > 0.0 && cfg.omega < 2.0) && cfg.omega != 0.0) throw Error("emin omega must lie in (0, 2)");
    auto diag = diagonal(s);
    const double dmax = diag.empty() ? 0.0 : *std::max_element(diag.begin(), diag.end());
    const double shift = 1e-12 * dmax;
    for (std::size_t i = 0; i < diag.size(); ++i) {
        if (diag[i] == 0.0) {
            if (shift == 0.0) throw ZeroDiagonalError(i);
            diag[i] = shift;
        }
    }
    std::vector<double> dinv(diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) dinv[i] = 1.0 / diag[i];

    auto dp = project_correction(scale_rows(masked_product(s, pk.P_e, pk.P_e), dinv), subs);
    EdgeProlongator out;
    out.P_e = pk.P_e;
    auto v = out.P_e.values();
    const auto d = dp.values();
    for (std::size_t k = 0; k < v.size(); ++k) v[k] -= cfg.omega * d[k];
    out.energy_history = pk.energy_history;
    out.energy_history.push_back(prolongator_energy(s, out.P_e));
    out.commutator_residual = pk.commutator_residual;
    return out;
}

double commutator_residual(const SparseMatrix& p_e, const SparseMatrix& d_H, const SparseMatrix& d_h,
                           const SparseMatrix& p_n) {
    return add(spgemm(p_e, d_H), spgemm(d_h, p_n), 1.0, -1.0).max_abs();
}

EdgeLevelSetup build_edge_prolongator(const SparseMatrix& a_n, const SparseMatrix& s, const SparseMatrix& d_h,
                                      const EminConfig& cfg, const NodalAggregationConfig& nodal_cfg) {
    if (a_n.rows() != d_h.cols() || s.rows() != d_h.rows())
        throw DimensionError("build_edge_prolongator: inconsistent operator sizes");
    EdgeLevelSetup out;
    const auto agg = aggregate(strength_graph(a_n, nodal_cfg.drop_tol));
    const auto p_tent = tentative_prolongator(agg);
    if (cfg.mode == ProlongatorMode::rsamg) {
        out.nodal.P = p_tent;
        out.P_const = p_tent;
    } else {
        out.nodal = smooth_and_normalize(a_n, p_tent, nodal_cfg.power_iterations);
        out.P_const = gen_piecewise_const(out.nodal.P, nodal_cfg.n_passes);
    }
    auto cg = augment_dirichlet_edges(build_coarse_gradient(d_h, out.P_const), d_h, out.P_const);
    auto setup = setup_constraints(d_h, out.nodal.P, std::move(cg));

    out.edge = initial_feasible_guess(setup.subproblems, setup.R, cfg.seed);
    out.edge.energy_history.push_back(prolongator_energy(s, out.edge.P_e));
    if (cfg.mode == ProlongatorMode::sphcurl)
        for (index_t it = 0; it < cfg.iterations; ++it) out.edge = emin_step(s, out.edge, cfg, setup.subproblems);
    out.edge.P_e = compress(out.edge.P_e);
    out.edge.commutator_residual = add(spgemm(out.edge.P_e, setup.coarse.D_H), setup.R, 1.0, -1.0).max_abs();
    out.coarse = std::move(setup.coarse);
    out.repaired_rows = setup.repaired_rows;
    out.zero_rows = setup.zero_rows;
    out.histogram = std::move(setup.histogram);
    return out;
}

} // namespace hcamg
