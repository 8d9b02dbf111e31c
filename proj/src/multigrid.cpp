#include "hcamg/multigrid.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

namespace hcamg {

struct Hierarchy::CoarseSolver {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu;
};

void symmetric_gauss_seidel(const SparseMatrix& a, std::span<double> x, std::span<const double> b, int sweeps) {
    if (a.rows() != a.cols() || x.size() != a.rows() || b.size() != a.rows())
        throw DimensionError("symmetric_gauss_seidel: size mismatch");
    const index_t n = a.rows();
    auto relax = [&](index_t i) {
        const auto r = a.row(i);
        double s = b[i];
        double diag = 0.0;
        for (std::size_t k = 0; k < r.size(); ++k) {
            if (r.cols[k] == i)
                diag = r.vals[k];
            else
                s -= r.vals[k] * x[r.cols[k]];
        }
        if (diag == 0.0) throw ZeroDiagonalError(i);
        x[i] = s / diag;
    };
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        for (index_t i = 0; i < n; ++i) relax(i);
        for (index_t i = n; i-- > 0;) relax(i);
    }
}

void hiptmair_smooth(const Level& level, std::span<double> x, std::span<const double> b) {
    const index_t ne = level.A_e.rows();
    const index_t nn = level.D.cols();
    symmetric_gauss_seidel(level.A_e, x, b, 1);

    std::vector<double> r(b.begin(), b.end());
    level.A_e.multiply_add(x, r, -1.0);
    std::vector<double> rn(nn, 0.0);
    // Dᵀ r without forming Dᵀ
    for (index_t e = 0; e < ne; ++e) {
        const auto row = level.D.row(e);
        for (std::size_t k = 0; k < row.size(); ++k) rn[row.cols[k]] += row.vals[k] * r[e];
    }
    std::vector<double> c(nn, 0.0);
    symmetric_gauss_seidel(level.nodal_aux, c, rn, 1);
    level.D.multiply_add(c, x, 1.0);

    symmetric_gauss_seidel(level.A_e, x, b, 1);
}

Level make_smoothing_level(const SparseMatrix& a_e, const SparseMatrix& s_e, const SparseMatrix& a_n,
                           const SparseMatrix& d) {
    if (a_e.rows() != d.rows() || a_n.rows() != d.cols()) throw DimensionError("smoothing level: inconsistent sizes");
    Level l;
    l.A_e = a_e;
    l.S_e = s_e;
    l.A_n = a_n;
    l.D = d;
    l.nodal_aux = galerkin_product(d, a_e);
    return l;
}

double null_space_violation(const SparseMatrix& s, const SparseMatrix& d) {
    const double smax = s.max_abs();
    if (smax == 0.0) return 0.0;
    return spgemm(s, d).max_abs() / smax;
}

Hierarchy::Hierarchy(const SparseMatrix& a_e, const SparseMatrix& s_e, const SparseMatrix& a_n, const SparseMatrix& d,
                     const HierarchyConfig& cfg) {
    if (a_e.rows() != s_e.rows() || a_e.rows() != d.rows() || a_n.rows() != d.cols())
        throw DimensionError("hierarchy: inconsistent operator sizes");
    const double violation = null_space_violation(s_e, d);
    if (violation > 1e-12)
        throw Error("fine operators violate the gradient null space: max|S D|/max|S| = " + std::to_string(violation));

    Level fine;
    fine.A_e = a_e;
    fine.S_e = s_e;
    fine.A_n = a_n;
    fine.D = d;
    levels_.push_back(std::move(fine));

    while (levels_.size() < cfg.max_levels && levels_.back().A_e.rows() > cfg.coarse_size) {
        Level& cur = levels_.back();
        auto ncfg = cfg.nodal;
        if (levels_.size() > 1) ncfg.drop_tol = cfg.coarse_drop_tol;
        auto setup = build_edge_prolongator(cur.A_n, cur.S_e, cur.D, cfg.emin, ncfg);
        const index_t nf = cur.A_e.rows();
        const index_t nc = setup.edge.P_e.cols();
        if (nc == 0) break;
        if (static_cast<double>(nc) >= 0.9 * static_cast<double>(nf))
            throw Error("coarsening stagnated at level " + std::to_string(levels_.size() - 1) + ": " +
                        std::to_string(nc) + " coarse edges from " + std::to_string(nf));

        Level next;
        next.A_e = galerkin_product(setup.edge.P_e, cur.A_e);
        next.S_e = galerkin_product(setup.edge.P_e, cur.S_e);
        next.A_n = galerkin_product(setup.nodal.P, cur.A_n);
        next.D = setup.coarse.D_H;

        cur.stats.commutator_residual = setup.edge.commutator_residual;
        cur.stats.commutator_scale = std::max(1.0, spgemm(cur.D, setup.nodal.P).max_abs());
        cur.stats.repaired_rows = setup.repaired_rows;
        cur.stats.zero_rows = setup.zero_rows;
        cur.stats.augmented_edges = setup.coarse.augmented_edges.size();
        cur.stats.energy_history = setup.edge.energy_history;
        cur.stats.histogram = std::move(setup.histogram);
        cur.P_e = std::move(setup.edge.P_e);
        cur.R_e = transpose(cur.P_e);
        cur.P_n = std::move(setup.nodal.P);
        levels_.push_back(std::move(next));
    }

    for (auto& level : levels_) level.nodal_aux = galerkin_product(level.D, level.A_e);

    const auto& coarsest = levels_.back().A_e;
    const auto n = static_cast<Eigen::Index>(coarsest.rows());
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
    for (index_t i = 0; i < coarsest.rows(); ++i) {
        const auto r = coarsest.row(i);
        for (std::size_t k = 0; k < r.size(); ++k)
            dense(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(r.cols[k])) = r.vals[k];
    }
    coarse_ = std::make_unique<CoarseSolver>();
    if (n > 0) coarse_->lu.compute(dense);
}

Hierarchy::~Hierarchy() = default;
Hierarchy::Hierarchy(Hierarchy&&) noexcept = default;
Hierarchy& Hierarchy::operator=(Hierarchy&&) noexcept = default;

double Hierarchy::operator_complexity() const {
    double total = 0.0;
    for (const auto& l : levels_) total += static_cast<double>(l.A_e.nnz());
    return total / static_cast<double>(levels_.front().A_e.nnz());
}

void Hierarchy::coarse_solve(std::span<const double> b, std::span<double> x) const {
    const auto n = static_cast<Eigen::Index>(b.size());
    if (n == 0) return;
    const Eigen::Map<const Eigen::VectorXd> rhs(b.data(), n);
    Eigen::Map<Eigen::VectorXd>(x.data(), n) = coarse_->lu.solve(rhs);
}

void Hierarchy::cycle(index_t l, std::span<double> x, std::span<const double> b) const {
    const Level& level = levels_[l];
    if (l + 1 == levels_.size()) {
        coarse_solve(b, x);
        return;
    }
    hiptmair_smooth(level, x, b);
    std::vector<double> r(b.begin(), b.end());
    level.A_e.multiply_add(x, r, -1.0);
    std::vector<double> rc(level.P_e.cols(), 0.0);
    level.R_e.multiply(r, rc);
    std::vector<double> xc(rc.size(), 0.0);
    cycle(l + 1, xc, rc);
    level.P_e.multiply_add(xc, x, 1.0);
    hiptmair_smooth(level, x, b);
}

void Hierarchy::v_cycle(std::span<double> x, std::span<const double> b) const {
    if (x.size() != levels_.front().A_e.rows() || b.size() != x.size()) throw DimensionError("v_cycle: size mismatch");
    cycle(0, x, b);
}

void Hierarchy::apply(std::span<const double> b, std::span<double> z) const {
    std::fill(z.begin(), z.end(), 0.0);
    v_cycle(z, b);
}

Hierarchy build_hierarchy(const SparseMatrix& a_e, const SparseMatrix& s_e, const SparseMatrix& a_n,
                          const SparseMatrix& d, const HierarchyConfig& cfg) {
    return Hierarchy(a_e, s_e, a_n, d, cfg);
}

} // namespace hcamg
