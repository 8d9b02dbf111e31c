// Shared helpers for the unit and acceptance tests: dense Eigen views of
// sparse matrices and seeded random inputs.
#pragma once

#include "hcamg/coarse_topology.hpp"
#include "hcamg/dense.hpp"
#include "hcamg/emin_setup.hpp"
#include "hcamg/mesh.hpp"
#include "hcamg/nodal_amg.hpp"
#include "hcamg/sparse.hpp"

#include <Eigen/Dense>

#include <random>
#include <vector>

namespace hcamg::testing {

inline Eigen::MatrixXd to_eigen(const SparseMatrix& a) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(a.rows()), static_cast<Eigen::Index>(a.cols()));
    for (index_t i = 0; i < a.rows(); ++i) {
        const auto r = a.row(i);
        for (std::size_t k = 0; k < r.size(); ++k)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(r.cols[k])) = r.vals[k];
    }
    return m;
}

inline Eigen::MatrixXd to_eigen(const DenseMatrix& a) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(a.rows), static_cast<Eigen::Index>(a.cols));
    for (index_t i = 0; i < a.rows; ++i)
        for (index_t j = 0; j < a.cols; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a(i, j);
    return m;
}

inline SparseMatrix from_eigen(const Eigen::MatrixXd& m) {
    std::vector<Triplet> t;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            if (m(i, j) != 0.0) t.push_back({static_cast<index_t>(i), static_cast<index_t>(j), m(i, j)});
    return SparseMatrix::from_triplets(m.rows(), m.cols(), t);
}

/// Random matrix with roughly `fill` density; values drawn from `values` when
/// given, otherwise uniform in (-1, 1).
inline SparseMatrix random_sparse(index_t rows, index_t cols, double fill, std::mt19937_64& rng,
                                  const std::vector<double>& values = {}) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick(0, values.empty() ? 0 : values.size() - 1);
    std::vector<Triplet> t;
    for (index_t i = 0; i < rows; ++i)
        for (index_t j = 0; j < cols; ++j)
            if (coin(rng) < fill) t.push_back({i, j, values.empty() ? u(rng) : values[pick(rng)]});
    return SparseMatrix::from_triplets(rows, cols, t);
}

inline double max_abs(const Eigen::MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

/// tridiag(-1, 2, -1)
inline SparseMatrix laplace_1d(index_t n) {
    std::vector<Triplet> t;
    for (index_t i = 0; i < n; ++i) {
        t.push_back({i, i, 2.0});
        if (i > 0) t.push_back({i, i - 1, -1.0});
        if (i + 1 < n) t.push_back({i, i + 1, -1.0});
    }
    return SparseMatrix::from_triplets(n, n, t);
}

inline DiscretizedSystem structured_system(int dim, ElementKind kind, index_t n, double sigma, bool dirichlet = false) {
    const std::vector<index_t> shape(dim, n);
    return discretize(build_structured_mesh(dim, kind, shape, dirichlet), sigma);
}

/// One level of the sphcurl setup up to the factored constraints.
struct ConstraintFixture {
    DiscretizedSystem sys;
    SparseMatrix P_n;
    SparseMatrix P_const;
    EminSetup setup;
};

inline ConstraintFixture constraint_fixture(int dim, ElementKind kind, index_t n, bool dirichlet = false) {
    ConstraintFixture f;
    f.sys = structured_system(dim, kind, n, 1.0, dirichlet);
    const auto p_tent = tentative_prolongator(aggregate(strength_graph(f.sys.A_n, 0.0)));
    f.P_n = smooth_and_normalize(f.sys.A_n, p_tent).P;
    f.P_const = gen_piecewise_const(f.P_n);
    auto cg = augment_dirichlet_edges(build_coarse_gradient(f.sys.D, f.P_const), f.sys.D, f.P_const);
    f.setup = setup_constraints(f.sys.D, f.P_n, std::move(cg));
    return f;
}

} // namespace hcamg::testing
