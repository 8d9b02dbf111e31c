#include "hcamg/mesh.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <array>
#include <cmath>
#include <functional>

namespace hcamg {
namespace {

using testing::max_abs;
using testing::to_eigen;
using Vec = Eigen::Vector3d;

// ---------------------------------------------------------------------------
// Quadrature oracle: basis functions written out explicitly and integrated
// with rules that are exact for the integrands involved.

struct QuadPoint {
    Vec x;
    double w;
};

struct LocalBasis {
    std::vector<index_t> edges;                       // global edge ids
    std::function<Vec(index_t, const Vec&)> value;    // edge basis at a point
    std::function<Vec(index_t, const Vec&)> curl;     // z-component only in 2D
    std::vector<index_t> nodes;                       // global node ids
    std::function<double(index_t, const Vec&)> nval;  // nodal basis
    std::function<Vec(index_t, const Vec&)> ngrad;
    std::vector<QuadPoint> points;
};

Vec cross(const Vec& a, const Vec& b) { return a.cross(b); }

LocalBasis simplex_basis(const Mesh& mesh, index_t e) {
    const auto nodes = mesh.element(e);
    const int d = mesh.dim;
    const int nv = d + 1;
    // barycentric coordinates: solve [x_i; 1] lambda = [x; 1]
    Eigen::MatrixXd a(nv, nv);
    std::vector<Vec> xs;
    for (int i = 0; i < nv; ++i) {
        const auto c = mesh.coords(nodes[i]);
        Vec x(c[0], c[1], c[2]);
        xs.push_back(x);
        for (int k = 0; k < d; ++k) a(k, i) = x[k];
        a(d, i) = 1.0;
    }
    const Eigen::MatrixXd inv = a.inverse(); // lambda = inv * [x; 1]
    auto grad = [inv, d](int i) {
        Vec g = Vec::Zero();
        for (int k = 0; k < d; ++k) g[k] = inv(i, k);
        return g;
    };
    auto lambda = [inv, d](int i, const Vec& x) {
        double s = inv(i, d);
        for (int k = 0; k < d; ++k) s += inv(i, k) * x[k];
        return s;
    };
    auto local = [nodes](index_t g) {
        for (std::size_t i = 0; i < nodes.size(); ++i)
            if (nodes[i] == g) return static_cast<int>(i);
        return -1;
    };

    LocalBasis b;
    for (const auto& ee : mesh.edges_of(e)) b.edges.push_back(ee.edge);
    b.nodes.assign(nodes.begin(), nodes.end());
    b.value = [=, &mesh](index_t edge, const Vec& x) {
        const int t = local(mesh.edges[edge].tail);
        const int h = local(mesh.edges[edge].head);
        return Vec(lambda(t, x) * grad(h) - lambda(h, x) * grad(t));
    };
    b.curl = [=, &mesh](index_t edge, const Vec&) {
        const int t = local(mesh.edges[edge].tail);
        const int h = local(mesh.edges[edge].head);
        return Vec(2.0 * cross(grad(t), grad(h)));
    };
    b.nval = [=](index_t i, const Vec& x) { return lambda(local(i), x); };
    b.ngrad = [=](index_t i, const Vec&) { return grad(local(i)); };

    const double measure = std::abs(a.determinant()) / (d == 2 ? 2.0 : 6.0);
    if (d == 2) {
        for (int i = 0; i < 3; ++i) b.points.push_back({0.5 * (xs[i] + xs[(i + 1) % 3]), measure / 3.0});
    } else {
        const double alpha = 0.5854101966249685, beta = 0.1381966011250105;
        for (int i = 0; i < 4; ++i) {
            Vec x = Vec::Zero();
            for (int k = 0; k < 4; ++k) x += (k == i ? alpha : beta) * xs[k];
            b.points.push_back({x, measure / 4.0});
        }
    }
    return b;
}

LocalBasis box_basis(const Mesh& mesh, index_t e) {
    const auto nodes = mesh.element(e);
    const int d = mesh.dim;
    Vec lo = Vec::Constant(1e300), hi = Vec::Constant(-1e300);
    for (auto n : nodes) {
        const auto c = mesh.coords(n);
        for (int k = 0; k < d; ++k) {
            lo[k] = std::min(lo[k], c[k]);
            hi[k] = std::max(hi[k], c[k]);
        }
    }
    Vec h = Vec::Ones();
    for (int k = 0; k < d; ++k) h[k] = hi[k] - lo[k];
    auto bits = [&mesh, lo, h, d](index_t node) {
        const auto c = mesh.coords(node);
        std::array<int, 3> s{0, 0, 0};
        for (int k = 0; k < d; ++k) s[k] = c[k] > lo[k] + 0.5 * h[k] ? 1 : 0;
        return s;
    };
    auto t_of = [lo, h, d](const Vec& x) {
        Vec t = Vec::Zero();
        for (int k = 0; k < d; ++k) t[k] = (x[k] - lo[k]) / h[k];
        return t;
    };
    auto l1 = [](int bit, double t) { return bit ? t : 1.0 - t; };
    auto dl1 = [](int bit) { return bit ? 1.0 : -1.0; };

    LocalBasis b;
    for (const auto& ee : mesh.edges_of(e)) b.edges.push_back(ee.edge);
    b.nodes.assign(nodes.begin(), nodes.end());
    // g(t) = prod over the other axes of l1(bit, t) ; phi = sign * g / h_dir e_dir
    auto edge_data = [=, &mesh](index_t edge) {
        const auto bt = bits(mesh.edges[edge].tail);
        const auto bh = bits(mesh.edges[edge].head);
        int dir = 0;
        for (int k = 0; k < d; ++k)
            if (bt[k] != bh[k]) dir = k;
        const double sign = bh[dir] > bt[dir] ? 1.0 : -1.0;
        return std::make_tuple(bt, dir, sign);
    };
    b.value = [=](index_t edge, const Vec& x) {
        const auto [bt, dir, sign] = edge_data(edge);
        const Vec t = t_of(x);
        double g = 1.0;
        for (int k = 0; k < d; ++k)
            if (k != dir) g *= l1(bt[k], t[k]);
        Vec v = Vec::Zero();
        v[dir] = sign * g / h[dir];
        return v;
    };
    b.curl = [=](index_t edge, const Vec& x) {
        const auto [bt, dir, sign] = edge_data(edge);
        const Vec t = t_of(x);
        Vec grad = Vec::Zero();
        for (int a = 0; a < d; ++a) {
            if (a == dir) continue;
            double g = dl1(bt[a]) / h[a];
            for (int k = 0; k < d; ++k)
                if (k != dir && k != a) g *= l1(bt[k], t[k]);
            grad[a] = g;
        }
        Vec ed = Vec::Zero();
        ed[dir] = sign / h[dir];
        return Vec(cross(grad, ed));
    };
    b.nval = [=](index_t node, const Vec& x) {
        const auto bn = bits(node);
        const Vec t = t_of(x);
        double v = 1.0;
        for (int k = 0; k < d; ++k) v *= l1(bn[k], t[k]);
        return v;
    };
    b.ngrad = [=](index_t node, const Vec& x) {
        const auto bn = bits(node);
        const Vec t = t_of(x);
        Vec g = Vec::Zero();
        for (int a = 0; a < d; ++a) {
            double v = dl1(bn[a]) / h[a];
            for (int k = 0; k < d; ++k)
                if (k != a) v *= l1(bn[k], t[k]);
            g[a] = v;
        }
        return g;
    };
    const double gp[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
    const int nz = d == 3 ? 2 : 1;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < nz; ++k) {
                Vec x = lo;
                x[0] += gp[i] * h[0];
                x[1] += gp[j] * h[1];
                if (d == 3) x[2] += gp[k] * h[2];
                b.points.push_back({x, h[0] * h[1] * h[2] / (d == 3 ? 8.0 : 4.0)});
            }
    return b;
}

struct OracleMatrices {
    Eigen::MatrixXd S, M, K, Mn;
};

OracleMatrices quadrature_oracle(const Mesh& mesh) {
    const auto ne = static_cast<Eigen::Index>(mesh.num_edges());
    const auto nn = static_cast<Eigen::Index>(mesh.num_nodes());
    OracleMatrices o{Eigen::MatrixXd::Zero(ne, ne), Eigen::MatrixXd::Zero(ne, ne), Eigen::MatrixXd::Zero(nn, nn),
                     Eigen::MatrixXd::Zero(nn, nn)};
    const bool simplex = mesh.element_kind == ElementKind::tri || mesh.element_kind == ElementKind::tet;
    for (index_t e = 0; e < mesh.num_elements(); ++e) {
        const auto b = simplex ? simplex_basis(mesh, e) : box_basis(mesh, e);
        for (const auto& q : b.points) {
            for (auto i : b.edges)
                for (auto j : b.edges) {
                    const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
                    o.S(ii, jj) += q.w * b.curl(i, q.x).dot(b.curl(j, q.x));
                    o.M(ii, jj) += q.w * b.value(i, q.x).dot(b.value(j, q.x));
                }
            for (auto i : b.nodes)
                for (auto j : b.nodes) {
                    const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
                    o.K(ii, jj) += q.w * b.ngrad(i, q.x).dot(b.ngrad(j, q.x));
                    o.Mn(ii, jj) += q.w * b.nval(i, q.x) * b.nval(j, q.x);
                }
        }
    }
    return o;
}

Mesh structured(int dim, ElementKind kind, index_t n, bool dirichlet = false) {
    const std::vector<index_t> shape(dim, n);
    return build_structured_mesh(dim, kind, shape, dirichlet);
}

struct KindCase {
    int dim;
    ElementKind kind;
};

const KindCase kAllKinds[] = {{2, ElementKind::tri}, {2, ElementKind::quad}, {3, ElementKind::tet}, {3, ElementKind::hex}};

// ---------------------------------------------------------------------------

TEST(StructuredMesh, EdgeCountsFromTables) {
    EXPECT_EQ(structured(2, ElementKind::quad, 28).num_edges(), 1512u);
    EXPECT_EQ(structured(2, ElementKind::tri, 28).num_edges(), 2241u);
    EXPECT_EQ(structured(3, ElementKind::tet, 10).num_edges(), 5859u);
}

TEST(StructuredMesh, EdgeCountClosedForms) {
    for (index_t n = 2; n <= 12; ++n) {
        const index_t m = n - 1;
        EXPECT_EQ(structured(2, ElementKind::quad, n).num_edges(), 2 * n * m);
        EXPECT_EQ(structured(2, ElementKind::tri, n).num_edges(), 2 * n * m + m * m);
        EXPECT_EQ(structured(3, ElementKind::hex, n).num_edges(), 3 * n * n * m);
        EXPECT_EQ(structured(3, ElementKind::tet, n).num_edges(), 3 * n * n * m + 3 * n * m * m + m * m * m);
    }
}

TEST(StructuredMesh, EdgesCanonicallyOrientedAndSorted) {
    for (const auto& c : kAllKinds) {
        const auto mesh = structured(c.dim, c.kind, 4);
        for (std::size_t k = 0; k < mesh.edges.size(); ++k) {
            EXPECT_LT(mesh.edges[k].tail, mesh.edges[k].head);
            if (k > 0) {
                const auto& p = mesh.edges[k - 1];
                const auto& q = mesh.edges[k];
                EXPECT_TRUE(p.tail < q.tail || (p.tail == q.tail && p.head < q.head));
            }
        }
    }
}

TEST(DiscreteGradient, SingleEdge) {
    // one triangle: edges (0,1), (0,2), (1,2)
    const auto mesh = mesh_from_elements(2, ElementKind::tri, {0, 0, 1, 0, 0, 1}, {0, 1, 2});
    const auto d = build_discrete_gradient(mesh);
    ASSERT_EQ(d.rows(), 3u);
    EXPECT_EQ(d.at(0, 0), -1.0);
    EXPECT_EQ(d.at(0, 1), 1.0);
    EXPECT_EQ(d.row_nnz(0), 2u);
}

TEST(DiscreteGradient, TwoByTwoQuad) {
    const auto d = build_discrete_gradient(structured(2, ElementKind::quad, 2));
    EXPECT_EQ(d.rows(), 4u);
    EXPECT_EQ(d.cols(), 4u);
    EXPECT_EQ(d.nnz(), 8u);
    for (index_t i = 0; i < 4; ++i) {
        double s = 0.0;
        for (double v : d.row(i).vals) s += v;
        EXPECT_EQ(s, 0.0);
    }
}

TEST(DiscreteGradient, AnnihilatesConstants) {
    for (const auto& c : kAllKinds) {
        const auto d = build_discrete_gradient(structured(c.dim, c.kind, 5));
        std::vector<double> ones(d.cols(), 1.0), y(d.rows());
        d.multiply(ones, y);
        EXPECT_EQ(norm2(y), 0.0);
    }
}

TEST(DiscreteGradient, DirichletRowsKeepOneEntry) {
    const auto mesh = structured(2, ElementKind::tri, 4, true);
    const auto d = build_discrete_gradient(mesh);
    EXPECT_EQ(d.cols(), 4u); // 2x2 interior nodes
    index_t singles = 0;
    for (index_t i = 0; i < d.rows(); ++i) {
        ASSERT_GE(d.row_nnz(i), 1u);
        ASSERT_LE(d.row_nnz(i), 2u);
        if (d.row_nnz(i) == 1) ++singles;
    }
    EXPECT_GT(singles, 0u);
    EXPECT_EQ(d.rows(), free_edges(mesh).size());
}

TEST(CurlCurl, UnitRightTriangle) {
    const auto mesh = mesh_from_elements(2, ElementKind::tri, {0, 0, 1, 0, 0, 1}, {0, 1, 2});
    const auto s = to_eigen(assemble_curl_curl(mesh));
    // curl of the Whitney function of edge (a, b) is 2 grad(la) x grad(lb); |T| = 1/2
    // grad l0 = (-1,-1), grad l1 = (1,0), grad l2 = (0,1)
    // edges (0,1), (0,2), (1,2)
    const Eigen::Vector3d cc(2.0, -2.0, 2.0);
    const Eigen::Matrix3d ref = 0.5 * cc * cc.transpose();
    EXPECT_LE(max_abs(s - ref), 1e-14);
    EXPECT_LE(max_abs(s - quadrature_oracle(mesh).S), 1e-14);
}

TEST(CurlCurl, NullSpaceOfGradient) {
    for (const auto& c : kAllKinds)
        for (bool dirichlet : {false, true}) {
            const auto mesh = structured(c.dim, c.kind, c.dim == 2 ? 10 : 5, dirichlet);
            const auto s = assemble_curl_curl(mesh);
            const auto d = build_discrete_gradient(mesh);
            EXPECT_LE(spgemm(s, d).max_abs(), 1e-12 * s.max_abs()) << to_string(c.kind);
        }
}

TEST(CurlCurl, RankOnThreeByThreeQuad) {
    const auto mesh = structured(2, ElementKind::quad, 3);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(assemble_curl_curl(mesh)));
    const auto& ev = es.eigenvalues();
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (ev[i] > 1e-10 * ev.maxCoeff()) ++rank;
    EXPECT_EQ(static_cast<index_t>(rank), mesh.num_edges() - (mesh.num_nodes() - 1));
}

TEST(Assembly, MatchesQuadratureOracleOnStructuredMeshes) {
    for (const auto& c : kAllKinds) {
        const auto mesh = structured(c.dim, c.kind, 3);
        const auto o = quadrature_oracle(mesh);
        const double sigma = 0.7;
        EXPECT_LE(max_abs(to_eigen(assemble_curl_curl(mesh)) - o.S), 1e-12 * max_abs(o.S)) << to_string(c.kind);
        EXPECT_LE(max_abs(to_eigen(assemble_edge_mass(mesh, sigma)) - sigma * o.M), 1e-12 * max_abs(o.M))
            << to_string(c.kind);
        EXPECT_LE(max_abs(to_eigen(assemble_nodal_problem(mesh, sigma)) - (o.K + sigma * o.Mn)), 1e-12 * max_abs(o.K))
            << to_string(c.kind);
        EXPECT_LE(max_abs(to_eigen(assemble_nodal_mass(mesh)) - o.Mn), 1e-12 * max_abs(o.Mn)) << to_string(c.kind);
    }
}

TEST(Assembly, MatchesQuadratureOracleOnDistortedSimplices) {
    // jittered coordinates, same connectivity as the structured meshes
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> jitter(-0.12, 0.12);
    for (const auto& c : {KindCase{2, ElementKind::tri}, KindCase{3, ElementKind::tet}}) {
        const auto base = structured(c.dim, c.kind, 4);
        auto coords = base.node_coords;
        for (auto& x : coords) x = x * 0.9 + 0.05 + jitter(rng) / 4.0;
        const auto mesh = mesh_from_elements(c.dim, c.kind, coords, base.element_nodes);
        const auto o = quadrature_oracle(mesh);
        EXPECT_LE(max_abs(to_eigen(assemble_curl_curl(mesh)) - o.S), 1e-11 * max_abs(o.S));
        EXPECT_LE(max_abs(to_eigen(assemble_edge_mass(mesh, 1.0)) - o.M), 1e-12 * max_abs(o.M));
        EXPECT_LE(max_abs(to_eigen(assemble_nodal_problem(mesh, 0.0)) - o.K), 1e-11 * max_abs(o.K));
        const auto d = build_discrete_gradient(mesh);
        const auto s = assemble_curl_curl(mesh);
        EXPECT_LE(spgemm(s, d).max_abs(), 1e-12 * s.max_abs());
    }
}

TEST(Assembly, AnisotropicBoxes) {
    // 2 x 1 rectangle and 1 x 2 x 0.5 box
    const auto quad = mesh_from_elements(2, ElementKind::quad, {0, 0, 2, 0, 2, 1, 0, 1}, {0, 1, 2, 3});
    auto o = quadrature_oracle(quad);
    EXPECT_LE(max_abs(to_eigen(assemble_curl_curl(quad)) - o.S), 1e-14);
    EXPECT_LE(max_abs(to_eigen(assemble_edge_mass(quad, 1.0)) - o.M), 1e-14);
    std::vector<double> hc;
    for (int k = 0; k < 2; ++k)
        for (int j = 0; j < 2; ++j)
            for (int i = 0; i < 2; ++i) {
                hc.push_back(1.0 * i);
                hc.push_back(2.0 * j);
                hc.push_back(0.5 * k);
            }
    const auto hex = mesh_from_elements(3, ElementKind::hex, hc, {0, 1, 2, 3, 4, 5, 6, 7});
    o = quadrature_oracle(hex);
    EXPECT_LE(max_abs(to_eigen(assemble_curl_curl(hex)) - o.S), 1e-13);
    EXPECT_LE(max_abs(to_eigen(assemble_edge_mass(hex, 1.0)) - o.M), 1e-14);
    EXPECT_LE(max_abs(to_eigen(assemble_nodal_problem(hex, 0.0)) - o.K), 1e-13);
}

TEST(EdgeMass, LinearInSigmaAndPositiveDefinite) {
    const auto mesh = structured(2, ElementKind::tri, 4);
    const auto m1 = assemble_edge_mass(mesh, 1.0);
    const auto m10 = assemble_edge_mass(mesh, 10.0);
    EXPECT_LE(max_abs(to_eigen(m10) - 10.0 * to_eigen(m1)), 1e-14);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(m1));
    EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
}

TEST(EdgeMass, UnitSquareDiagonalsEqual) {
    const auto mesh = structured(2, ElementKind::quad, 2);
    const auto m = assemble_edge_mass(mesh, 1.0);
    for (index_t i = 1; i < 4; ++i) EXPECT_NEAR(m.at(i, i), m.at(0, 0), 1e-15);
    EXPECT_NEAR(m.at(0, 0), 1.0 / 3.0, 1e-15);
}

TEST(NodalProblem, ZeroSigmaAnnihilatesConstants) {
    for (const auto& c : kAllKinds) {
        const auto a = assemble_nodal_problem(structured(c.dim, c.kind, 5), 0.0);
        std::vector<double> ones(a.rows(), 1.0), y(a.rows());
        a.multiply(ones, y);
        EXPECT_LE(norm2(y), 1e-13) << to_string(c.kind);
    }
}

TEST(NodalProblem, BilinearInteriorStencilIsMeshIndependent) {
    // Q1 stiffness on a uniform square mesh: 8/3 on the diagonal, -1/3 to all eight neighbours
    for (index_t n : {5, 9}) {
        const auto mesh = structured(2, ElementKind::quad, n);
        const auto a = assemble_nodal_problem(mesh, 0.0);
        const index_t c = (n / 2) * n + n / 2;
        EXPECT_NEAR(a.at(c, c), 8.0 / 3.0, 1e-14);
        EXPECT_EQ(a.row_nnz(c), 9u);
        for (index_t j : a.row(c).cols)
            if (j != c) {
                EXPECT_NEAR(a.at(c, j), -1.0 / 3.0, 1e-14);
            }
    }
}

TEST(NodalProblem, SigmaDecomposition) {
    const auto mesh = structured(2, ElementKind::tri, 6);
    const auto a0 = to_eigen(assemble_nodal_problem(mesh, 0.0));
    const auto a1 = to_eigen(assemble_nodal_problem(mesh, 1.0));
    EXPECT_LE(max_abs(a1 - (a0 + to_eigen(assemble_nodal_mass(mesh)))), 1e-14);
}

TEST(Discretize, SymmetryAndNullSpaceForAllKindsAndSigmas) {
    for (const auto& c : kAllKinds)
        for (double sigma : {1e-2, 1.0, 1e2}) {
            const auto sys = discretize(structured(c.dim, c.kind, c.dim == 2 ? 8 : 4), sigma);
            EXPECT_LE(asymmetry(sys.S), 1e-13);
            EXPECT_LE(asymmetry(sys.M), 1e-13);
            EXPECT_LE(asymmetry(sys.A_e), 1e-13);
            EXPECT_LE(asymmetry(sys.A_n), 1e-13);
            EXPECT_LE(spgemm(sys.S, sys.D).max_abs(), 1e-12 * sys.S.max_abs());
            EXPECT_LE(max_abs(to_eigen(sys.A_e) - to_eigen(sys.S) - to_eigen(sys.M)), 1e-13);
        }
}

TEST(Discretize, EdgeOperatorPositive) {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> g;
    const auto sys = discretize(structured(3, ElementKind::tet, 4), 1e-2);
    std::vector<double> x(sys.A_e.rows()), y(x.size());
    for (int trial = 0; trial < 100; ++trial) {
        for (auto& v : x) v = g(rng);
        sys.A_e.multiply(x, y);
        EXPECT_GT(dot(x, y), 0.0);
    }
}

TEST(Mesh, RejectsInvalidInput) {
    const auto flat = mesh_from_elements(2, ElementKind::tri, {0, 0, 1, 0, 2, 0}, {0, 1, 2});
    EXPECT_THROW(assemble_curl_curl(flat), Error);
    EXPECT_THROW(mesh_from_elements(2, ElementKind::tri, {0, 0, 1, 0, 0, 1}, {0, 1, 5}), DimensionError);
    const std::vector<index_t> bad{1, 4};
    EXPECT_THROW(build_structured_mesh(2, ElementKind::quad, bad, false), Error);
    EXPECT_THROW(build_structured_mesh(3, ElementKind::tri, std::vector<index_t>{3, 3, 3}, false), Error);
}

} // namespace
} // namespace hcamg
