#include "hcamg/edge_prolongator.hpp"

#include <algorithm>
#include <array>
#include <string>

namespace hcamg {

namespace {

/// Coarse triangle containing a point given in fine lattice units, and the
/// barycentric coordinates of that point. Lower triangles (u >= v) are
/// (n00, n10, n11), upper ones (n00, n11, n01).
struct Located {
    std::array<index_t, 3> nodes;
    std::array<double, 3> lambda;
    std::array<std::array<double, 2>, 3> grad; // in coarse-cell units
};

Located locate(double x, double y, index_t m, index_t nc) {
    const double fm = static_cast<double>(m);
    auto cell = [&](double t) {
        const auto c = static_cast<index_t>(t / fm);
        return std::min(c, nc - 2);
    };
    const index_t ci = cell(x);
    const index_t cj = cell(y);
    const double u = x / fm - static_cast<double>(ci);
    const double v = y / fm - static_cast<double>(cj);
    auto id = [&](index_t i, index_t j) { return i + nc * j; };
    Located l;
    if (u >= v) {
        l.nodes = {id(ci, cj), id(ci + 1, cj), id(ci + 1, cj + 1)};
        l.lambda = {1.0 - u, u - v, v};
        l.grad = {{{-1.0, 0.0}, {1.0, -1.0}, {0.0, 1.0}}};
    } else {
        l.nodes = {id(ci, cj), id(ci + 1, cj + 1), id(ci, cj + 1)};
        l.lambda = {1.0 - v, u, v - u};
        l.grad = {{{0.0, -1.0}, {1.0, 0.0}, {-1.0, 1.0}}};
    }
    return l;
}

index_t find_edge(const Mesh& mesh, index_t a, index_t b) {
    const Edge key{std::min(a, b), std::max(a, b)};
    const auto it = std::lower_bound(mesh.edges.begin(), mesh.edges.end(), key, [](const Edge& p, const Edge& q) {
        return p.tail != q.tail ? p.tail < q.tail : p.head < q.head;
    });
    if (it == mesh.edges.end() || it->tail != key.tail || it->head != key.head)
        throw Error("coarse edge lookup failed");
    return static_cast<index_t>(it - mesh.edges.begin());
}

} // namespace

IdealValidationReport validate_ideal_stationarity(index_t coarse_nodes, index_t refine) {
    if (coarse_nodes < 2 || refine < 1) throw Error("validate_ideal_stationarity: invalid coarse mesh or refinement");
    const index_t nc = coarse_nodes;
    const index_t m = refine;
    const index_t nf = (nc - 1) * m + 1;
    const std::array<index_t, 2> cshape{nc, nc};
    const std::array<index_t, 2> fshape{nf, nf};
    const Mesh coarse = build_structured_mesh(2, ElementKind::tri, cshape, false);
    const Mesh fine = build_structured_mesh(2, ElementKind::tri, fshape, false);
    // cell size ratio between lattice units and the unit square
    const double hc = 1.0 / static_cast<double>(nc - 1);

    std::vector<Triplet> pn;
    for (index_t j = 0; j < nf; ++j)
        for (index_t i = 0; i < nf; ++i) {
            const auto l = locate(static_cast<double>(i), static_cast<double>(j), m, nc);
            for (int k = 0; k < 3; ++k)
                if (l.lambda[k] != 0.0) pn.push_back({i + nf * j, l.nodes[k], l.lambda[k]});
        }
    const auto p_n = SparseMatrix::from_triplets(fine.num_nodes(), coarse.num_nodes(), pn);

    std::vector<Triplet> p0;
    std::vector<char> interior(fine.num_edges(), 0);
    for (index_t e = 0; e < fine.num_edges(); ++e) {
        const auto& fe = fine.edges[e];
        const auto ta = static_cast<long long>(fe.tail % nf), tb = static_cast<long long>(fe.tail / nf);
        const auto ha = static_cast<long long>(fe.head % nf), hb = static_cast<long long>(fe.head / nf);
        const long long twice_x = ta + ha;
        const long long twice_y = tb + hb;
        const auto period = static_cast<long long>(2 * m);
        auto on_line = [&](long long v) { return ((v % period) + period) % period == 0; };
        interior[e] = !(on_line(twice_x) || on_line(twice_y) || on_line(twice_x - twice_y)) ? 1 : 0;

        const auto l = locate(0.5 * static_cast<double>(twice_x), 0.5 * static_cast<double>(twice_y), m, nc);
        // tangent in unit-square coordinates; gradients scale by 1/hc
        const std::array<double, 2> t{static_cast<double>(ha - ta) * hc / static_cast<double>(m),
                                      static_cast<double>(hb - tb) * hc / static_cast<double>(m)};
        constexpr std::array<std::array<int, 2>, 3> local{{{0, 1}, {1, 2}, {2, 0}}};
        for (const auto& le : local) {
            int a = le[0];
            int b = le[1];
            if (l.nodes[a] > l.nodes[b]) std::swap(a, b);
            // whitney function lambda_a grad lambda_b - lambda_b grad lambda_a
            double val = 0.0;
            for (int d = 0; d < 2; ++d)
                val += (l.lambda[a] * l.grad[b][d] - l.lambda[b] * l.grad[a][d]) / hc * t[d];
            if (val != 0.0) p0.push_back({e, find_edge(coarse, l.nodes[a], l.nodes[b]), val});
        }
    }
    const auto p_0 = SparseMatrix::from_triplets(fine.num_edges(), coarse.num_edges(), p0);

    IdealValidationReport rep;
    rep.coarse_edges = coarse.num_edges();
    rep.fine_edges = fine.num_edges();
    const auto d_H = build_discrete_gradient(coarse);
    const auto d_h = build_discrete_gradient(fine);
    rep.feasibility_residual = commutator_residual(p_0, d_H, d_h, p_n);

    const auto s = assemble_curl_curl(fine);
    const auto sp = spgemm(s, p_0);
    for (index_t e = 0; e < fine.num_edges(); ++e) {
        if (!interior[e]) continue;
        ++rep.interior_rows;
        for (double v : sp.row(e).vals) rep.interior_gradient = std::max(rep.interior_gradient, std::abs(v));
    }
    return rep;
}

} // namespace hcamg
