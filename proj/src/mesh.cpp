#include "hcamg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hcamg {

namespace {

constexpr std::array<std::array<int, 2>, 3> kTriEdges{{{0, 1}, {1, 2}, {2, 0}}};
constexpr std::array<std::array<int, 2>, 4> kQuadEdges{{{0, 1}, {1, 2}, {2, 3}, {3, 0}}};
constexpr std::array<std::array<int, 2>, 6> kTetEdges{{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
// x-edges at (b,c) = (0,0),(1,0),(0,1),(1,1); y-edges at (a,c); z-edges at (a,b)
constexpr std::array<std::array<int, 2>, 12> kHexEdges{{{0, 1}, {2, 3}, {4, 5}, {6, 7},
                                                       {0, 2}, {1, 3}, {4, 6}, {5, 7},
                                                       {0, 4}, {1, 5}, {2, 6}, {3, 7}}};

using Vec3 = std::array<double, 3>;

Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
double dot3(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

/// Barycentric gradients and measure of a simplex (2D or 3D).
struct SimplexGeometry {
    std::array<Vec3, 4> grad{}; // gradient of lambda_k
    double measure = 0.0;
    double signed_det = 0.0;
};

SimplexGeometry simplex_geometry(const Mesh& mesh, std::span<const index_t> nodes, index_t element) {
    SimplexGeometry g;
    const int d = mesh.dim;
    const Vec3 x0 = mesh.coords(nodes[0]);
    if (d == 2) {
        const Vec3 e1 = sub(mesh.coords(nodes[1]), x0);
        const Vec3 e2 = sub(mesh.coords(nodes[2]), x0);
        const double det = e1[0] * e2[1] - e1[1] * e2[0];
        const double scale = std::max(dot3(e1, e1), dot3(e2, e2));
        if (std::abs(det) <= 1e-14 * scale) throw Error("degenerate element " + std::to_string(element));
        // rows of J^{-1}, J = [e1 e2]
        g.grad[1] = {e2[1] / det, -e2[0] / det, 0.0};
        g.grad[2] = {-e1[1] / det, e1[0] / det, 0.0};
        g.measure = std::abs(det) / 2.0;
        g.signed_det = det;
    } else {
        const Vec3 e1 = sub(mesh.coords(nodes[1]), x0);
        const Vec3 e2 = sub(mesh.coords(nodes[2]), x0);
        const Vec3 e3 = sub(mesh.coords(nodes[3]), x0);
        const double det = dot3(e1, cross(e2, e3));
        const double scale = std::pow(std::max({dot3(e1, e1), dot3(e2, e2), dot3(e3, e3)}), 1.5);
        if (std::abs(det) <= 1e-14 * scale) throw Error("degenerate element " + std::to_string(element));
        const Vec3 c23 = cross(e2, e3);
        const Vec3 c31 = cross(e3, e1);
        const Vec3 c12 = cross(e1, e2);
        for (int i = 0; i < 3; ++i) {
            g.grad[1][i] = c23[i] / det;
            g.grad[2][i] = c31[i] / det;
            g.grad[3][i] = c12[i] / det;
        }
        g.measure = std::abs(det) / 6.0;
        g.signed_det = det;
    }
    for (int i = 0; i < 3; ++i) {
        g.grad[0][i] = 0.0;
        for (int k = 1; k <= d; ++k) g.grad[0][i] -= g.grad[k][i];
    }
    return g;
}

/// Box extents of an axis-aligned quad/hex element.
Vec3 box_extents(const Mesh& mesh, std::span<const index_t> nodes, index_t element) {
    const Vec3 x0 = mesh.coords(nodes[0]);
    Vec3 h{1.0, 1.0, 1.0};
    h[0] = mesh.coords(nodes[1])[0] - x0[0];
    if (mesh.element_kind == ElementKind::quad) {
        h[1] = mesh.coords(nodes[3])[1] - x0[1];
    } else {
        h[1] = mesh.coords(nodes[2])[1] - x0[1];
        h[2] = mesh.coords(nodes[4])[2] - x0[2];
    }
    for (double v : h)
        if (!(v > 0.0)) throw Error("degenerate element " + std::to_string(element));
    return h;
}

/// 1D linear-element mass entry for a pair of end-point sides.
double mass1d(int a, int b) { return a == b ? 1.0 / 3.0 : 1.0 / 6.0; }
double stiff1d(int a, int b) { return a == b ? 1.0 : -1.0; }

struct Assembler {
    index_t n;
    std::vector<index_t> map; // global -> free index or npos
    std::vector<Triplet> entries;

    void add(index_t gi, index_t gj, double v) {
        const auto i = map[gi];
        const auto j = map[gj];
        if (i != npos && j != npos) entries.push_back({i, j, v});
    }
    SparseMatrix finish() { return compress(SparseMatrix::from_triplets(n, n, entries)); }
};

Assembler edge_assembler(const Mesh& mesh) {
    const auto fe = free_edges(mesh);
    Assembler a{fe.size(), std::vector<index_t>(mesh.num_edges(), npos), {}};
    for (index_t k = 0; k < fe.size(); ++k) a.map[fe[k]] = k;
    a.entries.reserve(mesh.num_elements() * mesh.edges_per_element() * mesh.edges_per_element());
    return a;
}

Assembler node_assembler(const Mesh& mesh) {
    const auto fn = free_nodes(mesh);
    Assembler a{fn.size(), std::vector<index_t>(mesh.num_nodes(), npos), {}};
    for (index_t k = 0; k < fn.size(); ++k) a.map[fn[k]] = k;
    a.entries.reserve(mesh.num_elements() * mesh.nodes_per_element() * mesh.nodes_per_element());
    return a;
}

/// Local curl-curl matrix in local-traversal edge orientation.
std::vector<double> local_curl_curl(const Mesh& mesh, index_t element) {
    const auto nodes = mesh.element(element);
    const index_t ne = mesh.edges_per_element();
    std::vector<double> s(ne * ne, 0.0);
    switch (mesh.element_kind) {
    case ElementKind::tri:
    case ElementKind::quad: {
        // the curl of every locally-traversed edge function is +1/|T| on a
        // counter-clockwise element, so C is a row of ones (times orientation)
        double area;
        double orient;
        if (mesh.element_kind == ElementKind::tri) {
            const auto g = simplex_geometry(mesh, nodes, element);
            area = g.measure;
            orient = g.signed_det > 0.0 ? 1.0 : -1.0;
        } else {
            const auto h = box_extents(mesh, nodes, element);
            area = h[0] * h[1];
            orient = 1.0;
        }
        for (index_t i = 0; i < ne; ++i)
            for (index_t j = 0; j < ne; ++j) s[i * ne + j] = orient * orient / area;
        break;
    }
    case ElementKind::tet: {
        const auto g = simplex_geometry(mesh, nodes, element);
        // signed face-edge incidence with outward face orientation
        std::array<std::array<double, 6>, 4> c{};
        std::array<Vec3, 4> area_vec{};
        for (int f = 0; f < 4; ++f) {
            std::array<int, 3> v{};
            int t = 0;
            for (int k = 0; k < 4; ++k)
                if (k != f) v[t++] = k;
            const Vec3 xp = mesh.coords(nodes[v[0]]);
            Vec3 normal = cross(sub(mesh.coords(nodes[v[1]]), xp), sub(mesh.coords(nodes[v[2]]), xp));
            if (dot3(normal, sub(xp, mesh.coords(nodes[f]))) < 0.0) {
                std::swap(v[1], v[2]);
                normal = {-normal[0], -normal[1], -normal[2]};
            }
            area_vec[f] = {normal[0] / 2.0, normal[1] / 2.0, normal[2] / 2.0};
            const std::array<std::array<int, 2>, 3> loop{{{v[0], v[1]}, {v[1], v[2]}, {v[2], v[0]}}};
            for (const auto& seg : loop) {
                for (int e = 0; e < 6; ++e) {
                    if (kTetEdges[e][0] == seg[0] && kTetEdges[e][1] == seg[1]) c[f][e] = 1.0;
                    if (kTetEdges[e][0] == seg[1] && kTetEdges[e][1] == seg[0]) c[f][e] = -1.0;
                }
            }
        }
        // K = |T| Fᵀ F with F = (A Aᵀ)^{-1} A, A = [outward area vectors]
        double aat[3][3] = {};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                for (int f = 0; f < 4; ++f) aat[i][j] += area_vec[f][i] * area_vec[f][j];
        const double det = aat[0][0] * (aat[1][1] * aat[2][2] - aat[1][2] * aat[2][1]) -
                           aat[0][1] * (aat[1][0] * aat[2][2] - aat[1][2] * aat[2][0]) +
                           aat[0][2] * (aat[1][0] * aat[2][1] - aat[1][1] * aat[2][0]);
        double inv[3][3];
        inv[0][0] = (aat[1][1] * aat[2][2] - aat[1][2] * aat[2][1]) / det;
        inv[0][1] = (aat[0][2] * aat[2][1] - aat[0][1] * aat[2][2]) / det;
        inv[0][2] = (aat[0][1] * aat[1][2] - aat[0][2] * aat[1][1]) / det;
        inv[1][0] = (aat[1][2] * aat[2][0] - aat[1][0] * aat[2][2]) / det;
        inv[1][1] = (aat[0][0] * aat[2][2] - aat[0][2] * aat[2][0]) / det;
        inv[1][2] = (aat[0][2] * aat[1][0] - aat[0][0] * aat[1][2]) / det;
        inv[2][0] = (aat[1][0] * aat[2][1] - aat[1][1] * aat[2][0]) / det;
        inv[2][1] = (aat[0][1] * aat[2][0] - aat[0][0] * aat[2][1]) / det;
        inv[2][2] = (aat[0][0] * aat[1][1] - aat[0][1] * aat[1][0]) / det;
        std::array<Vec3, 4> fcol{};
        for (int f = 0; f < 4; ++f)
            for (int i = 0; i < 3; ++i)
                fcol[f][i] = inv[i][0] * area_vec[f][0] + inv[i][1] * area_vec[f][1] + inv[i][2] * area_vec[f][2];
        double k[4][4];
        for (int f = 0; f < 4; ++f)
            for (int h = 0; h < 4; ++h) k[f][h] = g.measure * dot3(fcol[f], fcol[h]);
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j) {
                double v = 0.0;
                for (int f = 0; f < 4; ++f) {
                    if (c[f][i] == 0.0) continue;
                    for (int h = 0; h < 4; ++h) v += c[f][i] * k[f][h] * c[h][j];
                }
                s[i * ne + j] = v;
            }
        break;
    }
    case ElementKind::hex: {
        const auto h = box_extents(mesh, nodes, element);
        // face f = 2*axis + side, flux oriented along +axis
        std::array<std::array<double, 12>, 6> c{};
        for (int side = 0; side < 2; ++side) {
            auto& fx = c[0 + side];
            fx[4 + side] = 1.0;
            fx[6 + side] = -1.0;
            fx[10 + side] = 1.0;
            fx[8 + side] = -1.0;
            auto& fy = c[2 + side];
            fy[8 + 2 * side] = 1.0;
            fy[9 + 2 * side] = -1.0;
            fy[2 + side] = 1.0;
            fy[0 + side] = -1.0;
            auto& fz = c[4 + side];
            fz[2 * side] = 1.0;
            fz[1 + 2 * side] = -1.0;
            fz[5 + 2 * side] = 1.0;
            fz[4 + 2 * side] = -1.0;
        }
        // face-function mass: the two faces normal to one axis couple, different axes do not
        const double w[3] = {h[0] / (h[1] * h[2]), h[1] / (h[0] * h[2]), h[2] / (h[0] * h[1])};
        double k[6][6] = {};
        for (int ax = 0; ax < 3; ++ax)
            for (int s1 = 0; s1 < 2; ++s1)
                for (int s2 = 0; s2 < 2; ++s2) k[2 * ax + s1][2 * ax + s2] = w[ax] * mass1d(s1, s2);
        for (int i = 0; i < 12; ++i)
            for (int j = 0; j < 12; ++j) {
                double v = 0.0;
                for (int f = 0; f < 6; ++f) {
                    if (c[f][i] == 0.0) continue;
                    for (int g2 = 0; g2 < 6; ++g2) v += c[f][i] * k[f][g2] * c[g2][j];
                }
                s[i * ne + j] = v;
            }
        break;
    }
    }
    return s;
}

/// Local unit-sigma edge mass matrix in local-traversal orientation.
std::vector<double> local_edge_mass(const Mesh& mesh, index_t element) {
    const auto nodes = mesh.element(element);
    const index_t ne = mesh.edges_per_element();
    std::vector<double> m(ne * ne, 0.0);
    const auto table = local_edges(mesh.element_kind);
    switch (mesh.element_kind) {
    case ElementKind::tri:
    case ElementKind::tet: {
        const auto g = simplex_geometry(mesh, nodes, element);
        const double denom = mesh.dim == 2 ? 12.0 : 20.0;
        auto lam = [&](int i, int j) { return g.measure * (i == j ? 2.0 : 1.0) / denom; };
        auto gg = [&](int i, int j) { return dot3(g.grad[i], g.grad[j]); };
        for (index_t e = 0; e < ne; ++e) {
            const int a = table[e][0], b = table[e][1];
            for (index_t f = 0; f < ne; ++f) {
                const int c = table[f][0], d = table[f][1];
                m[e * ne + f] = lam(a, c) * gg(b, d) - lam(a, d) * gg(b, c) - lam(b, c) * gg(a, d) +
                                lam(b, d) * gg(a, c);
            }
        }
        break;
    }
    case ElementKind::quad: {
        const auto h = box_extents(mesh, nodes, element);
        // local edge -> (axis, side, direction of local traversal along +axis)
        const int axis[4] = {0, 1, 0, 1};
        const int side[4] = {0, 1, 1, 0};
        const double dir[4] = {1.0, 1.0, -1.0, -1.0};
        for (int e = 0; e < 4; ++e)
            for (int f = 0; f < 4; ++f) {
                if (axis[e] != axis[f]) continue;
                const double scale = axis[e] == 0 ? h[1] / h[0] : h[0] / h[1];
                m[e * 4 + f] = dir[e] * dir[f] * scale * mass1d(side[e], side[f]);
            }
        break;
    }
    case ElementKind::hex: {
        const auto h = box_extents(mesh, nodes, element);
        // edge e: axis e/4, transverse sides encoded in e%4 as (s1 + 2 s2)
        for (int e = 0; e < 12; ++e)
            for (int f = 0; f < 12; ++f) {
                const int ax = e / 4;
                if (f / 4 != ax) continue;
                const int ea = e % 4, fa = f % 4;
                const int t1 = (ax + 1) % 3, t2 = (ax + 2) % 3;
                // transverse axes in ascending order
                const int lo = std::min(t1, t2), hi = std::max(t1, t2);
                const double scale = h[lo] * h[hi] / h[ax];
                m[e * 12 + f] = scale * mass1d(ea & 1, fa & 1) * mass1d(ea >> 1, fa >> 1);
            }
        break;
    }
    }
    return m;
}

} // namespace

std::string_view to_string(ElementKind kind) {
    switch (kind) {
    case ElementKind::tri: return "tri";
    case ElementKind::quad: return "quad";
    case ElementKind::tet: return "tet";
    case ElementKind::hex: return "hex";
    }
    return "unknown";
}

index_t Mesh::nodes_per_element() const {
    switch (element_kind) {
    case ElementKind::tri: return 3;
    case ElementKind::quad: return 4;
    case ElementKind::tet: return 4;
    case ElementKind::hex: return 8;
    }
    return 0;
}

index_t Mesh::edges_per_element() const { return local_edges(element_kind).size(); }

std::array<double, 3> Mesh::coords(index_t node) const {
    std::array<double, 3> x{0.0, 0.0, 0.0};
    for (int d = 0; d < dim; ++d) x[d] = node_coords[node * dim + d];
    return x;
}

std::span<const std::array<int, 2>> local_edges(ElementKind kind) {
    switch (kind) {
    case ElementKind::tri: return kTriEdges;
    case ElementKind::quad: return kQuadEdges;
    case ElementKind::tet: return kTetEdges;
    case ElementKind::hex: return kHexEdges;
    }
    return {};
}

Mesh mesh_from_elements(int dim, ElementKind kind, std::vector<double> node_coords,
                        std::vector<index_t> element_nodes, std::vector<char> dirichlet_nodes) {
    const bool is2d = kind == ElementKind::tri || kind == ElementKind::quad;
    if ((dim == 2) != is2d || (dim != 2 && dim != 3))
        throw Error("unsupported combination: dim " + std::to_string(dim) + " with " +
                    std::string(to_string(kind)) + " elements");
    Mesh mesh;
    mesh.dim = dim;
    mesh.element_kind = kind;
    mesh.node_coords = std::move(node_coords);
    mesh.element_nodes = std::move(element_nodes);
    mesh.dirichlet_nodes = std::move(dirichlet_nodes);
    if (mesh.node_coords.size() % dim != 0) throw DimensionError("coordinate array not a multiple of dim");
    if (mesh.element_nodes.size() % mesh.nodes_per_element() != 0)
        throw DimensionError("element connectivity length not a multiple of nodes per element");
    if (!mesh.dirichlet_nodes.empty() && mesh.dirichlet_nodes.size() != mesh.num_nodes())
        throw DimensionError("dirichlet flag array must have one entry per node");
    const index_t nn = mesh.num_nodes();
    for (auto v : mesh.element_nodes)
        if (v >= nn) throw DimensionError("element references node out of range");

    const auto table = local_edges(kind);
    std::vector<std::pair<index_t, index_t>> pairs;
    pairs.reserve(mesh.num_elements() * table.size());
    for (index_t e = 0; e < mesh.num_elements(); ++e) {
        const auto nodes = mesh.element(e);
        for (const auto& le : table) {
            const auto a = nodes[le[0]];
            const auto b = nodes[le[1]];
            if (a == b) throw Error("element " + std::to_string(e) + " has a collapsed edge");
            pairs.emplace_back(std::min(a, b), std::max(a, b));
        }
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    mesh.edges.reserve(pairs.size());
    for (const auto& p : pairs) mesh.edges.push_back({p.first, p.second});

    mesh.element_edges.reserve(mesh.num_elements() * table.size());
    for (index_t e = 0; e < mesh.num_elements(); ++e) {
        const auto nodes = mesh.element(e);
        for (const auto& le : table) {
            const auto a = nodes[le[0]];
            const auto b = nodes[le[1]];
            const std::pair<index_t, index_t> key{std::min(a, b), std::max(a, b)};
            const auto it = std::lower_bound(pairs.begin(), pairs.end(), key);
            mesh.element_edges.push_back({static_cast<index_t>(it - pairs.begin()), a < b ? 1 : -1});
        }
    }
    return mesh;
}

Mesh build_structured_mesh(int dim, ElementKind kind, std::span<const index_t> nodal_shape, bool dirichlet) {
    const bool is2d = kind == ElementKind::tri || kind == ElementKind::quad;
    if ((dim == 2) != is2d || (dim != 2 && dim != 3))
        throw Error("unsupported combination: dim " + std::to_string(dim) + " with " +
                    std::string(to_string(kind)) + " elements");
    if (nodal_shape.size() != static_cast<std::size_t>(dim))
        throw DimensionError("nodal_shape must have one entry per dimension");
    for (auto n : nodal_shape)
        if (n < 2) throw Error("nodal_shape entries must be at least 2");

    const index_t nx = nodal_shape[0];
    const index_t ny = nodal_shape[1];
    const index_t nz = dim == 3 ? nodal_shape[2] : 1;
    const index_t nn = nx * ny * nz;
    auto id = [&](index_t i, index_t j, index_t k) { return i + nx * (j + ny * k); };

    std::vector<double> coords(nn * dim);
    std::vector<char> flags;
    if (dirichlet) flags.assign(nn, 0);
    for (index_t k = 0; k < nz; ++k)
        for (index_t j = 0; j < ny; ++j)
            for (index_t i = 0; i < nx; ++i) {
                const auto v = id(i, j, k);
                coords[v * dim + 0] = static_cast<double>(i) / static_cast<double>(nx - 1);
                coords[v * dim + 1] = static_cast<double>(j) / static_cast<double>(ny - 1);
                if (dim == 3) coords[v * dim + 2] = static_cast<double>(k) / static_cast<double>(nz - 1);
                if (dirichlet) {
                    bool boundary = i == 0 || i == nx - 1 || j == 0 || j == ny - 1;
                    if (dim == 3) boundary = boundary || k == 0 || k == nz - 1;
                    flags[v] = boundary ? 1 : 0;
                }
            }

    std::vector<index_t> elems;
    if (dim == 2) {
        for (index_t j = 0; j + 1 < ny; ++j)
            for (index_t i = 0; i + 1 < nx; ++i) {
                const auto n00 = id(i, j, 0), n10 = id(i + 1, j, 0);
                const auto n01 = id(i, j + 1, 0), n11 = id(i + 1, j + 1, 0);
                if (kind == ElementKind::quad) {
                    elems.insert(elems.end(), {n00, n10, n11, n01});
                } else {
                    elems.insert(elems.end(), {n00, n10, n11});
                    elems.insert(elems.end(), {n00, n11, n01});
                }
            }
    } else {
        constexpr std::array<std::array<int, 3>, 6> perms{
            {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
        for (index_t k = 0; k + 1 < nz; ++k)
            for (index_t j = 0; j + 1 < ny; ++j)
                for (index_t i = 0; i + 1 < nx; ++i) {
                    if (kind == ElementKind::hex) {
                        for (int c = 0; c < 2; ++c)
                            for (int b = 0; b < 2; ++b)
                                for (int a = 0; a < 2; ++a) elems.push_back(id(i + a, j + b, k + c));
                    } else {
                        for (const auto& p : perms) {
                            std::array<index_t, 3> off{0, 0, 0};
                            elems.push_back(id(i, j, k));
                            for (int s = 0; s < 3; ++s) {
                                off[p[s]] = 1;
                                elems.push_back(id(i + off[0], j + off[1], k + off[2]));
                            }
                        }
                    }
                }
    }
    Mesh mesh = mesh_from_elements(dim, kind, std::move(coords), std::move(elems), std::move(flags));
    mesh.nodal_shape.assign(nodal_shape.begin(), nodal_shape.end());
    return mesh;
}

std::vector<index_t> free_nodes(const Mesh& mesh) {
    std::vector<index_t> out;
    out.reserve(mesh.num_nodes());
    for (index_t v = 0; v < mesh.num_nodes(); ++v)
        if (!mesh.is_dirichlet(v)) out.push_back(v);
    return out;
}

std::vector<index_t> free_edges(const Mesh& mesh) {
    std::vector<index_t> out;
    out.reserve(mesh.num_edges());
    for (index_t e = 0; e < mesh.num_edges(); ++e)
        if (!mesh.is_dirichlet(mesh.edges[e].tail) || !mesh.is_dirichlet(mesh.edges[e].head)) out.push_back(e);
    return out;
}

SparseMatrix build_discrete_gradient(const Mesh& mesh) {
    const auto fe = free_edges(mesh);
    const auto fn = free_nodes(mesh);
    std::vector<index_t> node_map(mesh.num_nodes(), npos);
    for (index_t k = 0; k < fn.size(); ++k) node_map[fn[k]] = k;
    std::vector<Triplet> entries;
    entries.reserve(2 * fe.size());
    for (index_t r = 0; r < fe.size(); ++r) {
        const auto& e = mesh.edges[fe[r]];
        if (node_map[e.tail] != npos) entries.push_back({r, node_map[e.tail], -1.0});
        if (node_map[e.head] != npos) entries.push_back({r, node_map[e.head], 1.0});
    }
    return SparseMatrix::from_triplets(fe.size(), fn.size(), entries);
}

SparseMatrix assemble_curl_curl(const Mesh& mesh) {
    auto asmb = edge_assembler(mesh);
    const index_t ne = mesh.edges_per_element();
    for (index_t el = 0; el < mesh.num_elements(); ++el) {
        const auto s = local_curl_curl(mesh, el);
        const auto ee = mesh.edges_of(el);
        for (index_t i = 0; i < ne; ++i)
            for (index_t j = 0; j < ne; ++j)
                asmb.add(ee[i].edge, ee[j].edge, ee[i].sign * ee[j].sign * s[i * ne + j]);
    }
    return asmb.finish();
}

SparseMatrix assemble_edge_mass(const Mesh& mesh, double sigma) {
    if (!(sigma > 0.0)) throw Error("edge mass requires sigma > 0");
    auto asmb = edge_assembler(mesh);
    const index_t ne = mesh.edges_per_element();
    for (index_t el = 0; el < mesh.num_elements(); ++el) {
        const auto m = local_edge_mass(mesh, el);
        const auto ee = mesh.edges_of(el);
        for (index_t i = 0; i < ne; ++i)
            for (index_t j = 0; j < ne; ++j)
                asmb.add(ee[i].edge, ee[j].edge, sigma * ee[i].sign * ee[j].sign * m[i * ne + j]);
    }
    return asmb.finish();
}

namespace {

SparseMatrix assemble_nodal(const Mesh& mesh, double stiffness_weight, double mass_weight) {
    auto asmb = node_assembler(mesh);
    const index_t nv = mesh.nodes_per_element();
    for (index_t el = 0; el < mesh.num_elements(); ++el) {
        const auto nodes = mesh.element(el);
        switch (mesh.element_kind) {
        case ElementKind::tri:
        case ElementKind::tet: {
            const auto g = simplex_geometry(mesh, nodes, el);
            const double denom = mesh.dim == 2 ? 12.0 : 20.0;
            for (index_t i = 0; i < nv; ++i)
                for (index_t j = 0; j < nv; ++j) {
                    const double k = g.measure * dot3(g.grad[i], g.grad[j]);
                    const double m = g.measure * (i == j ? 2.0 : 1.0) / denom;
                    asmb.add(nodes[i], nodes[j], stiffness_weight * k + mass_weight * m);
                }
            break;
        }
        case ElementKind::quad: {
            const auto h = box_extents(mesh, nodes, el);
            const int ax[4] = {0, 1, 1, 0};
            const int ay[4] = {0, 0, 1, 1};
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j) {
                    const double mx = h[0] * mass1d(ax[i], ax[j]), my = h[1] * mass1d(ay[i], ay[j]);
                    const double kx = stiff1d(ax[i], ax[j]) / h[0], ky = stiff1d(ay[i], ay[j]) / h[1];
                    asmb.add(nodes[i], nodes[j], stiffness_weight * (kx * my + mx * ky) + mass_weight * mx * my);
                }
            break;
        }
        case ElementKind::hex: {
            const auto h = box_extents(mesh, nodes, el);
            for (int i = 0; i < 8; ++i)
                for (int j = 0; j < 8; ++j) {
                    const int a[3] = {i & 1, (i >> 1) & 1, (i >> 2) & 1};
                    const int b[3] = {j & 1, (j >> 1) & 1, (j >> 2) & 1};
                    double m[3], k[3];
                    for (int d = 0; d < 3; ++d) {
                        m[d] = h[d] * mass1d(a[d], b[d]);
                        k[d] = stiff1d(a[d], b[d]) / h[d];
                    }
                    const double stiff = k[0] * m[1] * m[2] + m[0] * k[1] * m[2] + m[0] * m[1] * k[2];
                    asmb.add(nodes[i], nodes[j], stiffness_weight * stiff + mass_weight * m[0] * m[1] * m[2]);
                }
            break;
        }
        }
    }
    return asmb.finish();
}

} // namespace

SparseMatrix assemble_nodal_problem(const Mesh& mesh, double sigma) {
    if (sigma < 0.0) throw Error("nodal problem requires sigma >= 0");
    return assemble_nodal(mesh, 1.0, sigma);
}

SparseMatrix assemble_nodal_mass(const Mesh& mesh) { return assemble_nodal(mesh, 0.0, 1.0); }

DiscretizedSystem discretize(const Mesh& mesh, double sigma) {
    DiscretizedSystem sys;
    sys.sigma = sigma;
    sys.S = assemble_curl_curl(mesh);
    sys.M = assemble_edge_mass(mesh, sigma);
    sys.A_e = add(sys.S, sys.M);
    sys.A_n = assemble_nodal_problem(mesh, sigma);
    sys.D = build_discrete_gradient(mesh);
    return sys;
}

} // namespace hcamg
