/// @file mesh.hpp
/// @brief Structured simplicial/tensor meshes and lowest-order edge-element assembly.
///
/// Edges carry the canonical orientation tail < head (global node numbers), so the
/// discrete gradient row of an edge is -1 at the tail and +1 at the head. Edge
/// degrees of freedom are tangential line integrals, which makes the gradient of a
/// nodal function exactly representable and S*D vanish to round-off.

#pragma once

#include "hcamg/sparse.hpp"

#include <array>
#include <span>
#include <string_view>
#include <vector>

namespace hcamg {

enum class ElementKind { tri, quad, tet, hex };

std::string_view to_string(ElementKind kind);

struct Edge {
    index_t tail;
    index_t head;
};

/// Reference from an element to one of its edges. sign is +1 when the element's
/// local traversal of the edge agrees with tail -> head.
struct ElementEdge {
    index_t edge;
    int sign;
};

struct Mesh {
    int dim = 2;
    ElementKind element_kind = ElementKind::tri;
    std::vector<index_t> nodal_shape;
    std::vector<double> node_coords; ///< nnodes x dim, row-major
    std::vector<Edge> edges;         ///< sorted lexicographically by (tail, head)
    std::vector<index_t> element_nodes;
    std::vector<ElementEdge> element_edges;
    std::vector<char> dirichlet_nodes;

    index_t num_nodes() const { return static_cast<index_t>(node_coords.size()) / dim; }
    index_t num_edges() const { return edges.size(); }
    index_t num_elements() const { return element_nodes.size() / nodes_per_element(); }
    index_t nodes_per_element() const;
    index_t edges_per_element() const;

    std::span<const index_t> element(index_t e) const {
        return std::span<const index_t>(element_nodes).subspan(e * nodes_per_element(), nodes_per_element());
    }
    std::span<const ElementEdge> edges_of(index_t e) const {
        return std::span<const ElementEdge>(element_edges).subspan(e * edges_per_element(), edges_per_element());
    }
    std::array<double, 3> coords(index_t node) const;
    bool is_dirichlet(index_t node) const { return !dirichlet_nodes.empty() && dirichlet_nodes[node] != 0; }
};

/// Local edge table (pairs of local node indices, in local traversal order).
std::span<const std::array<int, 2>> local_edges(ElementKind kind);

/// Builds a mesh from element connectivity. Triangles and quads are expected
/// counter-clockwise; quads as (0,0),(1,0),(1,1),(0,1); hexes in lexicographic
/// local order a + 2b + 4c. Edges are derived and canonically oriented.
Mesh mesh_from_elements(int dim, ElementKind kind, std::vector<double> node_coords,
                        std::vector<index_t> element_nodes, std::vector<char> dirichlet_nodes = {});

/// Uniform mesh of the unit square/cube with lexicographic node numbering.
/// Triangles split each square along its (0,0)-(1,1) diagonal; tetrahedra split
/// each cube into the six Kuhn simplices sharing the main diagonal. With
/// dirichlet = true every boundary node is flagged.
Mesh build_structured_mesh(int dim, ElementKind kind, std::span<const index_t> nodal_shape, bool dirichlet);

/// Nodes without a Dirichlet flag, ascending.
std::vector<index_t> free_nodes(const Mesh& mesh);
/// Edges with at least one free endpoint, ascending.
std::vector<index_t> free_edges(const Mesh& mesh);

/// Discrete gradient (free edges x free nodes). Rows of edges touching a Dirichlet
/// node keep a single nonzero.
SparseMatrix build_discrete_gradient(const Mesh& mesh);

/// Curl-curl matrix assembled as Cᵀ K C from the signed face/element-to-edge incidence C.
SparseMatrix assemble_curl_curl(const Mesh& mesh);

/// sigma times the exact edge-element mass matrix.
SparseMatrix assemble_edge_mass(const Mesh& mesh, double sigma);

/// First-order nodal FEM matrix for -Laplace + sigma on free nodes.
SparseMatrix assemble_nodal_problem(const Mesh& mesh, double sigma);

/// Nodal mass matrix on free nodes (used to check the sigma decomposition of A_n).
SparseMatrix assemble_nodal_mass(const Mesh& mesh);

struct DiscretizedSystem {
    SparseMatrix S;   ///< curl-curl
    SparseMatrix M;   ///< sigma-weighted edge mass
    SparseMatrix A_e; ///< S + M
    SparseMatrix A_n; ///< nodal -Laplace + sigma
    SparseMatrix D;   ///< edge x node gradient
    double sigma = 1.0;
};

DiscretizedSystem discretize(const Mesh& mesh, double sigma);

} // namespace hcamg
