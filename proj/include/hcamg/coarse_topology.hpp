/// @file coarse_topology.hpp
/// @brief Piecewise-constant conversion of a nodal prolongator and coarse edge generation.

#pragma once

#include "hcamg/sparse.hpp"

#include <vector>

namespace hcamg {

/// Coarse edge as a pair of coarse nodes; second == npos marks a single-node
/// (Dirichlet) edge.
struct CoarseEdge {
    index_t first;
    index_t second;

    bool single() const { return second == npos; }
    friend bool operator==(const CoarseEdge&, const CoarseEdge&) = default;
};

struct CoarseGradient {
    SparseMatrix D_H;                     ///< coarse edges x coarse nodes
    std::vector<CoarseEdge> edge_endpoints;
    std::vector<index_t> augmented_edges; ///< rows appended to connect subproblems
};

/// Converts P into a piecewise-constant interpolant (one unit entry per row).
///
/// Every column gets a target row count proportional to its share of the
/// nonzeros. In each of n_passes sweeps the columns, in order, claim up to
/// ceil(target / n_passes) of their largest-magnitude free rows. Leftover rows
/// go to the assigned column holding their largest entry, and columns left
/// empty steal their largest row from a column that can spare one.
SparseMatrix gen_piecewise_const(const SparseMatrix& p, index_t n_passes = 2);

/// Coarse edges from the strictly upper nonzeros of P_constᵀ |D_h|ᵀ |D_h| P_const.
CoarseGradient build_coarse_gradient(const SparseMatrix& d_h, const SparseMatrix& p_const);

/// Appends one single-node coarse edge for each coarse node that receives the
/// free endpoint of a single-nonzero row of D_h.
CoarseGradient augment_dirichlet_edges(CoarseGradient cg, const SparseMatrix& d_h, const SparseMatrix& p_const);

/// Rebuilds D_H from edge_endpoints (-1 at first, +1 at second; +1 for single-node edges).
SparseMatrix gradient_from_edges(const std::vector<CoarseEdge>& edges, index_t n_nodes);

} // namespace hcamg
