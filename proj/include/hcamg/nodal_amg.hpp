/// @file nodal_amg.hpp
/// @brief Smoothed-aggregation setup for the nodal problem.

#pragma once

#include "hcamg/sparse.hpp"

#include <vector>

namespace hcamg {

struct Aggregation {
    index_t n_fine = 0;
    index_t n_agg = 0;
    std::vector<index_t> membership; ///< aggregate id of every fine node
};

struct NodalProlongator {
    SparseMatrix P;
    double omega_used = 0.0;
    double rho_estimate = 0.0;
};

/// Symmetric strength pattern: diagonal plus every |a_ij| > drop_tol*sqrt(a_ii a_jj).
/// Throws if a diagonal entry is not positive.
SparseMatrix strength_graph(const SparseMatrix& a, double drop_tol);

/// Greedy two-phase aggregation in natural node order.
///
/// Phase 1 visits nodes in order and turns every node whose strong neighbourhood
/// is still completely free into a root aggregate of that neighbourhood. Phase 2
/// attaches each leftover node to the phase-1 aggregate it has most strong
/// connections to (ties go to the lowest aggregate id). Isolated nodes become
/// singletons.
Aggregation aggregate(const SparseMatrix& strength);

/// One unit entry per row in column membership[i].
SparseMatrix tentative_prolongator(const Aggregation& agg);

/// Power-method estimate of the spectral radius of diag(A)^{-1} A, measured by
/// the Rayleigh quotient in the diag(A) inner product.
double estimate_spectral_radius(const SparseMatrix& a, int iterations = 10);

/// P = (I - omega diag(A)^{-1} A) P_tent with omega = 4/(3 rho), then every row
/// scaled to sum to one. A zero row sum before scaling is an error.
NodalProlongator smooth_and_normalize(const SparseMatrix& a, const SparseMatrix& p_tent, int power_iterations = 10);

} // namespace hcamg
