/// @file edge_prolongator.hpp
/// @brief Edge prolongator built by constrained energy minimization, plus the
/// Reitzinger-Schöberl baseline.

#pragma once

#include "hcamg/coarse_topology.hpp"
#include "hcamg/emin_setup.hpp"
#include "hcamg/mesh.hpp"
#include "hcamg/nodal_amg.hpp"
#include "hcamg/sparse.hpp"

#include <string_view>
#include <vector>

namespace hcamg {

enum class ProlongatorMode { sphcurl, rsamg };

std::string_view to_string(ProlongatorMode mode);

/// Values on N before the least-norm correction.
enum class InitialSeed { zero, ones };

std::string_view to_string(InitialSeed seed);

struct EminConfig {
    double omega = 0.5;
    index_t iterations = 1;
    ProlongatorMode mode = ProlongatorMode::sphcurl;
    /// zero gives the least-norm feasible row; ones keeps the constraint-free
    /// part of an all-ones row.
    InitialSeed seed = InitialSeed::zero;
};

struct EdgeProlongator {
    SparseMatrix P_e;                   ///< stored on the pattern N
    std::vector<double> energy_history; ///< trace(P_eᵀ S P_e), initial guess first
    double commutator_residual = 0.0;   ///< max |P_e D_H - D_h P_n|
};

/// Seed values on N, corrected row by row with the least-norm solution so the
/// commutator holds exactly.
EdgeProlongator initial_feasible_guess(const SubproblemSet& subs, const SparseMatrix& r,
                                       InitialSeed seed = InitialSeed::ones);

/// Row-wise projection of a correction stored on N onto the null space of each Gᵀ.
SparseMatrix project_correction(const SparseMatrix& dp, const SubproblemSet& subs);

/// (S P) evaluated only at the stored positions of `mask`.
SparseMatrix masked_product(const SparseMatrix& s, const SparseMatrix& p, const SparseMatrix& mask);

/// trace(Pᵀ S P)
double prolongator_energy(const SparseMatrix& s, const SparseMatrix& p);

/// One projected damped-Jacobi step: P <- P - omega * proj(diag(S)^{-1} (S P)|_N).
/// Zero diagonal entries of S are replaced by 1e-12 max(diag S); an all-zero diagonal throws.
EdgeProlongator emin_step(const SparseMatrix& s, const EdgeProlongator& pk, const EminConfig& cfg,
                          const SubproblemSet& subs);

/// max |P_e D_H - D_h P_n|
double commutator_residual(const SparseMatrix& p_e, const SparseMatrix& d_H, const SparseMatrix& d_h,
                           const SparseMatrix& p_n);

struct EdgeLevelSetup {
    EdgeProlongator edge;
    NodalProlongator nodal; ///< P_n used on this level
    SparseMatrix P_const;
    CoarseGradient coarse;
    index_t repaired_rows = 0;
    index_t zero_rows = 0;
    SubproblemHistogram histogram;
};

struct NodalAggregationConfig {
    double drop_tol = 0.0;
    index_t n_passes = 2;
    /// power iterations behind the Jacobi damping estimate
    int power_iterations = 10;
};

/// Full edge-prolongator construction for one level.
///
/// sphcurl: smoothed-aggregation P_n, piecewise-constant conversion, coarse
/// edges, constraint setup, feasible guess and cfg.iterations emin steps.
/// rsamg: P_n is the tentative (piecewise-constant) prolongator and no emin steps run.
EdgeLevelSetup build_edge_prolongator(const SparseMatrix& a_n, const SparseMatrix& s, const SparseMatrix& d_h,
                                      const EminConfig& cfg, const NodalAggregationConfig& nodal_cfg = {});

/// Report of the ideal-prolongator check on a uniformly refined triangle mesh.
struct IdealValidationReport {
    index_t coarse_edges = 0;
    index_t fine_edges = 0;
    index_t interior_rows = 0;
    double feasibility_residual = 0.0; ///< max |P_0 D_H - D_h P_n|
    double interior_gradient = 0.0;    ///< max |S P_0| over fine edges strictly inside coarse triangles
};

/// Builds the structured triangle mesh with coarse_nodes^2 nodes and its
/// refinement by `refine`, with P_n the linear interpolant and P_0 the coarse
/// edge basis sampled on fine edges, and evaluates both identities.
IdealValidationReport validate_ideal_stationarity(index_t coarse_nodes, index_t refine);

} // namespace hcamg
