/// @file multigrid.hpp
/// @brief Structure-preserving edge hierarchy, Hiptmair smoothing and the V-cycle.

#pragma once

#include "hcamg/edge_prolongator.hpp"
#include "hcamg/sparse.hpp"

#include <memory>
#include <span>
#include <vector>

namespace hcamg {

struct HierarchyConfig {
    EminConfig emin;
    NodalAggregationConfig nodal;
    index_t coarse_size = 200; ///< stop once a level has at most this many edges
    index_t max_levels = 10;
    /// strength threshold on levels below the finest (nodal.drop_tol applies to the finest)
    double coarse_drop_tol = 0.02;
};

/// Setup diagnostics of the transfer from level l to level l+1.
struct LevelStats {
    double commutator_residual = 0.0;
    double commutator_scale = 1.0; ///< max(1, max|D_h P_n|)
    index_t repaired_rows = 0;
    index_t zero_rows = 0;
    index_t augmented_edges = 0;
    std::vector<double> energy_history;
    SubproblemHistogram histogram;
};

struct Level {
    SparseMatrix A_e;
    SparseMatrix S_e;
    SparseMatrix D;
    SparseMatrix A_n;
    SparseMatrix P_e; ///< empty on the coarsest level
    SparseMatrix R_e; ///< P_eᵀ
    SparseMatrix P_n;
    SparseMatrix nodal_aux; ///< Dᵀ A_e D
    LevelStats stats;
};

/// Single level with nodal_aux prebuilt, for relaxation-only preconditioning.
Level make_smoothing_level(const SparseMatrix& a_e, const SparseMatrix& s_e, const SparseMatrix& a_n,
                           const SparseMatrix& d);

/// Symmetric Gauss-Seidel: forward then backward sweep in natural order, `sweeps` times.
void symmetric_gauss_seidel(const SparseMatrix& a, std::span<double> x, std::span<const double> b, int sweeps = 1);

/// Hybrid smoother: symmetric GS on A_e, symmetric GS on Dᵀ A_e D for the
/// gradient correction driven by Dᵀ r, then symmetric GS on A_e again.
void hiptmair_smooth(const Level& level, std::span<double> x, std::span<const double> b);

class Hierarchy {
public:
    Hierarchy(const SparseMatrix& a_e, const SparseMatrix& s_e, const SparseMatrix& a_n, const SparseMatrix& d,
              const HierarchyConfig& cfg);
    ~Hierarchy();
    Hierarchy(Hierarchy&&) noexcept;
    Hierarchy& operator=(Hierarchy&&) noexcept;

    const std::vector<Level>& levels() const { return levels_; }
    index_t num_levels() const { return levels_.size(); }
    /// Sum of nnz(A_e) over levels divided by nnz of the finest A_e.
    double operator_complexity() const;

    /// One V-cycle with one pre- and one post-smoothing step, from the given x.
    void v_cycle(std::span<double> x, std::span<const double> b) const;
    /// Preconditioner application: z = V(b) from a zero initial guess.
    void apply(std::span<const double> b, std::span<double> z) const;

private:
    void cycle(index_t level, std::span<double> x, std::span<const double> b) const;
    void coarse_solve(std::span<const double> b, std::span<double> x) const;

    std::vector<Level> levels_;
    struct CoarseSolver;
    std::unique_ptr<CoarseSolver> coarse_;
};

/// Builds the hierarchy. Throws if the fine operators violate max|S D| <= 1e-12 max|S|
/// or coarsening stagnates (coarse edges >= 0.9 x fine edges).
Hierarchy build_hierarchy(const SparseMatrix& a_e, const SparseMatrix& s_e, const SparseMatrix& a_n,
                          const SparseMatrix& d, const HierarchyConfig& cfg);

/// max|S D| / max|S| (0 for S = 0)
double null_space_violation(const SparseMatrix& s, const SparseMatrix& d);

} // namespace hcamg
