/// @file emin_setup.hpp
/// @brief Edge-prolongator sparsity pattern and the per-row commutator constraint blocks.
///
/// Row i of the commutator P_e D_H = D_h P_n reads G_iᵀ p_i = r_iᵀ, where p_i holds
/// the nonzeros of P_e row i (coarse edges I), r_i the nonzeros of (D_h P_n) row i
/// (coarse nodes J) and G_i = D_H[I, J]. Each block is factored once by Householder
/// QR; the truncated factors give both the least-norm solve and the projector onto
/// the null space of G_iᵀ.

#pragma once

#include "hcamg/coarse_topology.hpp"
#include "hcamg/dense.hpp"
#include "hcamg/sparse.hpp"

#include <map>
#include <span>
#include <utility>
#include <vector>

namespace hcamg {

struct PatternBundle {
    SparseMatrix T;        ///< pattern of |D_h| |P_n| (fine edge x coarse node)
    std::vector<double> W; ///< per coarse edge: 1 for two-node edges, 2 for single-node edges
    SparseMatrix B;        ///< |T| |D_H|ᵀ W
    SparseMatrix N;        ///< fine edge x coarse edge pattern, set where B == 2
};

/// Throws if a D_h row has other than one or two nonzeros.
PatternBundle compute_pattern(const SparseMatrix& d_h, const SparseMatrix& p_n, const SparseMatrix& d_H);

/// Truncated QR factors of one block: q is n_rows x rank, r is rank x rank, both row-major.
struct FactorView {
    index_t n_rows = 0;
    index_t rank = 0;
    std::span<const double> q;
    std::span<const double> r;
};

struct ConstraintSubproblem {
    index_t fine_edge = 0;
    std::vector<index_t> coarse_edges; ///< I
    std::vector<index_t> coarse_nodes; ///< J
    DenseMatrix G;                     ///< |I| x |J|
    DenseMatrix Q;                     ///< |I| x rank after factor_subproblem
    DenseMatrix R;                     ///< rank x rank after factor_subproblem
    index_t rank = 0;
    bool has_dirichlet_edge = false;
    bool factored = false;

    FactorView factors() const { return {Q.rows, rank, Q.data, R.data}; }
};

/// I from row fine_edge of N, J from row fine_edge of T, G = D_H[I, J].
/// Throws if J is empty.
ConstraintSubproblem extract_subproblem(const PatternBundle& bundle, const SparseMatrix& d_H, index_t fine_edge);

/// Connectivity of the graph whose vertices are the columns of G and whose
/// edges are its two-nonzero rows; every column must also touch some row.
bool check_irreducible(const DenseMatrix& g);

/// Entry magnitudes of P_nᵀ D_hᵀ D_h P_n, evaluated one pair at a time.
class CouplingOracle {
public:
    CouplingOracle(const SparseMatrix& d_h, const SparseMatrix& p_n);
    double score(index_t a, index_t b) const;

private:
    SparseMatrix rt_; // (D_h P_n)ᵀ
};

/// Joins the components of a reducible block by adding coarse edges between the
/// pair of nodes with the strongest coupling (ties: lexicographically smallest
/// pair) until the block is connected. New edges are appended to
/// cg.edge_endpoints and cg.augmented_edges, and to sub.coarse_edges/G.
/// cg.D_H is left untouched; rebuild it with gradient_from_edges. `existing`
/// maps node pairs of previously augmented edges to their row so they are reused.
/// Returns the number of rows appended to sub.
index_t make_irreducible(ConstraintSubproblem& sub, CoarseGradient& cg, const CouplingOracle& oracle,
                         std::map<std::pair<index_t, index_t>, index_t>& existing);

/// QR of G truncated to the expected rank (|J| - 1 without single-node edges, |J| with).
/// Throws on a rank mismatch.
void factor_subproblem(ConstraintSubproblem& sub);

/// Least-norm p with Gᵀ p = r, using the first `rank` entries of r (ordered as J).
void least_norm(const FactorView& f, std::span<const double> r, std::span<double> p);

/// x <- x - Q (Qᵀ x): removes the component that would change Gᵀ x.
void project_out(const FactorView& f, std::span<double> x);

/// max_j |(Gᵀ p)_j - r_j|
double constraint_residual(const DenseMatrix& g, std::span<const double> p, std::span<const double> r);

/// Factors of every row of the edge prolongator, stored contiguously.
/// The nonzeros of row i follow the column order of N row i.
struct SubproblemSet {
    SparseMatrix N;
    std::vector<index_t> node_offsets;
    std::vector<index_t> nodes;
    std::vector<index_t> rank;
    std::vector<char> dirichlet;
    std::vector<index_t> q_offsets;
    std::vector<double> q;
    std::vector<index_t> r_offsets;
    std::vector<double> r;

    index_t size() const { return rank.size(); }
    FactorView factors(index_t row) const;
    std::span<const index_t> coarse_nodes(index_t row) const {
        return std::span<const index_t>(nodes).subspan(node_offsets[row], node_offsets[row + 1] - node_offsets[row]);
    }
};

/// Block-size statistics: (|I|, |J|) -> number of rows.
using SubproblemHistogram = std::map<std::pair<index_t, index_t>, index_t>;

struct EminSetup {
    CoarseGradient coarse;      ///< final coarse gradient, including augmented edges
    PatternBundle pattern;
    SubproblemSet subproblems;
    SparseMatrix R;             ///< D_h P_n
    index_t repaired_rows = 0;  ///< rows that needed make_irreducible
    index_t zero_rows = 0;      ///< rows whose block is empty (both endpoints interpolate from one coarse node)
    SubproblemHistogram histogram;
};

/// Pattern, irreducibility repair and factorization for every fine edge.
EminSetup setup_constraints(const SparseMatrix& d_h, const SparseMatrix& p_n, CoarseGradient coarse);

/// Block of one row reconstructed from a finished setup (for inspection and tests).
ConstraintSubproblem subproblem_of(const EminSetup& setup, index_t fine_edge);

} // namespace hcamg
