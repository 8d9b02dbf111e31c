/// @file experiment.hpp
/// @brief Convergence experiments over meshes and sigma values, and their tables.

#pragma once

#include "hcamg/edge_prolongator.hpp"
#include "hcamg/multigrid.hpp"
#include "hcamg/pcg.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hcamg {

enum class Problem { model2d_tri, model2d_quad, model3d_tet, model3d_hex, import_matrices };
enum class SolverMode { sphcurl, rsamg, relaxation_only };
enum class TableFormat { text, csv, jsonl };

std::string_view to_string(Problem p);
std::string_view to_string(SolverMode m);
std::optional<Problem> parse_problem(std::string_view s);
std::optional<SolverMode> parse_solver_mode(std::string_view s);
std::optional<TableFormat> parse_table_format(std::string_view s);

struct ImportPaths {
    std::string A_e;
    std::string S;
    std::string A_n;
    std::string D;
};

struct ExperimentConfig {
    Problem problem = Problem::model2d_quad;
    std::vector<index_t> shapes{28};  ///< nodes per axis, one mesh per entry
    std::vector<double> sigma_list{1.0};
    SolverMode mode = SolverMode::sphcurl;
    EminConfig emin;
    double rtol = 1e-8;
    index_t maxit = 500;
    std::uint64_t seed = 7;
    ImportPaths import_paths;
    index_t coarse_size = 200;
    index_t max_levels = 10;
    double drop_tol = 0.0;
    double coarse_drop_tol = 0.02;
    bool dirichlet = false;
};

/// Throws with a message naming the first invalid field.
void validate(const ExperimentConfig& cfg);

struct LevelSummary {
    index_t edges = 0;
    index_t nodes = 0;
    index_t nnz = 0;
    double null_space_violation = 0.0;
    double commutator_residual = 0.0; ///< relative to max(1, max|D_h P_n|); 0 on the coarsest level
    index_t repaired_rows = 0;
    std::vector<double> energy_history;
    SubproblemHistogram histogram;
};

struct RunRecord {
    std::string mesh;
    index_t edges = 0;
    double sigma = 0.0;
    SolverMode mode = SolverMode::sphcurl;
    index_t iterations = 0;
    double relres = 0.0;
    SolveStatus status = SolveStatus::max_iterations;
    double oc = 1.0;
    index_t levels = 1;
    std::vector<LevelSummary> level_info;
    double setup_seconds = 0.0;
    double solve_seconds = 0.0;
};

struct RunReport {
    std::vector<RunRecord> runs;
};

/// Uniform random vector in (-1, 1) from a SplitMix64 stream.
std::vector<double> random_rhs(index_t n, std::uint64_t seed);

/// Operators of a model problem on a structured mesh (natural boundary unless cfg.dirichlet).
DiscretizedSystem model_problem(Problem p, index_t n, double sigma, bool dirichlet, Mesh* mesh_out = nullptr);

/// Builds, solves and records one case per (mesh, sigma), or one case for imported matrices.
RunReport run_experiment(const ExperimentConfig& cfg);

/// Solves with operators already in memory (used by the import path).
RunRecord run_case(const std::string& mesh_name, const SparseMatrix& a_e, const SparseMatrix& s_e,
                   const SparseMatrix& a_n, const SparseMatrix& d, double sigma, const ExperimentConfig& cfg);

/// Convergence table: mesh, edges, sigma, mode, iters, relres, oc, levels.
void emit_convergence_table(const RunReport& report, TableFormat format, std::ostream& out);
/// Block-size histogram: one line per (run, level, |I|, |J|).
void emit_histogram_table(const RunReport& report, TableFormat format, std::ostream& out);
/// Writes convergence.<ext> and histogram.<ext> into `directory` (created if missing).
void emit_tables(const RunReport& report, TableFormat format, const std::string& directory);

} // namespace hcamg
