/// @file pcg.hpp
/// @brief Preconditioned conjugate gradients from a zero initial guess.

#pragma once

#include "hcamg/sparse.hpp"

#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace hcamg {

enum class SolveStatus { converged, max_iterations, stagnated, indefinite };

std::string_view to_string(SolveStatus status);

struct SolveResult {
    std::vector<double> x;
    index_t iterations = 0;
    std::vector<double> residual_history;   ///< ||b - A x_k||_2, starting with ||b||
    std::vector<double> precond_history;    ///< sqrt(r_kᵀ M r_k)
    SolveStatus status = SolveStatus::max_iterations;
    double relative_residual = 0.0;
};

/// z = M r
using Preconditioner = std::function<void(std::span<const double> r, std::span<double> z)>;

/// Stops when ||b - A x|| <= rtol ||b||. Two consecutive identical iterates
/// report `stagnated`; a nonpositive pᵀ A p reports `indefinite`.
SolveResult pcg_solve(const SparseMatrix& a, std::span<const double> b, const Preconditioner& precond, double rtol,
                      index_t maxit);

} // namespace hcamg
