#include "hcamg/pcg.hpp"

#include <cmath>

namespace hcamg {

std::string_view to_string(SolveStatus status) {
    switch (status) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iterations: return "max_iterations";
    case SolveStatus::stagnated: return "stagnated";
    case SolveStatus::indefinite: return "indefinite";
    }
    return "unknown";
}

SolveResult pcg_solve(const SparseMatrix& a, std::span<const double> b, const Preconditioner& precond, double rtol,
                      index_t maxit) {
    const index_t n = a.rows();
    if (a.cols() != n || b.size() != n) throw DimensionError("pcg_solve: size mismatch");
    SolveResult res;
    res.x.assign(n, 0.0);
    const double bnorm = norm2(b);
    res.residual_history.push_back(bnorm);
    if (bnorm == 0.0) {
        res.status = SolveStatus::converged;
        return res;
    }

    std::vector<double> r(b.begin(), b.end());
    std::vector<double> z(n);
    std::vector<double> p(n);
    std::vector<double> ap(n);
    precond(r, z);
    p = z;
    double rz = dot(r, z);
    res.precond_history.push_back(std::sqrt(std::abs(rz)));

    for (index_t it = 1; it <= maxit; ++it) {
        a.multiply(p, ap);
        const double pap = dot(p, ap);
        if (!(pap > 0.0)) {
            res.status = SolveStatus::indefinite;
            break;
        }
        const double alpha = rz / pap;
        bool changed = false;
        for (index_t i = 0; i < n; ++i) {
            const double old = res.x[i];
            res.x[i] += alpha * p[i];
            changed = changed || res.x[i] != old;
            r[i] -= alpha * ap[i];
        }
        res.iterations = it;
        // true residual keeps the stopping test honest
        std::vector<double> true_r(b.begin(), b.end());
        a.multiply_add(res.x, true_r, -1.0);
        const double rnorm = norm2(true_r);
        res.residual_history.push_back(rnorm);
        if (rnorm <= rtol * bnorm) {
            res.status = SolveStatus::converged;
            break;
        }
        if (!changed) {
            res.status = SolveStatus::stagnated;
            break;
        }
        precond(r, z);
        const double rz_new = dot(r, z);
        res.precond_history.push_back(std::sqrt(std::abs(rz_new)));
        const double beta = rz_new / rz;
        rz = rz_new;
        for (index_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    res.relative_residual = res.residual_history.back() / bnorm;
    return res;
}

} // namespace hcamg
