#pragma once

#include <string>

#include "gradedfem/assembly.hpp"
#include "gradedfem/types.hpp"

namespace gradedfem {

enum class SolverMethod { Direct, ConjugateGradient };

SolverMethod parse_solver_method(const std::string& name);
std::string to_string(SolverMethod method);

struct SolveReport {
    Vector solution;
    int iterations = 0; ///< 0 for the direct path
    double residual_norm = 0.0; ///< ||A u - b|| / ||b||
    SolverMethod method = SolverMethod::Direct;
};

/// Solves A u = b for a symmetric positive definite A. The CG path uses a
/// Jacobi preconditioner and falls back to the direct factorization when it
/// does not reach `tol` within its iteration cap.
SolveReport solve(const SparseMatrix& matrix, const Vector& rhs, double tol = 1e-10,
                  SolverMethod method = SolverMethod::Direct);

inline SolveReport solve(const AssembledSystem& system, double tol = 1e-10,
                         SolverMethod method = SolverMethod::Direct)
{
    return solve(system.matrix, system.rhs, tol, method);
}

} // namespace gradedfem
