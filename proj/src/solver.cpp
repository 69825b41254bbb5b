#include "gradedfem/solver.hpp"

#include <cmath>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

namespace gradedfem {

SolverMethod parse_solver_method(const std::string& name)
{
    if (name == "direct")
        return SolverMethod::Direct;
    if (name == "cg")
        return SolverMethod::ConjugateGradient;
    throw InvalidArgument("solver: expected 'direct' or 'cg', got '" + name + "'");
}

std::string to_string(SolverMethod method)
{
    return method == SolverMethod::Direct ? "direct" : "cg";
}

namespace {

double relative_residual(const SparseMatrix& A, const Vector& u, const Vector& b)
{
    const double nb = b.norm();
    return nb == 0.0 ? (A * u).norm() : (A * u - b).norm() / nb;
}

SolveReport solve_direct(const SparseMatrix& matrix, const Vector& rhs)
{
    // Column-major copy: the Cholesky module works on the lower triangle.
    const Eigen::SparseMatrix<double> A = matrix;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
    if (ldlt.info() != Eigen::Success)
        throw SolverError("direct solve: factorization failed");
    // Nitsche systems are SPD; a non-positive pivot means beta is too small.
    if (!(ldlt.vectorD().minCoeff() > 0.0))
        throw SolverError("direct solve: matrix is not positive definite");
    SolveReport r;
    r.solution = ldlt.solve(rhs);
    if (ldlt.info() != Eigen::Success || !r.solution.allFinite())
        throw SolverError("direct solve: back substitution failed");
    r.method = SolverMethod::Direct;
    r.residual_norm = relative_residual(matrix, r.solution, rhs);
    return r;
}

} // namespace

SolveReport solve(const SparseMatrix& matrix, const Vector& rhs, double tol, SolverMethod method)
{
    if (!(tol > 0.0))
        throw InvalidArgument("solve: tolerance must be positive");
    if (matrix.rows() != matrix.cols() || matrix.rows() != rhs.size())
        throw InvalidArgument("solve: dimension mismatch");
    if (rhs.norm() == 0.0) {
        SolveReport r;
        r.solution = Vector::Zero(rhs.size());
        r.method = method;
        return r;
    }
    if (method == SolverMethod::Direct) {
        SolveReport r = solve_direct(matrix, rhs);
        if (r.residual_norm > tol) {
            // One step of iterative refinement recovers accuracy lost to
            // pivot growth on badly scaled cut cells.
            const Vector correction = solve_direct(matrix, rhs - matrix * r.solution).solution;
            r.solution += correction;
            r.residual_norm = relative_residual(matrix, r.solution, rhs);
        }
        if (r.residual_norm > tol)
            throw SolverError("direct solve: residual above tolerance");
        return r;
    }

    const Eigen::SparseMatrix<double> A = matrix;
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                             Eigen::DiagonalPreconditioner<double>>
        cg;
    cg.setTolerance(tol);
    cg.setMaxIterations(static_cast<Eigen::Index>(std::ceil(10.0 * std::sqrt(static_cast<double>(A.rows())))));
    cg.compute(A);
    SolveReport r;
    r.solution = cg.solve(rhs);
    r.iterations = static_cast<int>(cg.iterations());
    r.method = SolverMethod::ConjugateGradient;
    r.residual_norm = relative_residual(matrix, r.solution, rhs);
    if (cg.info() != Eigen::Success || r.residual_norm > tol * 10.0 || !r.solution.allFinite()) {
        SolveReport fallback = solve_direct(matrix, rhs);
        fallback.iterations = r.iterations;
        return fallback;
    }
    return r;
}

} // namespace gradedfem
