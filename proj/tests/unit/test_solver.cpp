#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "gradedfem/problems.hpp"
#include "gradedfem/solver.hpp"

using namespace gradedfem;

namespace {

SparseMatrix from_dense(const Eigen::MatrixXd& d) { return d.sparseView(); }

} // namespace

TEST(Solver, IdentitySystem)
{
    const SparseMatrix a = from_dense(Eigen::MatrixXd::Identity(5, 5));
    const Vector b = Vector::LinSpaced(5, 1.0, 5.0);
    for (SolverMethod m : {SolverMethod::Direct, SolverMethod::ConjugateGradient})
        EXPECT_LT((solve(a, b, 1e-12, m).solution - b).norm(), 1e-14);
}

TEST(Solver, TwoByTwo)
{
    Eigen::MatrixXd d(2, 2);
    d << 2, 1, 1, 2;
    const Vector u = solve(from_dense(d), Vector::Constant(2, 3.0)).solution;
    EXPECT_NEAR(u[0], 1.0, 1e-14);
    EXPECT_NEAR(u[1], 1.0, 1e-14);
}

TEST(Solver, IndefiniteMatrixIsReported)
{
    Eigen::MatrixXd d(2, 2);
    d << 1, 2, 2, 1;
    EXPECT_THROW(solve(from_dense(d), Vector::Ones(2)), SolverError);
}

TEST(Solver, ZeroRhsGivesZeroSolution)
{
    Eigen::MatrixXd d(2, 2);
    d << 2, 1, 1, 2;
    EXPECT_EQ(solve(from_dense(d), Vector::Zero(2)).solution, Vector::Zero(2));
}

TEST(Solver, ParseMethod)
{
    EXPECT_EQ(parse_solver_method("direct"), SolverMethod::Direct);
    EXPECT_EQ(parse_solver_method("cg"), SolverMethod::ConjugateGradient);
    EXPECT_EQ(to_string(SolverMethod::ConjugateGradient), "cg");
    EXPECT_THROW(parse_solver_method("lu"), InvalidArgument);
}

TEST(Solver, ConjugateGradientAgreesWithDirect)
{
    DiscretizationOptions o;
    o.h = 0.1;
    o.shift = centered_shift(0.1);
    const Discretization d = discretize(sector_polygon(1.5 * std::numbers::pi), GradedMap(4.0), o);
    const Problem pr = SectorProblem{}.problem();
    const AssembledSystem sys = assemble_system(d, NitscheParams{}, pr.source, pr.dirichlet);
    const SolveReport direct = solve(sys, 1e-10, SolverMethod::Direct);
    const SolveReport cg = solve(sys, 1e-10, SolverMethod::ConjugateGradient);
    EXPECT_LT(direct.residual_norm, 1e-10);
    EXPECT_LT(cg.residual_norm, 1e-9);
    EXPECT_LT((direct.solution - cg.solution).norm() / direct.solution.norm(), 1e-6);
    const double cap = std::ceil(10.0 * std::sqrt(static_cast<double>(d.n_dofs())));
    EXPECT_LE(cg.iterations, cap);
}
