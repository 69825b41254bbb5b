#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "gradedfem/assembly.hpp"
#include "gradedfem/problems.hpp"
#include "gradedfem/solver.hpp"

using namespace gradedfem;

namespace {

const PolygonDomain& full_square()
{
    static const PolygonDomain d({{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}, std::nullopt);
    return d;
}

/// Axis-aligned box that cuts the background grid.
const PolygonDomain& cut_box()
{
    static const PolygonDomain d({{-0.83, -0.71}, {0.77, -0.71}, {0.77, 0.9}, {-0.83, 0.9}},
                                 std::nullopt);
    return d;
}

Discretization make(const PolygonDomain& d, double gamma, double h, int p, Vec2 shift = Vec2::Zero(),
                    bool split = false)
{
    DiscretizationOptions o;
    o.h = h;
    o.shift = shift;
    o.degree = p;
    o.regularity = p - 1;
    o.split = split;
    return discretize(d, GradedMap(gamma), o);
}

Eigen::MatrixXd dense(const SparseMatrix& a) { return Eigen::MatrixXd(a); }

double relative_asymmetry(const SparseMatrix& a)
{
    const Eigen::MatrixXd d = dense(a);
    return (d - d.transpose()).cwiseAbs().maxCoeff() / d.cwiseAbs().maxCoeff();
}

} // namespace

TEST(NitscheParams, Validation)
{
    NitscheParams p;
    EXPECT_EQ(p.beta, 100.0);
    EXPECT_EQ(p.tau, 0.1);
    p.beta = 0.0;
    EXPECT_THROW(p.validate(), InvalidArgument);
    p.beta = 1.0;
    p.tau = -1.0;
    EXPECT_THROW(p.validate(), InvalidArgument);
}

TEST(AssembleVolume, Q1StencilRowsSumToZero)
{
    const Discretization d = make(full_square(), 1.0, 0.25, 1);
    const Contribution c = assemble_volume(*d.space, d.dofs, d.map, d.volume);
    const SparseMatrix k = to_sparse(d.n_dofs(), c.entries);
    const Vector ones = Vector::Ones(d.n_dofs());
    EXPECT_LT((k * ones).cwiseAbs().maxCoeff(), 1e-13);
    // Interior vertex of the bilinear stencil: diagonal 8/3.
    const int nodes = 9;
    const int centre = 4 * nodes + 4;
    EXPECT_NEAR(dense(k)(centre, centre), 8.0 / 3.0, 1e-13);
}

TEST(AssembleVolume, EnergyOfLinearFunctionIsArea)
{
    const Discretization d = make(full_square(), 1.0, 0.25, 2);
    const SparseMatrix k = to_sparse(d.n_dofs(), assemble_volume(*d.space, d.dofs, d.map, d.volume).entries);
    const Vector v = interpolate(*d.space, d.dofs, [](const Vec2& x) { return x.x(); });
    EXPECT_NEAR(v.dot(k * v), 4.0, 1e-12);
}

TEST(AssembleVolume, GradedEnergyMatchesMonteCarlo)
{
    const double omega = 1.5 * std::numbers::pi;
    const PolygonDomain sector = sector_polygon(omega);
    DiscretizationOptions o;
    o.h = 0.1;
    o.shift = centered_shift(0.1);
    o.quad_order = 6;
    const Discretization d = discretize(sector, GradedMap(4.0), o);
    const SparseMatrix k = to_sparse(d.n_dofs(), assemble_volume(*d.space, d.dofs, d.map, d.volume).entries);
    const Vector v = interpolate(*d.space, d.dofs, [](const Vec2& x) { return x.x(); });
    const double energy = v.dot(k * v);

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const int n = 1000000;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        const Vec2 x(u(rng), u(rng));
        double t = std::atan2(x.y(), x.x());
        if (t < 0)
            t += 2 * std::numbers::pi;
        if (x.norm() <= 1.0 && t <= omega)
            s += b_matrix(4.0, x)(0, 0);
    }
    const double mc = 4.0 * s / n;
    EXPECT_NEAR(energy / mc, 1.0, 5e-3);
}

TEST(NitscheBoundary, ZeroDataGivesZeroLoad)
{
    const Discretization d = make(cut_box(), 1.0, 0.2, 2);
    const Contribution c = assemble_nitsche_boundary(*d.space, d.dofs, d.map, d.boundary, NitscheParams{},
                                                     [](const Vec2&) { return 0.0; });
    EXPECT_EQ(c.rhs.size(), d.n_dofs());
    EXPECT_EQ(c.rhs.cwiseAbs().maxCoeff(), 0.0);
}

TEST(NitscheBoundary, PatchTestReproducesLinearSolution)
{
    const Discretization d = make(cut_box(), 1.0, 0.2, 2, Vec2(0.03, 0.07));
    auto u = [](const Vec2& x) { return x.x(); };
    const AssembledSystem sys = assemble_system(d, NitscheParams{}, [](const Vec2&) { return 0.0; }, u);
    const Vector sol = solve(sys).solution;
    for (const Vec2& x : {Vec2(0.1, 0.1), Vec2(-0.8, 0.85), Vec2(0.76, -0.7)}) {
        const int c = d.active->mesh.locate(x);
        EXPECT_NEAR(evaluate_field(*d.space, d.dofs, sol, c, x).value, u(x), 1e-10);
    }
}

TEST(AssembleSystem, SymmetricAndPositiveDefinite)
{
    const PolygonDomain sector = sector_polygon(1.5 * std::numbers::pi);
    for (double g : {1.0, 2.0, 4.0, 6.0}) {
        const Discretization d = make(sector, g, 0.25, 2, centered_shift(0.25));
        ASSERT_LE(d.n_dofs(), 400);
        const AssembledSystem sys = assemble_system(d, NitscheParams{}, [](const Vec2&) { return 1.0; },
                                                    [](const Vec2&) { return 0.0; });
        EXPECT_LT(relative_asymmetry(sys.matrix), 1e-12);
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense(sys.matrix));
        EXPECT_GT(es.eigenvalues().minCoeff(), 0.0) << "gamma = " << g;
    }
}

TEST(GhostPenalty, VanishesOnGlobalPolynomials)
{
    const PolygonDomain sector = sector_polygon(1.5 * std::numbers::pi);
    for (int p : {1, 2, 3}) {
        const Discretization d = make(sector, 4.0, 0.2, p, centered_shift(0.2));
        ASSERT_FALSE(d.active->ghost_faces.empty());
        auto poly = [p](const Vec2& x) {
            double v = 1.0 + x.x() - 2.0 * x.y();
            if (p >= 2)
                v += 3.0 * x.x() * x.y() + x.x() * x.x() - x.y() * x.y();
            if (p >= 3)
                v += x.x() * x.x() * x.x() - 2.0 * x.x() * x.y() * x.y();
            return v;
        };
        const Vector c = interpolate(*d.space, d.dofs, poly);
        EXPECT_LE(ghost_penalty_energy(*d.space, d.dofs, NitscheParams{}, c), 1e-20) << "p = " << p;
    }
}

TEST(GhostPenalty, UnitNormalJumpOnOneGridLine)
{
    const PolygonDomain sector = sector_polygon(1.5 * std::numbers::pi);
    const double h = 0.25;
    const Discretization d = make(sector, 1.0, h, 1, centered_shift(h));
    const double xf = d.active->mesh.cell_lo(d.active->mesh.locate(Vec2(0.6, 0.9))).x();
    int faces = 0;
    for (const GhostFace& f : d.active->ghost_faces)
        if (f.axis == 0 && std::abs(f.a.x() - xf) < 1e-12)
            ++faces;
    ASSERT_GT(faces, 0);
    const Vector c = interpolate(*d.space, d.dofs, [xf](const Vec2& x) { return std::max(x.x() - xf, 0.0); });
    NitscheParams prm;
    EXPECT_NEAR(ghost_penalty_energy(*d.space, d.dofs, prm, c), prm.tau * h * h * faces, 1e-13);
}

TEST(GhostPenalty, NoEffectWithoutCutCells)
{
    const Discretization d = make(full_square(), 1.0, 0.25, 2);
    EXPECT_TRUE(d.active->ghost_faces.empty());
    const Problem pr = smooth_polynomial_problem();
    NitscheParams with, without;
    without.tau = 0.0;
    const Vector a = solve(assemble_system(d, with, pr.source, pr.dirichlet)).solution;
    const Vector b = solve(assemble_system(d, without, pr.source, pr.dirichlet)).solution;
    EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(AssembleLoad, ZeroAndUnitSources)
{
    const Discretization d = make(full_square(), 1.0, 0.25, 2);
    EXPECT_EQ(assemble_load(*d.space, d.dofs, d.map, d.volume, [](const Vec2&) { return 0.0; })
                  .cwiseAbs()
                  .maxCoeff(),
              0.0);
    EXPECT_NEAR(assemble_load(*d.space, d.dofs, d.map, d.volume, [](const Vec2&) { return 1.0; }).sum(), 4.0,
                1e-12);
}

TEST(AssembleLoad, GradedUnitSourceGivesPhysicalArea)
{
    const int n = 4096;
    std::vector<Vec2> ring;
    for (int k = 0; k < n; ++k) {
        const double t = 2.0 * std::numbers::pi * k / n;
        ring.emplace_back(std::cos(t), std::sin(t));
    }
    const PolygonDomain disk(ring, std::nullopt);
    DiscretizationOptions o;
    o.h = 0.2;
    o.shift = Vec2(0.013, 0.071);
    const Discretization d = discretize(disk, GradedMap(2.0), o);
    const double total = assemble_load(*d.space, d.dofs, d.map, d.volume, [](const Vec2&) { return 1.0; }).sum();
    EXPECT_NEAR(total, std::numbers::pi, 1e-5);
}
