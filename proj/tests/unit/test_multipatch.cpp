#include <gtest/gtest.h>

#include <cmath>

#include "gradedfem/multipatch.hpp"
#include "gradedfem/solver.hpp"

using namespace gradedfem;

namespace {

struct Solved {
    MultipatchSystem mp;
    Vector u;
};

Solved solve_set(const PatchSet& set, const MultipatchOptions& o, const Problem& pr)
{
    Solved s;
    s.mp = assemble_multipatch(set, o, NitscheParams{}, pr.source, pr.dirichlet);
    s.u = solve(s.mp.system).solution;
    return s;
}

} // namespace

TEST(PatchSet, ValidationRejectsMisplacedInterface)
{
    PatchSet s = unit_square_patches(2);
    EXPECT_NO_THROW(s.validate());
    s.interfaces[0].a = Vec2(0.4, 0.0);
    EXPECT_THROW(s.validate(), GeometryError);
    s = unit_square_patches(2);
    s.interfaces[0].side2 = 5;
    EXPECT_THROW(s.validate(), InvalidArgument);
    EXPECT_THROW(unit_square_patches(3), InvalidArgument);
}

TEST(PullbackPolygon, TagsInterfaceEdges)
{
    const PatchSet s = unit_square_patches(2);
    const PolygonDomain left = pullback_polygon(s, 0, 16);
    int tagged = 0;
    for (std::size_t i = 0; i < left.size(); ++i) {
        const Vec2 a = s.patches[0].map().forward(left.vertex(i));
        const Vec2 b = s.patches[0].map().forward(left.vertex(i + 1));
        if (left.edge_tags()[i] == 1) {
            EXPECT_NEAR(a.x(), 0.5, 1e-12);
            EXPECT_NEAR(b.x(), 0.5, 1e-12);
            ++tagged;
        }
    }
    EXPECT_GT(tagged, 0);
}

TEST(PullbackPolygon, CornerMapsToOrigin)
{
    const PatchSet s = fig8_patch_set();
    const PolygonDomain d = pullback_polygon(s, 0);
    ASSERT_TRUE(d.corner());
    EXPECT_EQ(*d.corner(), Vec2::Zero());
    EXPECT_NEAR((s.patches[0].map().forward(Vec2::Zero()) - Vec2(0.3, 0.5)).norm(), 0.0, 1e-15);
}

TEST(Multipatch, SinglePatchMatchesPlainAssembly)
{
    const PatchSet s = unit_square_patches(1);
    MultipatchOptions o;
    o.h = 0.2;
    const Problem pr = smooth_polynomial_problem();
    const MultipatchSystem mp = assemble_multipatch(s, o, NitscheParams{}, pr.source, pr.dirichlet);
    const AssembledSystem plain = assemble_system(mp.patches[0], NitscheParams{}, pr.source, pr.dirichlet);
    EXPECT_EQ(mp.n_dofs(), mp.patches[0].n_dofs());
    EXPECT_LT((Eigen::MatrixXd(mp.system.matrix) - Eigen::MatrixXd(plain.matrix)).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((mp.system.rhs - plain.rhs).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Multipatch, TwoPatchErrorWithinTwiceSinglePatch)
{
    const Problem pr = smooth_polynomial_problem();
    MultipatchOptions o;
    o.h = 0.1;
    o.degree = 1;
    o.regularity = 0;
    const Solved one = solve_set(unit_square_patches(1), o, pr);
    const PatchSet two_set = unit_square_patches(2);
    const Solved two = solve_set(two_set, o, pr);
    const ErrorReport e1 = multipatch_errors(one.mp, one.u, pr, NitscheParams{});
    const ErrorReport e2 = multipatch_errors(two.mp, two.u, pr, NitscheParams{});
    EXPECT_LE(e2.l2, 2.0 * e1.l2);
    EXPECT_LE(e2.h1_semi, 2.0 * e1.h1_semi);
    EXPECT_LE(interface_jump_norm(two.mp, two_set, two.u), e2.l2);
}

TEST(Multipatch, QuadraticIsReproducedAcrossInterface)
{
    const Problem pr = smooth_polynomial_problem();
    MultipatchOptions o;
    o.h = 0.2;
    const PatchSet set = unit_square_patches(2);
    const Solved s = solve_set(set, o, pr);
    const ErrorReport e = multipatch_errors(s.mp, s.u, pr, NitscheParams{});
    EXPECT_LT(e.l2, 1e-10);
    EXPECT_LT(interface_jump_norm(s.mp, set, s.u), 1e-10);
}

TEST(Multipatch, BlockSystemIsSymmetricPositiveDefinite)
{
    const PatchSet set = fig8_patch_set();
    MultipatchOptions o;
    o.h = 0.2;
    const MultipatchSystem mp =
        assemble_multipatch(set, o, NitscheParams{}, [](const Vec2&) { return 0.0; }, fig8_dirichlet());
    const Eigen::MatrixXd a(mp.system.matrix);
    EXPECT_LT((a - a.transpose()).cwiseAbs().maxCoeff() / a.cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a).eigenvalues().minCoeff(), 0.0);
}

TEST(Multipatch, ZeroDataGivesZeroSolution)
{
    const PatchSet set = fig8_patch_set();
    MultipatchOptions o;
    o.h = 0.2;
    const MultipatchSystem mp = assemble_multipatch(set, o, NitscheParams{}, [](const Vec2&) { return 0.0; },
                                                    [](const Vec2&) { return 0.0; });
    EXPECT_EQ(solve(mp.system).solution.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Multipatch, InterfaceQuadratureCoversInterface)
{
    const PatchSet set = fig8_patch_set();
    MultipatchOptions o;
    o.h = 0.1;
    const auto patches = discretize_patches(set, o);
    for (const Interface& itf : set.interfaces) {
        double len = 0.0;
        for (const InterfacePoint& ip : interface_quadrature(patches[itf.side1], patches[itf.side2], itf, 3)) {
            len += ip.weight;
            for (int s = 0; s < 2; ++s) {
                const Discretization& d = patches[s == 0 ? itf.side1 : itf.side2];
                EXPECT_NEAR((d.map.forward(ip.reference[s]) - ip.physical).norm(), 0.0, 1e-12);
            }
        }
        EXPECT_NEAR(len, (itf.b - itf.a).norm(), 1e-13);
    }
}
