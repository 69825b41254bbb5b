#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <numbers>

#include "gradedfem/problems.hpp"
#include "gradedfem/spaces.hpp"

using namespace gradedfem;

namespace {

std::shared_ptr<const ActiveMesh> full_square(double h)
{
    const PolygonDomain sq({{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}, std::nullopt);
    return std::make_shared<const ActiveMesh>(classify_elements(build_reference_mesh(h), sq));
}

std::shared_ptr<const ActiveMesh> sector_mesh(double omega, double h)
{
    return std::make_shared<const ActiveMesh>(
        classify_elements(build_reference_mesh(h, centered_shift(h)), sector_polygon(omega)));
}

} // namespace

TEST(BSplineBasis1D, DimensionCounts)
{
    EXPECT_EQ(BSplineBasis1D(-1.0, 0.5, 4, 1, 0).size(), 5);
    EXPECT_EQ(BSplineBasis1D(-1.0, 0.5, 4, 2, 1).size(), 6);
    EXPECT_EQ(BSplineBasis1D(-1.0, 0.5, 4, 2, 0).size(), 9);
    EXPECT_EQ(BSplineBasis1D(-1.0, 0.5, 4, 3, 2).size(), 7);
}

TEST(BSplineBasis1D, QuadraticMidpointValues)
{
    const BSplineBasis1D b(0.0, 1.0, 5, 2, 1);
    Eigen::MatrixXd out;
    b.evaluate(2, 2.5, 0, out);
    EXPECT_NEAR(out(0, 0), 0.125, 1e-15);
    EXPECT_NEAR(out(0, 1), 0.75, 1e-15);
    EXPECT_NEAR(out(0, 2), 0.125, 1e-15);
}

TEST(BSplineBasis1D, DerivativesMatchFiniteDifferences)
{
    const BSplineBasis1D b(-1.0, 0.25, 8, 3, 1);
    const double x = 0.13;
    const int cell = static_cast<int>((x + 1.0) / 0.25);
    const double eps = 1e-6;
    Eigen::MatrixXd c, p, m;
    b.evaluate(cell, x, 2, c);
    b.evaluate(cell, x + eps, 1, p);
    b.evaluate(cell, x - eps, 1, m);
    for (int l = 0; l <= 3; ++l) {
        EXPECT_NEAR(c(1, l), (p(0, l) - m(0, l)) / (2 * eps), 1e-7);
        EXPECT_NEAR(c(2, l), (p(1, l) - m(1, l)) / (2 * eps), 1e-6);
    }
}

TEST(SplineSpace, TensorDofCountOnUncutGrid)
{
    const auto a = full_square(0.5);
    EXPECT_EQ(build_space(a, 2, 1).dofs().n_dofs, 36);
    EXPECT_EQ(build_space(a, 2, 0).dofs().n_dofs, 81);
    EXPECT_EQ(build_space(a, 1, 0).dofs().n_dofs, 25);
    EXPECT_THROW(build_space(a, 2, 2), InvalidArgument);
}

TEST(SplineSpace, PartitionOfUnity)
{
    const auto a = sector_mesh(1.5 * std::numbers::pi, 0.2);
    for (int p : {1, 2, 3}) {
        const SplineSpace s = build_space(a, p, p - 1);
        for (const Vec2& x : {Vec2(0.3, 0.2), Vec2(-0.55, 0.41), Vec2(-0.1, -0.7), Vec2(0.01, 0.02)}) {
            const BasisEval e = eval_basis(s, s.dofs(), x, 1);
            EXPECT_NEAR(e.values.row(0).sum(), 1.0, 1e-14);
            EXPECT_NEAR(e.values.row(1).sum(), 0.0, 1e-12);
            EXPECT_NEAR(e.values.row(2).sum(), 0.0, 1e-12);
        }
    }
}

TEST(SplineSpace, InterpolationReproducesPolynomials)
{
    const auto a = full_square(0.25);
    const SplineSpace s = build_space(a, 2, 1);
    auto f = [](const Vec2& x) { return 1.0 + x.x() - 2.0 * x.y() + x.x() * x.x() * x.y(); };
    const Vector c = interpolate(s, s.dofs(), f);
    for (const Vec2& x : {Vec2(0.3, 0.2), Vec2(-0.55, 0.41), Vec2(0.9, -0.99)}) {
        const int cell = a->mesh.locate(x);
        const FieldValue v = evaluate_field(s, s.dofs(), c, cell, x);
        EXPECT_NEAR(v.value, f(x), 1e-13);
        EXPECT_NEAR(v.grad.x(), 1.0 + 2.0 * x.x() * x.y(), 1e-12);
        EXPECT_NEAR(v.grad.y(), -2.0 + x.x() * x.x(), 1e-12);
    }
}

TEST(SplineSpace, ConstantHasZeroDerivatives)
{
    const auto a = sector_mesh(1.5 * std::numbers::pi, 0.2);
    const SplineSpace s = build_space(a, 3, 2);
    const Vector c = interpolate(s, s.dofs(), [](const Vec2&) { return 2.5; });
    for (const Vec2& x : {Vec2(0.3, 0.2), Vec2(-0.55, -0.41)}) {
        const BasisEval e = eval_basis(s, s.dofs(), x, 3);
        Vector local(e.local_dofs.size());
        for (std::size_t l = 0; l < e.local_dofs.size(); ++l)
            local[l] = c[e.local_dofs[l]];
        const Vector d = e.values * local;
        EXPECT_NEAR(d[0], 2.5, 1e-13);
        for (int k = 1; k < d.size(); ++k)
            EXPECT_NEAR(d[k], 0.0, 1e-10);
    }
}

TEST(SplitDisjointSupports, ConvexDomainUnchanged)
{
    const auto a = full_square(0.25);
    const SplineSpace s = build_space(a, 2, 1);
    const DofMap d = split_disjoint_supports(s);
    EXPECT_EQ(d.n_dofs, s.dofs().n_dofs);
    EXPECT_EQ(d.split_count(), 0);
}

TEST(SplitDisjointSupports, SlitSeparatesStraddlingFunctions)
{
    const double omega = 0.97 * 2.0 * std::numbers::pi;
    const double h = 0.2;
    const auto a = sector_mesh(omega, h);
    const SplineSpace s = build_space(a, 2, 1);
    const DofMap d = split_disjoint_supports(s);
    EXPECT_GT(d.split_count(), 0);
    EXPECT_EQ(d.n_dofs, s.dofs().n_dofs + d.split_count());
    for (int t = 0; t < s.n_tensor(); ++t)
        EXPECT_EQ(d.global(t, 2), -1);

    // Split functions sit on the slit, to the right of the corner, and have
    // active support cells on both sides of it.
    int split_cells = 0;
    for (int c = 0; c < a->mesh.n_cells(); ++c) {
        if (!a->is_active(c))
            continue;
        for (int l = 0; l < s.local_size(); ++l) {
            if (d.global(s.tensor_index(c, l), 1) < 0)
                continue;
            EXPECT_GT(a->mesh.cell_lo(c).x() + h, 0.0) << "cell " << c;
            ++split_cells;
        }
    }
    EXPECT_GT(split_cells, 0);

    // A function supported on the corner cell stays connected around the vertex.
    const int corner_cell = a->mesh.locate(Vec2::Zero());
    for (int l = 0; l < s.local_size(); ++l)
        EXPECT_EQ(d.global(s.tensor_index(corner_cell, l), 1), -1);
}
