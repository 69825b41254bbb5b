#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "gradedfem/mapping.hpp"

using namespace gradedfem;

namespace {

void expect_mat_near(const Mat2& a, const Mat2& b, double tol)
{
    EXPECT_LE((a - b).cwiseAbs().maxCoeff(), tol) << "\n" << a << "\nvs\n" << b;
}

} // namespace

TEST(GradedMap, ForwardExamples)
{
    EXPECT_NEAR((graded_forward(1.0, Vec2(0.3, -0.7)) - Vec2(0.3, -0.7)).norm(), 0.0, 1e-15);
    EXPECT_NEAR((graded_forward(4.0, Vec2(1.0, 0.0)) - Vec2(1.0, 0.0)).norm(), 0.0, 1e-15);
    EXPECT_NEAR((graded_forward(4.0, Vec2(0.5, 0.0)) - Vec2(0.0625, 0.0)).norm(), 0.0, 1e-15);
}

TEST(GradedMap, InverseExamples)
{
    EXPECT_NEAR((graded_inverse(4.0, Vec2(0.0625, 0.0)) - Vec2(0.5, 0.0)).norm(), 0.0, 1e-15);
    EXPECT_EQ(graded_inverse(2.0, Vec2::Zero()), Vec2::Zero());
    EXPECT_NEAR((graded_inverse(3.0, Vec2(0.0, 8.0)) - Vec2(0.0, 2.0)).norm(), 0.0, 1e-14);
}

TEST(GradedMap, RoundTripAndAnglePreservation)
{
    for (double g : {1.0, 2.0, 4.0, 6.0})
        for (double t = 0.1; t < 6.2; t += 0.7)
            for (double r : {1e-3, 0.2, 0.9}) {
                const Vec2 x(r * std::cos(t), r * std::sin(t));
                const Vec2 y = graded_forward(g, x);
                EXPECT_NEAR(std::atan2(y.y(), y.x()), std::atan2(x.y(), x.x()), 1e-13);
                EXPECT_NEAR(y.norm(), std::pow(r, g), 1e-15);
                EXPECT_NEAR((graded_inverse(g, y) - x).norm(), 0.0, 1e-13);
            }
}

TEST(GradedMap, JacobianMatchesFiniteDifferences)
{
    const double eps = 1e-6;
    for (double g : {1.0, 2.5, 4.0}) {
        const Vec2 x(0.31, -0.42);
        Mat2 fd;
        for (int k = 0; k < 2; ++k) {
            Vec2 e = Vec2::Zero();
            e[k] = eps;
            fd.col(k) = (graded_forward(g, x + e) - graded_forward(g, x - e)) / (2 * eps);
        }
        expect_mat_near(graded_jacobian(g, x), fd, 1e-8);
    }
}

TEST(BMatrix, Examples)
{
    expect_mat_near(b_matrix(1.0, Vec2(0.3, 0.4)), Mat2::Identity(), 1e-15);
    Mat2 d;
    d << 0.25, 0.0, 0.0, 4.0;
    expect_mat_near(b_matrix(4.0, Vec2(1.0, 0.0)), d, 1e-14);
    d << 4.0, 0.0, 0.0, 0.25;
    expect_mat_near(b_matrix(4.0, Vec2(0.0, 1.0)), d, 1e-14);
}

TEST(BMatrix, EqualsPulledBackDiffusion)
{
    for (double g : {2.0, 4.0, 6.0}) {
        const GradedMap m(g);
        for (const Vec2& x : {Vec2(0.5, 0.1), Vec2(-0.3, 0.7), Vec2(-0.2, -0.25)}) {
            const Mat2 J = graded_jacobian(g, x);
            const Mat2 ref = J.inverse() * J.inverse().transpose() * std::abs(J.determinant());
            expect_mat_near(b_matrix(g, x), ref, 1e-12);
            expect_mat_near(m.diffusion(x), ref, 1e-12);
            EXPECT_GT(b_matrix(g, x).eigenvalues().real().minCoeff(), 0.0);
        }
    }
}

TEST(LoadWeight, Examples)
{
    EXPECT_DOUBLE_EQ(load_weight(1.0, Vec2(0.3, 0.9)), 1.0);
    EXPECT_DOUBLE_EQ(load_weight(4.0, Vec2(1.0, 0.0)), 4.0);
    EXPECT_DOUBLE_EQ(load_weight(2.0, Vec2(0.5, 0.5)), 1.0);
    const Vec2 x(0.4, -0.3);
    EXPECT_NEAR(GradedMap(3.0).measure_weight(x), std::abs(graded_jacobian(3.0, x).determinant()), 1e-14);
    EXPECT_NEAR(GradedMap(3.0).measure_weight(x), load_weight(3.0, x), 1e-14);
}

TEST(MeshFunction, Examples)
{
    EXPECT_DOUBLE_EQ(mesh_function(1.0, 0.1, Vec2(0.2, 0.3)), 0.1);
    EXPECT_DOUBLE_EQ(mesh_function(4.0, 0.1, Vec2(0.0, 1.0)), 0.1);
    EXPECT_NEAR(mesh_function(4.0, 0.1, Vec2(0.5, 0.0)), 0.0125, 1e-16);
}

TEST(MinGamma, Examples)
{
    EXPECT_NEAR(min_gamma(2, 1.5 * std::numbers::pi), 3.0, 1e-14);
    EXPECT_LT(min_gamma(2, 1.5 * std::numbers::pi), 4.0);
    EXPECT_NEAR(min_gamma(1, 2.0 * std::numbers::pi - 1e-9), 2.0, 1e-8);
    EXPECT_NEAR(min_gamma(3, 1.2 * std::numbers::pi), 3.6, 1e-14);
    EXPECT_THROW(min_gamma(2, std::numbers::pi), InvalidArgument);
}

TEST(AlphaPowers, Examples)
{
    const auto a1 = alpha_powers(2, 1.0);
    ASSERT_EQ(a1.size(), 3u);
    for (int j = 1; j <= 3; ++j)
        EXPECT_DOUBLE_EQ(a1[j - 1], j - 3.0);
    const auto a4 = alpha_powers(2, 4.0);
    EXPECT_DOUBLE_EQ(a4[0], -0.5);
    EXPECT_DOUBLE_EQ(a4[1], 0.5);
    EXPECT_DOUBLE_EQ(a4[2], 1.5);
    EXPECT_GT(a4[2], 2.0 - std::numbers::pi / (1.5 * std::numbers::pi));
}

TEST(PostMap, ScaledMapComposesWithGrading)
{
    const GradedMap m(2.0, PostMap::scaled(0.5, Vec2(1.0, 2.0)));
    const Vec2 x(0.6, 0.2);
    EXPECT_NEAR((m.forward(x) - (Vec2(1.0, 2.0) + 0.5 * graded_forward(2.0, x))).norm(), 0.0, 1e-15);
    EXPECT_NEAR((m.inverse(m.forward(x)) - x).norm(), 0.0, 1e-14);
    EXPECT_NEAR(m.measure_weight(x), 0.25 * load_weight(2.0, x), 1e-14);
    EXPECT_NEAR(m.mesh_function(0.1, x), 0.5 * mesh_function(2.0, 0.1, x), 1e-15);
    // A uniform scaling leaves the reference diffusion unchanged.
    expect_mat_near(m.diffusion(x), b_matrix(2.0, x), 1e-13);
}

TEST(PostMap, DegenerateMapIsRejected)
{
    Mat2 singular;
    singular << 1.0, 2.0, 2.0, 4.0;
    EXPECT_THROW(PostMap::affine(singular, Vec2::Zero()), InvalidArgument);
    PostMap cubic;
    cubic.forward = [](const Vec2& x) { return Vec2(x.x() * x.x() * x.x(), x.y()); };
    cubic.inverse = [](const Vec2& y) { return Vec2(std::cbrt(y.x()), y.y()); };
    cubic.jacobian = [](const Vec2& x) {
        Mat2 j;
        j << 3.0 * x.x() * x.x(), 0.0, 0.0, 1.0;
        return j;
    };
    EXPECT_THROW(GradedMap(2.0, cubic).check_post_map(), InvalidArgument);
    EXPECT_THROW(GradedMap(0.0), InvalidArgument);
}
