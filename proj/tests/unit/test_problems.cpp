#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "gradedfem/problems.hpp"

using namespace gradedfem;

namespace {

constexpr double kOmega = 1.5 * std::numbers::pi;

} // namespace

TEST(SingularSolution, PeakAndEdges)
{
    EXPECT_NEAR(singular_solution(kOmega, 1.0, kOmega / 2).value, 1.0, 1e-15);
    EXPECT_NEAR(singular_solution(kOmega, 0.7, 0.0).value, 0.0, 1e-15);
    EXPECT_NEAR(singular_solution(kOmega, 0.7, kOmega).value, 0.0, 1e-15);
    EXPECT_EQ(singular_solution(kOmega, 0.0, 1.0).value, 0.0);
    EXPECT_THROW(singular_solution(kOmega, 0.5, kOmega + 0.1), InvalidArgument);
}

TEST(SingularSolution, IsHarmonic)
{
    const Problem pr = SectorProblem{}.problem();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ur(0.05, 0.95), ut(0.05, kOmega - 0.05);
    const double lambda = std::numbers::pi / kOmega;
    for (int k = 0; k < 100; ++k) {
        const double r = ur(rng);
        const double t = ut(rng);
        const Vec2 x(r * std::cos(t), r * std::sin(t));
        const double e = 1e-3 * r;
        const double lap = (pr.exact(x + Vec2(e, 0)) + pr.exact(x - Vec2(e, 0)) + pr.exact(x + Vec2(0, e)) +
                            pr.exact(x - Vec2(0, e)) - 4.0 * pr.exact(x)) /
                           (e * e);
        EXPECT_LE(std::abs(lap), 1e-6 * std::pow(r, lambda - 2.0) + 1e-6) << "r=" << r << " t=" << t;
    }
}

TEST(SingularSolution, GradientMatchesFiniteDifferences)
{
    for (bool smooth : {false, true}) {
        SectorProblem sp;
        sp.smooth_part = smooth;
        const Problem pr = sp.problem();
        const Vec2 x(-0.3, 0.45);
        const double e = 1e-6;
        const Vec2 fd((pr.exact(x + Vec2(e, 0)) - pr.exact(x - Vec2(e, 0))) / (2 * e),
                      (pr.exact(x + Vec2(0, e)) - pr.exact(x - Vec2(0, e))) / (2 * e));
        EXPECT_NEAR((pr.exact_grad(x) - fd).norm(), 0.0, 1e-8);
    }
}

TEST(CornerPolar, FrameAndUnwrapping)
{
    const CornerFrame f;
    const PolarPoint p = corner_polar(f, kOmega, Vec2(0.0, -0.5));
    EXPECT_NEAR(p.r, 0.5, 1e-15);
    EXPECT_NEAR(p.theta, kOmega, 1e-12);
    EXPECT_THROW(corner_polar(f, kOmega, Vec2(0.5, -0.5)), InvalidArgument);
    CornerFrame rotated;
    rotated.vertex = Vec2(1.0, 1.0);
    rotated.edge_direction = Vec2(0.0, 1.0);
    const PolarPoint q = corner_polar(rotated, kOmega, Vec2(0.0, 1.0));
    EXPECT_NEAR(q.theta, std::numbers::pi / 2, 1e-14);
    rotated.edge_direction = Vec2(0.0, 2.0);
    EXPECT_THROW(rotated.validate(), InvalidArgument);
}

TEST(SectorPolygon, AreaAndShape)
{
    const PolygonDomain d = sector_polygon(kOmega, 4096);
    EXPECT_NEAR(d.area(), 0.75 * std::numbers::pi, 1e-6);
    ASSERT_TRUE(d.corner());
    EXPECT_EQ(*d.corner(), Vec2::Zero());
    // The last arc point lies exactly on the negative y axis.
    EXPECT_EQ(d.vertices().back().x(), 0.0);
    EXPECT_NO_THROW(sector_polygon(2.0 * std::numbers::pi - 1e-3, 4096));
    EXPECT_THROW(sector_polygon(std::numbers::pi), InvalidArgument);
    EXPECT_THROW(sector_polygon(kOmega, 16), InvalidArgument);
}

TEST(SectorPolygon, InvariantUnderGrading)
{
    const PolygonDomain d = sector_polygon(kOmega, 256);
    for (double g : {2.0, 4.0})
        for (const Vec2& v : d.vertices())
            EXPECT_NEAR((graded_forward(g, v) - v).norm(), 0.0, 1e-15);
}

TEST(WeightedNorm, FirstDerivativesOfSingularPartAreSquareIntegrable)
{
    const double lambda = std::numbers::pi / kOmega;
    const PowerSine u{lambda, lambda};
    const WeightedNormResult r = weighted_norm(u, {0.0}, kOmega);
    EXPECT_EQ(r.status, Integrability::Convergent);
    // |grad u|^2 = lambda^2 r^(2 lambda - 2), integrated over the unit sector.
    EXPECT_NEAR(r.value * r.value, lambda * lambda * kOmega / (2.0 * lambda), 1e-8);
}

TEST(WeightedNorm, SecondDerivativesDivergeWithoutWeight)
{
    const double lambda = std::numbers::pi / kOmega;
    const PowerSine u{lambda, lambda};
    EXPECT_EQ(weighted_norm(u, {0.0, 0.0}, kOmega).status, Integrability::Divergent);
    const double threshold = 1.0 - lambda;
    EXPECT_EQ(weighted_norm(u, {0.0, threshold + 0.1}, kOmega).status, Integrability::Convergent);
    EXPECT_EQ(weighted_norm(u, {0.0, threshold - 0.1}, kOmega).status, Integrability::Divergent);
}
