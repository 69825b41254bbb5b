#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gradedfem/assembly.hpp"
#include "gradedfem/geometry.hpp"
#include "gradedfem/types.hpp"

namespace gradedfem {

/// Polar frame at a corner: theta is measured counterclockwise from
/// `edge_direction`.
struct CornerFrame {
    Vec2 vertex = Vec2::Zero();
    Vec2 edge_direction = Vec2(1.0, 0.0);

    void validate() const;
};

struct PolarPoint {
    double r = 0.0;
    double theta = 0.0;
};

/// Polar coordinates of x in the frame with theta unwrapped into [0, omega].
/// Points more than 1e-12 rad outside the sector are rejected.
PolarPoint corner_polar(const CornerFrame& frame, double omega, const Vec2& x);

struct SingularValue {
    double value = 0.0;
    double dr = 0.0;
    double dtheta = 0.0;
    Vec2 grad = Vec2::Zero(); ///< Cartesian gradient in the frame's axes
};

/// r^(pi/omega) sin(theta pi/omega) and its first derivatives.
SingularValue singular_solution(double omega, double r, double theta);

/// Unit circle sector of opening omega with its corner at the origin, the
/// first straight edge along +x and the arc split into n_arc segments. The
/// grading map fixes angles and the unit circle, so this polygon is also the
/// reference domain.
PolygonDomain sector_polygon(double omega, int n_arc = 4096);

/// Manufactured problem in physical coordinates.
struct Problem {
    std::string name;
    ScalarField exact;
    std::function<Vec2(const Vec2&)> exact_grad;
    ScalarField source;
    ScalarField dirichlet;

    bool has_exact() const { return static_cast<bool>(exact); }
};

/// Singular ansatz on a sector (f = 0, g = trace). With `smooth_part` the
/// term x^2 y (f = -2y) is added.
struct SectorProblem {
    double omega = 1.5 * 3.14159265358979323846;
    CornerFrame frame;
    bool smooth_part = false;

    Problem problem() const;
};

/// Polynomial u = x^2 y on any domain (f = -2y).
Problem smooth_polynomial_problem();

// ---------------------------------------------------------------------------
// Weighted Sobolev norms

/// d^m/dr^m d^n/dtheta^n of a function in polar coordinates.
using PolarDerivative = std::function<double(int m, int n, double r, double theta)>;

/// r^mu sin(lambda theta); the singular part has mu = lambda = pi/omega and
/// its pullback under the grading has mu = gamma pi/omega.
struct PowerSine {
    double mu = 1.0;
    double lambda = 1.0;

    double operator()(int m, int n, double r, double theta) const;
};

/// |D^k v|^2 in polar form: (d_r^k v)^2 plus (r^(m-k) d_r^m d_theta^n v)^2
/// over m + n <= k, n >= 1.
double total_derivative_sq(const PolarDerivative& u, int k, double r, double theta);

/// Sum_j ||r^alpha_j D^j u||^2 over the sector of opening omega and radius R
/// with `layers` geometric radial layers (ratio 1/2) toward the corner.
double weighted_norm_sq(const PolarDerivative& u, const std::vector<double>& alphas, double omega,
                        double radius, int layers, int order = 8);

enum class Integrability { Convergent, Divergent };

struct WeightedNormResult {
    double value = 0.0; ///< norm (not squared) at the finest quadrature
    Integrability status = Integrability::Convergent;
    std::vector<double> sequence; ///< squared norms under quadrature refinement
};

/// Classifies the weighted norm by refining the radial grading
/// (base_layers, 2x, 4x): a Cauchy sequence is convergent, growth is not.
WeightedNormResult weighted_norm(const PolarDerivative& u, const std::vector<double>& alphas,
                                 double omega, double radius = 1.0, int base_layers = 40);

} // namespace gradedfem
