#pragma once

#include <vector>

#include "gradedfem/types.hpp"

namespace gradedfem {

/// Gauss-Legendre rule mapped to [0,1]; exact for polynomials of degree 2n-1.
struct GaussRule {
    std::vector<double> points;
    std::vector<double> weights;
};

/// Returns the cached n-point rule (n >= 1). Thread-safe.
const GaussRule& gauss_legendre(int n);

/// Collapsed (Duffy) tensor rule on the triangle (apex, b, c), collapsed at
/// `apex`. The triangle must be counterclockwise. When `radial_layers` > 0 the
/// collapsed direction is split geometrically toward the apex (ratio 1/2),
/// which resolves integrands behaving like |x - apex|^a.
void triangle_rule(const Vec2& apex, const Vec2& b, const Vec2& c, int n, int radial_layers,
                   std::vector<Vec2>& points, std::vector<double>& weights);

/// Tensor rule on an axis-aligned box.
void box_rule(const Vec2& lo, const Vec2& hi, int n, std::vector<Vec2>& points,
              std::vector<double>& weights);

} // namespace gradedfem
