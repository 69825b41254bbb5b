#include "gradedfem/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace gradedfem {

namespace {

GaussRule compute_gauss_legendre(int n)
{
    GaussRule rule;
    rule.points.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Newton iteration on P_n starting from the Chebyshev-like guess.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.points[i] = 0.5 * (1.0 - x);
        rule.points[n - 1 - i] = 0.5 * (1.0 + x);
        rule.weights[i] = 0.5 * w;
        rule.weights[n - 1 - i] = 0.5 * w;
    }
    return rule;
}

} // namespace

const GaussRule& gauss_legendre(int n)
{
    if (n < 1)
        throw InvalidArgument("gauss_legendre: number of points must be positive");
    static std::mutex mutex;
    static std::map<int, GaussRule> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end())
        it = cache.emplace(n, compute_gauss_legendre(n)).first;
    return it->second;
}

void triangle_rule(const Vec2& apex, const Vec2& b, const Vec2& c, int n, int radial_layers,
                   std::vector<Vec2>& points, std::vector<double>& weights)
{
    const double twice_area = cross(b - apex, c - apex);
    if (twice_area <= 0.0)
        return;
    const GaussRule& g = gauss_legendre(n);
    // Collapsed coordinate s in [0,1] (0 at the apex), t along the opposite edge.
    // The Jacobian s * 2|T| raises the polynomial degree in s by one, so one
    // extra point keeps the rule exact at the nominal order.
    const GaussRule& gs = gauss_legendre(n + 1);
    std::vector<std::pair<double, double>> intervals;
    if (radial_layers > 0) {
        double lo = std::ldexp(1.0, -radial_layers);
        intervals.emplace_back(0.0, lo);
        for (int l = radial_layers; l > 0; --l) {
            intervals.emplace_back(lo, 2.0 * lo);
            lo *= 2.0;
        }
    } else {
        intervals.emplace_back(0.0, 1.0);
    }
    for (const auto& [s0, s1] : intervals) {
        const double ls = s1 - s0;
        for (std::size_t i = 0; i < gs.points.size(); ++i) {
            const double s = s0 + ls * gs.points[i];
            for (std::size_t k = 0; k < g.points.size(); ++k) {
                const double t = g.points[k];
                points.push_back(apex + s * ((1.0 - t) * (b - apex) + t * (c - apex)));
                weights.push_back(gs.weights[i] * ls * g.weights[k] * s * twice_area);
            }
        }
    }
}

void box_rule(const Vec2& lo, const Vec2& hi, int n, std::vector<Vec2>& points,
              std::vector<double>& weights)
{
    const GaussRule& g = gauss_legendre(n);
    const Vec2 d = hi - lo;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            points.emplace_back(lo.x() + d.x() * g.points[i], lo.y() + d.y() * g.points[j]);
            weights.push_back(g.weights[i] * g.weights[j] * d.x() * d.y());
        }
}

} // namespace gradedfem
