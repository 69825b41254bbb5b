#include "gradedfem/problems.hpp"

#include <cmath>
#include <numbers>

#include "gradedfem/quadrature.hpp"

namespace gradedfem {

void CornerFrame::validate() const
{
    if (std::abs(edge_direction.norm() - 1.0) > 1e-12)
        throw InvalidArgument("corner frame edge direction must be a unit vector");
}

PolarPoint corner_polar(const CornerFrame& frame, double omega, const Vec2& x)
{
    const Vec2 d = x - frame.vertex;
    const Vec2 e = frame.edge_direction;
    const double lx = d.dot(e);
    const double ly = cross(e, d);
    PolarPoint p;
    p.r = std::hypot(lx, ly);
    if (p.r == 0.0)
        return p;
    double theta = std::atan2(ly, lx);
    if (theta < -1e-12)
        theta += 2.0 * std::numbers::pi;
    theta = std::max(theta, 0.0);
    if (theta > omega + 1e-12)
        throw InvalidArgument("point lies outside the corner sector");
    p.theta = std::min(theta, omega);
    return p;
}

SingularValue singular_solution(double omega, double r, double theta)
{
    if (r < 0.0)
        throw InvalidArgument("singular_solution: negative radius");
    if (theta < -1e-12 || theta > omega + 1e-12)
        throw InvalidArgument("singular_solution: angle outside the sector");
    const double lambda = std::numbers::pi / omega;
    SingularValue s;
    if (r == 0.0)
        return s;
    const double rl = std::pow(r, lambda);
    const double sn = std::sin(lambda * theta);
    const double cs = std::cos(lambda * theta);
    s.value = rl * sn;
    s.dr = lambda * rl / r * sn;
    s.dtheta = lambda * rl * cs;
    const double c = std::cos(theta);
    const double si = std::sin(theta);
    s.grad = Vec2(s.dr * c - s.dtheta / r * si, s.dr * si + s.dtheta / r * c);
    return s;
}

PolygonDomain sector_polygon(double omega, int n_arc)
{
    if (!(omega > std::numbers::pi && omega < 2.0 * std::numbers::pi))
        throw InvalidArgument("sector_polygon: opening angle must lie in (pi, 2 pi)");
    if (n_arc < 64)
        throw InvalidArgument("sector_polygon: need at least 64 arc segments");
    std::vector<Vec2> v;
    v.reserve(n_arc + 2);
    v.emplace_back(0.0, 0.0);
    for (int k = 0; k <= n_arc; ++k) {
        const double t = omega * k / n_arc;
        // Snap rounding noise so edges along the axes stay exactly straight.
        auto snap = [](double c) { return std::abs(c) < 1e-15 ? 0.0 : c; };
        v.emplace_back(snap(std::cos(t)), snap(std::sin(t)));
    }
    v[1] = Vec2(1.0, 0.0);
    return PolygonDomain(std::move(v), 0);
}

Problem SectorProblem::problem() const
{
    frame.validate();
    Problem pr;
    pr.name = smooth_part ? "sector+smooth" : "sector";
    const double om = omega;
    const CornerFrame fr = frame;
    const bool smooth = smooth_part;
    auto local_grad_to_global = [fr](const Vec2& g) {
        const Vec2 e = fr.edge_direction;
        const Vec2 n(-e.y(), e.x());
        return Vec2(g.x() * e + g.y() * n);
    };
    pr.exact = [om, fr, smooth](const Vec2& x) {
        const PolarPoint pp = corner_polar(fr, om, x);
        double u = singular_solution(om, pp.r, pp.theta).value;
        if (smooth)
            u += x.x() * x.x() * x.y();
        return u;
    };
    pr.exact_grad = [om, fr, smooth, local_grad_to_global](const Vec2& x) {
        const PolarPoint pp = corner_polar(fr, om, x);
        Vec2 g = local_grad_to_global(singular_solution(om, pp.r, pp.theta).grad);
        if (smooth)
            g += Vec2(2.0 * x.x() * x.y(), x.x() * x.x());
        return g;
    };
    pr.source = [smooth](const Vec2& x) { return smooth ? -2.0 * x.y() : 0.0; };
    pr.dirichlet = pr.exact;
    return pr;
}

Problem smooth_polynomial_problem()
{
    Problem pr;
    pr.name = "polynomial";
    pr.exact = [](const Vec2& x) { return x.x() * x.x() * x.y(); };
    pr.exact_grad = [](const Vec2& x) { return Vec2(2.0 * x.x() * x.y(), x.x() * x.x()); };
    pr.source = [](const Vec2& x) { return -2.0 * x.y(); };
    pr.dirichlet = pr.exact;
    return pr;
}

// ---------------------------------------------------------------------------

double PowerSine::operator()(int m, int n, double r, double theta) const
{
    double falling = 1.0;
    for (int i = 0; i < m; ++i)
        falling *= (mu - i);
    const double angular = std::pow(lambda, n) * std::sin(lambda * theta + n * std::numbers::pi / 2);
    return falling * std::pow(r, mu - m) * angular;
}

double total_derivative_sq(const PolarDerivative& u, int k, double r, double theta)
{
    const double drk = u(k, 0, r, theta);
    double s = drk * drk;
    for (int n = 1; n <= k; ++n)
        for (int m = 0; m + n <= k; ++m) {
            const double t = std::pow(r, m - k) * u(m, n, r, theta);
            s += t * t;
        }
    return s;
}

double weighted_norm_sq(const PolarDerivative& u, const std::vector<double>& alphas, double omega,
                        double radius, int layers, int order)
{
    const GaussRule& gr = gauss_legendre(order);
    const GaussRule& gt = gauss_legendre(order);
    const int angular_panels = 8;
    // Radial panels [0, R 2^-L], then [R 2^-(l+1), R 2^-l] for l = L-1..0.
    std::vector<std::pair<double, double>> panels;
    panels.emplace_back(0.0, radius * std::ldexp(1.0, -layers));
    for (int l = layers - 1; l >= 0; --l)
        panels.emplace_back(radius * std::ldexp(1.0, -(l + 1)), radius * std::ldexp(1.0, -l));
    double total = 0.0;
    for (std::size_t j = 0; j < alphas.size(); ++j) {
        const int order_j = static_cast<int>(j) + 1;
        const double alpha = alphas[j];
        for (const auto& [r0, r1] : panels) {
            double panel = 0.0;
            for (std::size_t a = 0; a < gr.points.size(); ++a) {
                const double r = r0 + (r1 - r0) * gr.points[a];
                const double wr = gr.weights[a] * (r1 - r0) * r * std::pow(r, 2.0 * alpha);
                for (int pnl = 0; pnl < angular_panels; ++pnl) {
                    const double t0 = omega * pnl / angular_panels;
                    const double dt = omega / angular_panels;
                    for (std::size_t b = 0; b < gt.points.size(); ++b) {
                        const double th = t0 + dt * gt.points[b];
                        panel += wr * gt.weights[b] * dt * total_derivative_sq(u, order_j, r, th);
                    }
                }
            }
            total += panel;
        }
    }
    return total;
}

WeightedNormResult weighted_norm(const PolarDerivative& u, const std::vector<double>& alphas,
                                 double omega, double radius, int base_layers)
{
    WeightedNormResult res;
    for (int f = 1; f <= 4; f *= 2)
        res.sequence.push_back(weighted_norm_sq(u, alphas, omega, radius, base_layers * f));
    const double v1 = res.sequence[0];
    const double v2 = res.sequence[1];
    const double v3 = res.sequence[2];
    const double d1 = std::abs(v2 - v1);
    const double d2 = std::abs(v3 - v2);
    const bool finite = std::isfinite(v3);
    // Cauchy: the last increment is small and contracting.
    const bool cauchy = finite && d2 <= 1e-3 * std::abs(v3) && d2 <= 0.5 * d1 + 1e-14 * std::abs(v3);
    res.status = cauchy ? Integrability::Convergent : Integrability::Divergent;
    res.value = std::sqrt(v3);
    return res;
}

} // namespace gradedfem
