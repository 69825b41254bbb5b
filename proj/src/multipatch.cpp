#include "gradedfem/multipatch.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "gradedfem/quadrature.hpp"

namespace gradedfem {

namespace {

constexpr double kGeomTol = 1e-12;

bool on_segment(const Vec2& p, const Vec2& a, const Vec2& b)
{
    const Vec2 d = b - a;
    const double len = d.norm();
    if (std::abs(cross(d, p - a)) > kGeomTol * std::max(len, 1.0))
        return false;
    const double t = (p - a).dot(d) / (len * len);
    return t >= -kGeomTol && t <= 1.0 + kGeomTol;
}

/// Active cell owning a reference boundary point: the cell of a point nudged
/// into the patch, or an active neighbour within a small slack.
int owning_cell(const ActiveMesh& active, const Vec2& x, const Vec2& nudged)
{
    const ReferenceMesh& mesh = active.mesh;
    int c = mesh.locate(nudged);
    if (c >= 0 && active.is_active(c))
        return c;
    c = mesh.locate(x);
    if (c >= 0 && active.is_active(c))
        return c;
    const double slack = 1e-9 * mesh.h;
    if (c < 0)
        return -1;
    for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
            const int i = mesh.col(c) + di;
            const int j = mesh.row(c) + dj;
            if (i < 0 || j < 0 || i >= mesh.nx || j >= mesh.ny)
                continue;
            const int n = mesh.index(i, j);
            if (!active.is_active(n))
                continue;
            const Vec2 lo = mesh.cell_lo(n);
            const Vec2 hi = mesh.cell_hi(n);
            if (x.x() >= lo.x() - slack && x.x() <= hi.x() + slack && x.y() >= lo.y() - slack &&
                x.y() <= hi.y() + slack)
                return n;
        }
    return -1;
}

struct SideView {
    const Discretization* disc;
    Vec2 inward; ///< physical inward normal of this side
};

std::pair<Vec2, int> locate_side(const SideView& s, const Vec2& y)
{
    const double nudge = 1e-9 * s.disc->h();
    const Vec2 x = s.disc->map.inverse(y);
    const Vec2 xn = s.disc->map.inverse(y + nudge * s.inward);
    return {x, owning_cell(*s.disc->active, x, xn)};
}

/// Parameters in (0,1) where the owning cell of either side changes.
std::vector<double> interface_breaks(const std::array<SideView, 2>& sides, const Vec2& a,
                                     const Vec2& b)
{
    const int samples = 2048;
    std::vector<double> ts{0.0, 1.0};
    for (const SideView& s : sides) {
        auto cell_at = [&](double t) { return locate_side(s, a + t * (b - a)).second; };
        int prev = cell_at(0.0);
        for (int k = 1; k <= samples; ++k) {
            const double t1 = static_cast<double>(k) / samples;
            const int cur = cell_at(t1);
            if (cur != prev) {
                double lo = static_cast<double>(k - 1) / samples;
                double hi = t1;
                for (int it = 0; it < 60; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    (cell_at(mid) == prev ? lo : hi) = mid;
                }
                ts.push_back(0.5 * (lo + hi));
            }
            prev = cur;
        }
    }
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end(),
                         [](double x, double y) { return std::abs(x - y) < 1e-13; }),
             ts.end());
    return ts;
}

} // namespace

Vec2 Patch::resolved_center() const
{
    if (center)
        return *center;
    if (corner_index)
        return vertices.at(*corner_index);
    Vec2 c = Vec2::Zero();
    for (const Vec2& v : vertices)
        c += v;
    return c / static_cast<double>(vertices.size());
}

double Patch::resolved_scale() const
{
    if (scale > 0.0)
        return scale;
    const Vec2 c = resolved_center();
    double r = 0.0;
    for (const Vec2& v : vertices)
        r = std::max(r, (v - c).norm());
    return r;
}

GradedMap Patch::map() const
{
    return GradedMap(gamma, PostMap::scaled(resolved_scale(), resolved_center()));
}

void PatchSet::validate() const
{
    if (patches.empty())
        throw InvalidArgument("patch set is empty");
    for (const Patch& p : patches) {
        if (p.vertices.size() < 3)
            throw InvalidArgument("patch needs at least 3 vertices");
        if (!(p.gamma > 0.0))
            throw InvalidArgument("patch gamma must be positive");
    }
    for (const Interface& itf : interfaces) {
        if (itf.side1 < 0 || itf.side2 < 0 || itf.side1 >= static_cast<int>(patches.size()) ||
            itf.side2 >= static_cast<int>(patches.size()) || itf.side1 >= itf.side2)
            throw InvalidArgument("interface sides must satisfy 0 <= side1 < side2 < n_patches");
        for (int side : {itf.side1, itf.side2}) {
            const auto& v = patches[side].vertices;
            bool found = false;
            for (std::size_t i = 0; i < v.size() && !found; ++i) {
                const Vec2& p = v[i];
                const Vec2& q = v[(i + 1) % v.size()];
                found = on_segment(itf.a, p, q) && on_segment(itf.b, p, q);
            }
            if (!found)
                throw GeometryError("interface does not lie on an edge of its patch");
        }
    }
}

PolygonDomain pullback_polygon(const PatchSet& set, std::size_t patch, int segments_per_unit)
{
    const Patch& P = set.patches.at(patch);
    const GradedMap map = P.map();
    const double R = P.resolved_scale();
    const std::size_t n = P.vertices.size();
    std::vector<Vec2> ref;
    std::vector<int> tags;
    std::optional<std::size_t> corner;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& a = P.vertices[i];
        const Vec2& b = P.vertices[(i + 1) % n];
        int tag = kDirichletTag;
        for (std::size_t k = 0; k < set.interfaces.size(); ++k) {
            const Interface& itf = set.interfaces[k];
            if ((itf.side1 == static_cast<int>(patch) || itf.side2 == static_cast<int>(patch)) &&
                on_segment(a, itf.a, itf.b) && on_segment(b, itf.a, itf.b))
                tag = static_cast<int>(k) + 1;
        }
        const bool radial = P.corner_index && (i == *P.corner_index || (i + 1) % n == *P.corner_index);
        const int pieces =
            radial ? 1
                   : std::max(1, static_cast<int>(std::ceil((b - a).norm() / R * segments_per_unit)));
        for (int k = 0; k < pieces; ++k) {
            if (P.corner_index && i == *P.corner_index && k == 0) {
                corner = ref.size();
                ref.push_back(Vec2::Zero());
            } else {
                ref.push_back(map.inverse(a + (static_cast<double>(k) / pieces) * (b - a)));
            }
            tags.push_back(tag);
        }
    }
    return PolygonDomain(std::move(ref), corner, std::move(tags));
}

Vector MultipatchSystem::patch_coefficients(const Vector& u, std::size_t patch) const
{
    return u.segment(offsets.at(patch), patches.at(patch).n_dofs());
}

std::vector<Discretization> discretize_patches(const PatchSet& set, const MultipatchOptions& options)
{
    set.validate();
    std::vector<Discretization> out(set.patches.size());
    parallel_for(static_cast<int>(set.patches.size()), [&](int i) {
        const Patch& P = set.patches[i];
        DiscretizationOptions opt;
        opt.h = options.h;
        opt.shift = P.corner_index ? centered_shift(options.h) : Vec2::Zero();
        opt.degree = options.degree;
        opt.regularity = options.regularity;
        opt.split = options.split;
        out[i] = discretize(pullback_polygon(set, i, options.segments_per_unit), P.map(), opt);
    });
    return out;
}

std::vector<InterfacePoint> interface_quadrature(const Discretization& side1,
                                                 const Discretization& side2,
                                                 const Interface& interface, int order)
{
    const Vec2 a = interface.a;
    const Vec2 b = interface.b;
    const Vec2 d = b - a;
    const double len = d.norm();
    // Side 1 lies to one side of a->b; find which by probing its domain.
    const Vec2 left(-d.y() / len, d.x() / len);
    const Vec2 probe = side1.map.inverse(0.5 * (a + b) + 1e-7 * len * left);
    const Vec2 in1 = side1.domain.contains(probe) ? left : Vec2(-left);
    const std::array<SideView, 2> sides{SideView{&side1, in1}, SideView{&side2, Vec2(-in1)}};

    const std::vector<double> ts = interface_breaks(sides, a, b);
    const GaussRule& g = gauss_legendre(order);
    std::vector<InterfacePoint> out;
    for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
        const double t0 = ts[k];
        const double t1 = ts[k + 1];
        for (std::size_t q = 0; q < g.points.size(); ++q) {
            InterfacePoint ip;
            ip.physical = a + (t0 + (t1 - t0) * g.points[q]) * d;
            ip.weight = g.weights[q] * (t1 - t0) * len;
            for (int s = 0; s < 2; ++s) {
                const auto [x, cell] = locate_side(sides[s], ip.physical);
                if (cell < 0)
                    throw GeometryError("interface point outside the active mesh of a patch");
                ip.reference[s] = x;
                ip.cell[s] = cell;
            }
            out.push_back(ip);
        }
    }
    return out;
}

namespace {

Vec2 outward_normal_side1(const Discretization& side1, const Interface& itf)
{
    const Vec2 d = itf.b - itf.a;
    const double len = d.norm();
    const Vec2 left(-d.y() / len, d.x() / len);
    const Vec2 probe = side1.map.inverse(0.5 * (itf.a + itf.b) + 1e-7 * len * left);
    return side1.domain.contains(probe) ? Vec2(-left) : left;
}

} // namespace

std::vector<Triplet> assemble_interface(const Discretization& side1, int offset1,
                                        const Discretization& side2, int offset2,
                                        const Interface& interface, const NitscheParams& params,
                                        int order)
{
    params.validate();
    const Vec2 n = outward_normal_side1(side1, interface);
    const std::array<const Discretization*, 2> disc{&side1, &side2};
    const std::array<int, 2> offset{offset1, offset2};
    std::vector<Triplet> entries;
    for (const InterfacePoint& ip : interface_quadrature(side1, side2, interface, order)) {
        std::vector<int> dofs;
        std::vector<double> jump, flux;
        double inv_h = 0.0;
        for (int s = 0; s < 2; ++s) {
            const Discretization& D = *disc[s];
            const Vec2& x = ip.reference[s];
            const BasisEval ev = eval_basis(*D.space, D.dofs, ip.cell[s], x, 1);
            const Mat2 JinvT = D.map.jacobian(x).inverse().transpose();
            const double sign = s == 0 ? 1.0 : -1.0;
            for (std::size_t l = 0; l < ev.local_dofs.size(); ++l) {
                const Vec2 grad = JinvT * ev.grad(static_cast<int>(l));
                dofs.push_back(offset[s] + ev.local_dofs[l]);
                jump.push_back(sign * ev.value(static_cast<int>(l)));
                flux.push_back(0.5 * n.dot(grad));
            }
            inv_h += 0.5 / D.map.mesh_function(D.h(), x);
        }
        const double w = ip.weight;
        for (std::size_t i = 0; i < dofs.size(); ++i)
            for (std::size_t j = 0; j < dofs.size(); ++j) {
                const double v = w * (-flux[i] * jump[j] - jump[i] * flux[j] +
                                      params.beta * inv_h * jump[i] * jump[j]);
                if (v != 0.0)
                    entries.emplace_back(dofs[i], dofs[j], v);
            }
    }
    return entries;
}

MultipatchSystem assemble_multipatch(const PatchSet& set, const MultipatchOptions& options,
                                     const NitscheParams& params, const ScalarField& f,
                                     const ScalarField& g)
{
    params.validate();
    MultipatchSystem mp;
    mp.patches = discretize_patches(set, options);
    int total = 0;
    for (const Discretization& d : mp.patches) {
        mp.offsets.push_back(total);
        total += d.n_dofs();
    }
    std::vector<AssembledSystem> local(mp.patches.size());
    parallel_for(static_cast<int>(mp.patches.size()),
                 [&](int i) { local[i] = assemble_system(mp.patches[i], params, f, g); });

    std::vector<Triplet> entries;
    Vector rhs = Vector::Zero(total);
    for (std::size_t i = 0; i < local.size(); ++i) {
        const SparseMatrix& A = local[i].matrix;
        const int off = mp.offsets[i];
        for (int k = 0; k < A.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(A, k); it; ++it)
                entries.emplace_back(off + static_cast<int>(it.row()), off + static_cast<int>(it.col()),
                                     it.value());
        rhs.segment(off, local[i].rhs.size()) = local[i].rhs;
    }
    const int order = options.interface_order > 0 ? options.interface_order : options.degree + 1;
    for (const Interface& itf : set.interfaces) {
        const auto t = assemble_interface(mp.patches[itf.side1], mp.offsets[itf.side1],
                                          mp.patches[itf.side2], mp.offsets[itf.side2], itf, params,
                                          order);
        entries.insert(entries.end(), t.begin(), t.end());
    }
    mp.system.matrix = to_sparse(total, entries);
    mp.system.rhs = rhs;
    mp.system.dof_map = mp.patches.front().dofs;
    mp.system.params = params;
    return mp;
}

double interface_jump_norm(const MultipatchSystem& mp, const PatchSet& set, const Vector& u)
{
    double s = 0.0;
    for (const Interface& itf : set.interfaces) {
        const Discretization& d1 = mp.patches[itf.side1];
        const Discretization& d2 = mp.patches[itf.side2];
        const Vector c1 = mp.patch_coefficients(u, itf.side1);
        const Vector c2 = mp.patch_coefficients(u, itf.side2);
        for (const InterfacePoint& ip : interface_quadrature(d1, d2, itf, d1.degree() + 3)) {
            const double v1 = evaluate_field(*d1.space, d1.dofs, c1, ip.cell[0], ip.reference[0]).value;
            const double v2 = evaluate_field(*d2.space, d2.dofs, c2, ip.cell[1], ip.reference[1]).value;
            s += ip.weight * (v1 - v2) * (v1 - v2);
        }
    }
    return std::sqrt(s);
}

ErrorReport multipatch_errors(const MultipatchSystem& mp, const Vector& u, const Problem& problem,
                              const NitscheParams& params)
{
    ErrorReport total;
    double l2 = 0.0, h1 = 0.0, en = 0.0;
    for (std::size_t i = 0; i < mp.patches.size(); ++i) {
        const ErrorReport r = compute_errors(mp.patches[i], mp.patch_coefficients(u, i), problem, params);
        l2 += r.l2 * r.l2;
        h1 += r.h1_semi * r.h1_semi;
        en += r.energy * r.energy;
        total.split_dofs += r.split_dofs;
        total.gamma = std::max(total.gamma, r.gamma);
        total.p = r.p;
        total.h = r.h;
    }
    total.n_dofs = mp.n_dofs();
    total.l2 = std::sqrt(l2);
    total.h1_semi = std::sqrt(h1);
    total.energy = std::sqrt(en);
    total.beta = params.beta;
    total.tau = params.tau;
    return total;
}

PatchSet fig8_patch_set(double gamma)
{
    PatchSet set;
    Patch left;
    left.vertices = {{0.0, 0.0}, {0.3, 0.0}, {0.3, 0.5}, {0.4, 0.5}, {0.4, 1.0}, {0.0, 1.0}};
    left.corner_index = 2;
    left.gamma = gamma;
    Patch middle;
    middle.vertices = {{0.4, 0.5}, {0.6, 0.5}, {0.6, 1.0}, {0.4, 1.0}};
    Patch right;
    right.vertices = {{0.7, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.6, 1.0}, {0.6, 0.5}, {0.7, 0.5}};
    right.corner_index = 5;
    right.gamma = gamma;
    set.patches = {left, middle, right};
    set.interfaces = {{0, 1, {0.4, 0.5}, {0.4, 1.0}}, {1, 2, {0.6, 0.5}, {0.6, 1.0}}};
    return set;
}

ScalarField fig8_dirichlet()
{
    return [](const Vec2& x) { return std::abs(x.y() - 1.0) < 1e-9 ? x.x() * (1.0 - x.x()) : 0.0; };
}

PatchSet unit_square_patches(int n_patches)
{
    const double R = std::sqrt(0.5);
    PatchSet set;
    if (n_patches == 1) {
        Patch p;
        p.vertices = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
        p.center = Vec2(0.5, 0.5);
        p.scale = R;
        set.patches = {p};
        return set;
    }
    if (n_patches != 2)
        throw InvalidArgument("unit_square_patches: 1 or 2 patches");
    Patch l, r;
    l.vertices = {{0, 0}, {0.5, 0}, {0.5, 1}, {0, 1}};
    l.center = Vec2(0.25, 0.5);
    l.scale = R;
    r.vertices = {{0.5, 0}, {1, 0}, {1, 1}, {0.5, 1}};
    r.center = Vec2(0.75, 0.5);
    r.scale = R;
    set.patches = {l, r};
    set.interfaces = {{0, 1, {0.5, 0.0}, {0.5, 1.0}}};
    return set;
}

} // namespace gradedfem
