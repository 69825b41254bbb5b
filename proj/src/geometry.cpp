#include "gradedfem/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>
#include <nlohmann/json.hpp>

#include "gradedfem/quadrature.hpp"

namespace gradedfem {

namespace bg = boost::geometry;

namespace {

using BPoint = bg::model::d2::point_xy<double>;
using BPolygon = bg::model::polygon<BPoint, false, true>;

BPolygon to_boost(const std::vector<Vec2>& ring)
{
    BPolygon poly;
    for (const Vec2& v : ring)
        poly.outer().emplace_back(v.x(), v.y());
    poly.outer().emplace_back(ring.front().x(), ring.front().y());
    return poly;
}

double signed_area(const std::vector<Vec2>& ring)
{
    double a = 0.0;
    for (std::size_t i = 0; i < ring.size(); ++i)
        a += cross(ring[i], ring[(i + 1) % ring.size()]);
    return 0.5 * a;
}

bool on_segment(const Vec2& p, const Vec2& a, const Vec2& b, double tol)
{
    const Vec2 d = b - a;
    const double len2 = d.squaredNorm();
    if (len2 == 0.0)
        return (p - a).norm() <= tol;
    const double t = std::clamp((p - a).dot(d) / len2, 0.0, 1.0);
    return (a + t * d - p).norm() <= tol;
}

/// Area of box ∩ polygon by Sutherland-Hodgman clipping against the convex box.
/// For a nonconvex polygon the clipped ring may contain degenerate bridges,
/// but they cancel in the signed area.
double clipped_area(const std::vector<Vec2>& poly, const Vec2& lo, const Vec2& hi)
{
    std::vector<Vec2> ring = poly;
    std::vector<Vec2> next;
    for (int side = 0; side < 4; ++side) {
        const int axis = side % 2;
        const bool upper = side >= 2;
        const double bound = upper ? hi[axis] : lo[axis];
        auto inside = [&](const Vec2& p) { return upper ? p[axis] <= bound : p[axis] >= bound; };
        next.clear();
        for (std::size_t i = 0; i < ring.size(); ++i) {
            const Vec2& a = ring[i];
            const Vec2& b = ring[(i + 1) % ring.size()];
            const bool ia = inside(a);
            const bool ib = inside(b);
            if (ia)
                next.push_back(a);
            if (ia != ib) {
                const double t = (bound - a[axis]) / (b[axis] - a[axis]);
                Vec2 x = a + t * (b - a);
                x[axis] = bound;
                next.push_back(x);
            }
        }
        ring.swap(next);
        if (ring.empty())
            return 0.0;
    }
    double a = 0.0;
    for (std::size_t i = 0; i < ring.size(); ++i)
        a += cross(ring[i], ring[(i + 1) % ring.size()]);
    return 0.5 * a;
}

/// Position of a point on the boundary of [lo,hi] as a counterclockwise
/// perimeter parameter in [0,4), one unit per side starting at lo.
double perimeter_param(const Vec2& p, const Vec2& lo, const Vec2& hi)
{
    const double w = hi.x() - lo.x();
    const double ht = hi.y() - lo.y();
    const double db = std::abs(p.y() - lo.y());
    const double dr = std::abs(p.x() - hi.x());
    const double dt = std::abs(p.y() - hi.y());
    const double dl = std::abs(p.x() - lo.x());
    const double m = std::min({db, dr, dt, dl});
    if (m == db && p.x() < hi.x())
        return std::clamp((p.x() - lo.x()) / w, 0.0, 1.0);
    if (m == dr && p.y() < hi.y())
        return 1.0 + std::clamp((p.y() - lo.y()) / ht, 0.0, 1.0);
    if (m == dt && p.x() > lo.x())
        return 2.0 + std::clamp((hi.x() - p.x()) / w, 0.0, 1.0);
    if (m == dl)
        return std::fmod(3.0 + std::clamp((hi.y() - p.y()) / ht, 0.0, 1.0), 4.0);
    if (m == db)
        return 1.0; // lower-right corner
    if (m == dr)
        return 2.0; // upper-right corner
    return 3.0;     // upper-left corner
}

/// Pieces of [lo,hi] ∩ polygon as counterclockwise rings. The polygon
/// boundary is cut into chains inside the closed box, and consecutive chains
/// are joined along the box boundary.
std::vector<std::vector<Vec2>> clip_to_box(const std::vector<Vec2>& poly, const Vec2& lo,
                                           const Vec2& hi)
{
    const double scale = std::max(hi.x() - lo.x(), hi.y() - lo.y());
    const double tol = 1e-13 * scale;
    auto inside = [&](const Vec2& p) {
        return p.x() >= lo.x() - tol && p.x() <= hi.x() + tol && p.y() >= lo.y() - tol &&
               p.y() <= hi.y() + tol;
    };

    // Polygon vertices refined at the four box lines.
    std::vector<Vec2> pts;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % n];
        pts.push_back(a);
        std::vector<std::pair<double, Vec2>> cuts;
        for (int axis = 0; axis < 2; ++axis) {
            if (a[axis] == b[axis])
                continue;
            for (double line : {lo[axis], hi[axis]}) {
                const double t = (line - a[axis]) / (b[axis] - a[axis]);
                if (t > 0.0 && t < 1.0) {
                    Vec2 x = a + t * (b - a);
                    x[axis] = line;
                    cuts.emplace_back(t, x);
                }
            }
        }
        std::sort(cuts.begin(), cuts.end(),
                  [](const auto& l, const auto& r) { return l.first < r.first; });
        for (const auto& c : cuts)
            pts.push_back(c.second);
    }
    const std::size_t m = pts.size();
    std::vector<char> seg_in(m);
    bool any_in = false, any_out = false;
    for (std::size_t i = 0; i < m; ++i) {
        seg_in[i] = inside(0.5 * (pts[i] + pts[(i + 1) % m])) ? 1 : 0;
        (seg_in[i] ? any_in : any_out) = true;
    }
    if (!any_out)
        return {poly};
    if (!any_in) {
        const Vec2 c = 0.5 * (lo + hi);
        // The boundary avoids the box, so the box is entirely in or out.
        long wn = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2& a = poly[i];
            const Vec2& b = poly[(i + 1) % n];
            const double side = cross(b - a, c - a);
            if (a.y() <= c.y() && b.y() > c.y() && side > 0.0)
                ++wn;
            else if (a.y() > c.y() && b.y() <= c.y() && side < 0.0)
                --wn;
        }
        if (wn == 0)
            return {};
        return {{lo, Vec2(hi.x(), lo.y()), hi, Vec2(lo.x(), hi.y())}};
    }

    struct Chain {
        std::vector<Vec2> points;
        double entry = 0.0;
        double exit = 0.0;
    };
    std::vector<Chain> chains;
    std::size_t start = 0;
    while (!(seg_in[start] && !seg_in[(start + m - 1) % m]))
        ++start;
    for (std::size_t k = 0; k < m; ++k) {
        const std::size_t i = (start + k) % m;
        if (!seg_in[i])
            continue;
        if (!seg_in[(i + m - 1) % m])
            chains.push_back({{pts[i]}, 0.0, 0.0});
        chains.back().points.push_back(pts[(i + 1) % m]);
    }
    for (Chain& c : chains) {
        c.entry = perimeter_param(c.points.front(), lo, hi);
        c.exit = perimeter_param(c.points.back(), lo, hi);
    }

    const std::array<Vec2, 4> corners{Vec2(hi.x(), lo.y()), hi, Vec2(lo.x(), hi.y()), lo};
    std::vector<char> used(chains.size(), 0);
    std::vector<std::vector<Vec2>> rings;
    for (std::size_t c0 = 0; c0 < chains.size(); ++c0) {
        if (used[c0])
            continue;
        std::vector<Vec2> ring;
        std::size_t cur = c0;
        for (std::size_t guard = 0; guard <= chains.size(); ++guard) {
            used[cur] = 1;
            ring.insert(ring.end(), chains[cur].points.begin(), chains[cur].points.end());
            const double from = chains[cur].exit;
            std::size_t next = chains.size();
            double best = 5.0;
            for (std::size_t j = 0; j < chains.size(); ++j) {
                if (used[j] && j != c0)
                    continue;
                double d = chains[j].entry - from;
                if (d < -1e-15)
                    d += 4.0;
                d = std::max(d, 0.0);
                if (d < best) {
                    best = d;
                    next = j;
                }
            }
            if (next == chains.size())
                throw GeometryError("box clipping: unmatched boundary chain");
            // Box corners passed on the way from the exit to the next entry.
            for (int k = 1; k <= 4; ++k) {
                double cp = std::floor(from) + k; // corner parameters 1,2,3,4(=0)
                if (cp - from <= 1e-15)
                    continue;
                if (cp - from >= best - 1e-15)
                    break;
                ring.push_back(corners[static_cast<std::size_t>(cp - 1) % 4]);
            }
            if (next == c0)
                break;
            cur = next;
        }
        rings.push_back(std::move(ring));
    }
    return rings;
}

/// Length of segment a-b inside the closed polygon.
double segment_length_inside(const PolygonDomain& domain, const Vec2& a, const Vec2& b)
{
    const Vec2 d = b - a;
    const double len = d.norm();
    const double eps = 1e-14 * std::max(len, 1.0);
    std::vector<double> ts{0.0, 1.0};
    for (std::size_t i = 0; i < domain.size(); ++i) {
        const Vec2 p = domain.vertex(i);
        const Vec2 e = domain.vertex(i + 1) - p;
        const double den = cross(d, e);
        if (std::abs(den) > eps * e.norm() * len) {
            const double t = cross(p - a, e) / den;
            const double u = cross(p - a, d) / den;
            if (t > 0.0 && t < 1.0 && u >= -eps && u <= 1.0 + eps)
                ts.push_back(t);
        } else if (std::abs(cross(p - a, d)) <= eps * len) {
            for (const Vec2& q : {p, Vec2(p + e)}) {
                const double t = (q - a).dot(d) / (len * len);
                if (t > 0.0 && t < 1.0)
                    ts.push_back(t);
            }
        }
    }
    std::sort(ts.begin(), ts.end());
    double inside = 0.0;
    for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
        if (ts[k + 1] - ts[k] <= 0.0)
            continue;
        if (domain.contains(a + 0.5 * (ts[k] + ts[k + 1]) * d))
            inside += (ts[k + 1] - ts[k]) * len;
    }
    return inside;
}

/// Grid-line crossing parameters of segment a->b, including the endpoints.
std::vector<double> grid_breaks(const ReferenceMesh& mesh, const Vec2& a, const Vec2& b)
{
    std::vector<double> ts{0.0, 1.0};
    const Vec2 o = mesh.origin();
    for (int axis = 0; axis < 2; ++axis) {
        const double pa = a[axis];
        const double pb = b[axis];
        if (pa == pb)
            continue;
        const double lo = std::min(pa, pb);
        const double hi = std::max(pa, pb);
        const int k0 = static_cast<int>(std::ceil((lo - o[axis]) / mesh.h));
        const int k1 = static_cast<int>(std::floor((hi - o[axis]) / mesh.h));
        for (int k = k0; k <= k1; ++k) {
            const double t = (o[axis] + k * mesh.h - pa) / (pb - pa);
            if (t > 0.0 && t < 1.0)
                ts.push_back(t);
        }
    }
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end(),
                         [](double x, double y) { return std::abs(x - y) < 1e-14; }),
             ts.end());
    return ts;
}

std::vector<Vec2> cleaned_ring(const std::vector<Vec2>& ring, double scale)
{
    const double eps = 1e-13 * scale;
    std::vector<Vec2> out;
    for (const Vec2& v : ring)
        if (out.empty() || (v - out.back()).norm() > eps)
            out.push_back(v);
    while (out.size() > 1 && (out.front() - out.back()).norm() <= eps)
        out.pop_back();
    // Drop collinear vertices; they carry no area and confuse the ear test.
    bool changed = true;
    while (changed && out.size() > 3) {
        changed = false;
        for (std::size_t i = 0; i < out.size() && out.size() > 3; ++i) {
            const Vec2& prev = out[(i + out.size() - 1) % out.size()];
            const Vec2& next = out[(i + 1) % out.size()];
            const double c = cross(out[i] - prev, next - out[i]);
            if (std::abs(c) <= 1e-14 * scale * scale &&
                (out[i] - prev).dot(next - out[i]) >= 0.0) {
                out.erase(out.begin() + static_cast<std::ptrdiff_t>(i));
                changed = true;
                --i;
            }
        }
    }
    return out;
}

bool point_in_triangle(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c)
{
    return cross(b - a, p - a) >= 0.0 && cross(c - b, p - b) >= 0.0 && cross(a - c, p - c) >= 0.0;
}

std::vector<std::array<Vec2, 3>> ear_clip(std::vector<Vec2> poly)
{
    std::vector<std::array<Vec2, 3>> tris;
    std::size_t guard = 0;
    std::size_t i = 0;
    while (poly.size() > 3) {
        const std::size_t n = poly.size();
        const Vec2& a = poly[(i + n - 1) % n];
        const Vec2& b = poly[i % n];
        const Vec2& c = poly[(i + 1) % n];
        bool ear = cross(b - a, c - b) > 0.0;
        if (ear) {
            for (std::size_t k = 0; k < n; ++k) {
                if (k == (i + n - 1) % n || k == i % n || k == (i + 1) % n)
                    continue;
                const Vec2& q = poly[k];
                const Vec2& qp = poly[(k + n - 1) % n];
                const Vec2& qn = poly[(k + 1) % n];
                // Only reflex vertices can lie inside an ear.
                if (cross(q - qp, qn - q) > 0.0)
                    continue;
                if (q == a || q == b || q == c)
                    continue;
                if (point_in_triangle(q, a, b, c)) {
                    ear = false;
                    break;
                }
            }
        }
        if (ear) {
            tris.push_back({a, b, c});
            poly.erase(poly.begin() + static_cast<std::ptrdiff_t>(i % n));
            guard = 0;
            if (i > 0)
                --i;
        } else {
            i = (i + 1) % n;
            if (++guard > 2 * n)
                throw GeometryError("triangulate: no ear found (ring not simple)");
        }
    }
    if (poly.size() == 3 && cross(poly[1] - poly[0], poly[2] - poly[1]) > 0.0)
        tris.push_back({poly[0], poly[1], poly[2]});
    return tris;
}

} // namespace

// ---------------------------------------------------------------------------
// PolygonDomain

PolygonDomain::PolygonDomain(std::vector<Vec2> vertices, std::optional<std::size_t> corner_index,
                             std::vector<int> edge_tags)
    : vertices_(std::move(vertices)), corner_index_(corner_index), edge_tags_(std::move(edge_tags))
{
    if (vertices_.size() < 3)
        throw GeometryError("polygon needs at least three vertices");
    if (edge_tags_.empty())
        edge_tags_.assign(vertices_.size(), kDirichletTag);
    if (edge_tags_.size() != vertices_.size())
        throw InvalidArgument("edge_tags must have one entry per edge");
    if (corner_index_) {
        if (*corner_index_ >= vertices_.size())
            throw InvalidArgument("corner_index out of range");
        if (vertices_[*corner_index_] != Vec2::Zero())
            throw GeometryError("singular corner vertex must be the origin");
    }
    for (const Vec2& v : vertices_)
        if (std::abs(v.x()) > 1.0 + 1e-12 || std::abs(v.y()) > 1.0 + 1e-12)
            throw GeometryError("polygon vertex outside [-1,1]^2");
    if (signed_area(vertices_) <= 0.0)
        throw GeometryError("polygon must be counterclockwise with positive area");
    const BPolygon poly = to_boost(vertices_);
    if (bg::intersects(poly))
        throw GeometryError("polygon is not simple");
}

std::optional<Vec2> PolygonDomain::corner() const
{
    if (!corner_index_)
        return std::nullopt;
    return vertices_[*corner_index_];
}

double PolygonDomain::area() const { return signed_area(vertices_); }

double PolygonDomain::perimeter() const
{
    double l = 0.0;
    for (std::size_t i = 0; i < vertices_.size(); ++i)
        l += (vertex(i + 1) - vertex(i)).norm();
    return l;
}

bool PolygonDomain::contains(const Vec2& p) const
{
    int winding = 0;
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& a = vertices_[i];
        const Vec2& b = vertices_[(i + 1) % n];
        if (on_segment(p, a, b, 1e-14))
            return true;
        if (a.y() <= p.y()) {
            if (b.y() > p.y() && cross(b - a, p - a) > 0.0)
                ++winding;
        } else if (b.y() <= p.y() && cross(b - a, p - a) < 0.0) {
            --winding;
        }
    }
    return winding != 0;
}

PolygonDomain PolygonDomain::relabeled(std::size_t start) const
{
    const std::size_t n = vertices_.size();
    std::vector<Vec2> v(n);
    std::vector<int> t(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = vertices_[(start + i) % n];
        t[i] = edge_tags_[(start + i) % n];
    }
    std::optional<std::size_t> c;
    if (corner_index_)
        c = (*corner_index_ + n - start % n) % n;
    return PolygonDomain(std::move(v), c, std::move(t));
}

// ---------------------------------------------------------------------------
// ReferenceMesh

Vec2 ReferenceMesh::cell_lo(int cell) const
{
    return origin() + h * Vec2(col(cell), row(cell));
}

Vec2 ReferenceMesh::cell_hi(int cell) const { return cell_lo(cell) + Vec2(h, h); }

int ReferenceMesh::locate(const Vec2& p) const
{
    const Vec2 o = origin();
    const int i = static_cast<int>(std::floor((p.x() - o.x()) / h));
    const int j = static_cast<int>(std::floor((p.y() - o.y()) / h));
    if (i < 0 || j < 0 || i >= nx || j >= ny)
        return -1;
    return index(i, j);
}

ReferenceMesh build_reference_mesh(double h, const Vec2& shift)
{
    if (!(h > 0.0) || h > 1.0)
        throw InvalidArgument("mesh size h must lie in (0, 1]");
    for (int a = 0; a < 2; ++a)
        if (shift[a] < 0.0 || shift[a] >= h)
            throw InvalidArgument("mesh shift components must lie in [0, h)");
    ReferenceMesh mesh;
    mesh.h = h;
    mesh.shift = shift;
    // A relative slack keeps exact tilings (2/h integral) from gaining a cell.
    mesh.nx = static_cast<int>(std::ceil((2.0 + shift.x()) / h - 1e-10));
    mesh.ny = static_cast<int>(std::ceil((2.0 + shift.y()) / h - 1e-10));
    return mesh;
}

Vec2 centered_shift(double h)
{
    const double k = std::ceil(1.0 / h - 0.5 - 1e-10);
    double s = h * (k + 0.5) - 1.0;
    if (s < 0.0 || s >= h)
        s = std::fmod(std::fmod(s, h) + h, h);
    return Vec2(s, s);
}

// ---------------------------------------------------------------------------
// Classification

double ActiveMesh::face_open_length(int cell_a, int cell_b) const
{
    if (!is_active(cell_a) || !is_active(cell_b))
        return 0.0;
    const auto key = std::minmax(cell_a, cell_b);
    if (auto it = ghost_lookup_.find({key.first, key.second}); it != ghost_lookup_.end())
        return ghost_faces[it->second].open_length;
    return mesh.h; // both interior
}

ActiveMesh classify_elements(const ReferenceMesh& mesh, const PolygonDomain& domain)
{
    if (domain.size() < 3)
        throw GeometryError("classify_elements: degenerate polygon");
    ActiveMesh active;
    active.mesh = mesh;
    active.corner = domain.corner();
    const int nc = mesh.n_cells();
    active.state.assign(nc, CellState::Exterior);
    active.covered_area.assign(nc, 0.0);

    const double h = mesh.h;
    const double h2 = h * h;

    // Cells met by the boundary: each edge is split at grid lines so every
    // piece lies in one closed cell.
    std::vector<char> marked(nc, 0);
    auto mark = [&](const Vec2& p) {
        const Vec2 o = mesh.origin();
        const double fx = (p.x() - o.x()) / h;
        const double fy = (p.y() - o.y()) / h;
        const int i0 = static_cast<int>(std::floor(fx));
        const int j0 = static_cast<int>(std::floor(fy));
        // Points on grid lines touch the neighbours too.
        const bool on_x = std::abs(fx - std::round(fx)) < 1e-12;
        const bool on_y = std::abs(fy - std::round(fy)) < 1e-12;
        for (int di = on_x ? -1 : 0; di <= 0; ++di)
            for (int dj = on_y ? -1 : 0; dj <= 0; ++dj) {
                const int i = (on_x ? static_cast<int>(std::round(fx)) : i0) + di;
                const int j = (on_y ? static_cast<int>(std::round(fy)) : j0) + dj;
                if (i >= 0 && j >= 0 && i < mesh.nx && j < mesh.ny)
                    marked[mesh.index(i, j)] = 1;
            }
    };
    for (std::size_t e = 0; e < domain.size(); ++e) {
        const Vec2 a = domain.vertex(e);
        const Vec2 b = domain.vertex(e + 1);
        const auto ts = grid_breaks(mesh, a, b);
        mark(a);
        for (std::size_t k = 0; k + 1 < ts.size(); ++k)
            mark(a + 0.5 * (ts[k] + ts[k + 1]) * (b - a));
    }

    for (int c = 0; c < nc; ++c) {
        const Vec2 lo = mesh.cell_lo(c);
        const Vec2 hi = mesh.cell_hi(c);
        if (!marked[c]) {
            if (domain.contains(0.5 * (lo + hi))) {
                active.state[c] = CellState::Interior;
                active.covered_area[c] = h2;
            }
            continue;
        }
        const double area = std::max(clipped_area(domain.vertices(), lo, hi), 0.0);
        active.covered_area[c] = area;
        if (area >= h2 * (1.0 - kCutTolerance)) {
            active.state[c] = CellState::Interior;
            continue;
        }
        if (area <= 0.0)
            continue;
        active.state[c] = CellState::Cut;
        auto rings = clip_to_box(domain.vertices(), lo, hi);
        double piece_area = 0.0;
        for (auto& ring : rings) {
            ring = cleaned_ring(ring, h);
            piece_area += ring.size() >= 3 ? signed_area(ring) : 0.0;
        }
        if (std::abs(piece_area - area) > 1e-10 * h2) {
            char buf[200];
            std::snprintf(buf, sizeof buf,
                          "classify_elements: clipping of cell %d is inconsistent (%.17g vs %.17g)",
                          c, piece_area, area);
            throw GeometryError(buf);
        }
        auto& kept = active.pieces[c];
        for (auto& ring : rings)
            if (ring.size() >= 3 && signed_area(ring) > 0.0)
                kept.push_back(std::move(ring));
    }

    for (int c = 0; c < nc; ++c) {
        if (active.state[c] == CellState::Exterior)
            continue;
        active.active_cells.push_back(c);
        if (active.state[c] == CellState::Cut)
            active.cut_cells.push_back(c);
    }

    auto face_length = [&](const Vec2& a, const Vec2& b) {
        return std::min(segment_length_inside(domain, a, b), h);
    };
    for (int j = 0; j < mesh.ny; ++j)
        for (int i = 0; i < mesh.nx; ++i) {
            const int c = mesh.index(i, j);
            if (!active.is_active(c))
                continue;
            for (int axis = 0; axis < 2; ++axis) {
                const int ni = i + (axis == 0 ? 1 : 0);
                const int nj = j + (axis == 1 ? 1 : 0);
                if (ni >= mesh.nx || nj >= mesh.ny)
                    continue;
                const int n = mesh.index(ni, nj);
                if (!active.is_active(n) || (!active.is_cut(c) && !active.is_cut(n)))
                    continue;
                GhostFace f;
                f.minus = c;
                f.plus = n;
                f.axis = axis;
                f.a = mesh.cell_lo(n);
                f.b = axis == 0 ? Vec2(f.a.x(), f.a.y() + h) : Vec2(f.a.x() + h, f.a.y());
                f.open_length = face_length(f.a, f.b);
                active.ghost_lookup_[{c, n}] = active.ghost_faces.size();
                active.ghost_faces.push_back(f);
            }
        }
    return active;
}

// ---------------------------------------------------------------------------
// Volume quadrature

double QuadratureCell::measure() const
{
    double s = 0.0;
    for (double w : weights)
        s += w;
    return s;
}

std::vector<std::array<Vec2, 3>> triangulate(const std::vector<Vec2>& ring,
                                             const std::optional<Vec2>& apex)
{
    double scale = 0.0;
    for (const Vec2& v : ring)
        scale = std::max(scale, (v - ring.front()).norm());
    std::vector<Vec2> poly = cleaned_ring(ring, std::max(scale, 1e-300));
    if (poly.size() < 3)
        return {};
    if (signed_area(poly) <= 0.0)
        throw GeometryError("triangulate: ring must be counterclockwise");

    if (apex) {
        const double tol = 1e-13 * scale;
        auto it = std::find_if(poly.begin(), poly.end(),
                               [&](const Vec2& v) { return (v - *apex).norm() <= tol; });
        if (it == poly.end()) {
            // Insert the apex when it lies on an edge.
            for (std::size_t i = 0; i < poly.size(); ++i)
                if (on_segment(*apex, poly[i], poly[(i + 1) % poly.size()], tol)) {
                    poly.insert(poly.begin() + static_cast<std::ptrdiff_t>(i + 1), *apex);
                    it = poly.begin() + static_cast<std::ptrdiff_t>(i + 1);
                    break;
                }
        }
        if (it != poly.end()) {
            std::rotate(poly.begin(), it, poly.end());
            std::vector<std::array<Vec2, 3>> fan;
            bool star = true;
            double swept = 0.0;
            for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
                const Vec2 u = poly[i] - poly[0];
                const Vec2 w = poly[i + 1] - poly[0];
                const double c = cross(u, w);
                if (c < 0.0) {
                    star = false;
                    break;
                }
                swept += std::atan2(c, u.dot(w));
                if (c > 0.0)
                    fan.push_back({poly[0], poly[i], poly[i + 1]});
            }
            if (star && swept < 2.0 * 3.141592653589793)
                return fan;
        }
    }
    return ear_clip(std::move(poly));
}

QuadratureCell clip_element(const ActiveMesh& active, int cell, int order, int corner_layers)
{
    if (cell < 0 || cell >= active.mesh.n_cells() || !active.is_active(cell))
        throw InvalidArgument("clip_element: cell is not active");
    QuadratureCell q;
    q.parent_cell = cell;
    const ReferenceMesh& mesh = active.mesh;
    const double h = mesh.h;
    if (active.covered_area[cell] < kCutTolerance * h * h)
        return q;
    const Vec2 lo = mesh.cell_lo(cell);
    const Vec2 hi = mesh.cell_hi(cell);

    std::optional<Vec2> apex;
    if (active.corner) {
        const Vec2 c = *active.corner;
        const double tol = 1e-12 * h;
        if (c.x() >= lo.x() - tol && c.x() <= hi.x() + tol && c.y() >= lo.y() - tol &&
            c.y() <= hi.y() + tol)
            apex = c;
    }

    if (!active.is_cut(cell) && !apex) {
        box_rule(lo, hi, order, q.points, q.weights);
        return q;
    }
    std::vector<std::vector<Vec2>> rings;
    if (active.is_cut(cell))
        rings = active.pieces.at(cell);
    else
        rings.push_back({lo, Vec2(hi.x(), lo.y()), hi, Vec2(lo.x(), hi.y())});

    for (const auto& ring : rings) {
        for (const auto& tri : triangulate(ring, apex)) {
            const bool at_apex = apex && (tri[0] - *apex).norm() <= 1e-12 * h;
            triangle_rule(tri[0], tri[1], tri[2], order, at_apex ? corner_layers : 0, q.points,
                          q.weights);
        }
    }
    if (q.points.empty())
        throw GeometryError("clip_element: clipping produced an empty region");
    return q;
}

std::vector<QuadratureCell> build_volume_quadrature(const ActiveMesh& active, int order,
                                                    int corner_layers)
{
    std::vector<QuadratureCell> out;
    out.reserve(active.active_cells.size());
    for (int c : active.active_cells)
        out.push_back(clip_element(active, c, order, corner_layers));
    return out;
}

// ---------------------------------------------------------------------------
// Boundary quadrature

double BoundaryQuadrature::measure() const
{
    double s = 0.0;
    for (double w : weights)
        s += w;
    return s;
}

namespace {

int nearby_active_cell(const ActiveMesh& active, const Vec2& a, const Vec2& b, double slack)
{
    const ReferenceMesh& mesh = active.mesh;
    const int c = mesh.locate(0.5 * (a + b));
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
            const Vec2 lo = mesh.cell_lo(n).array() - slack;
            const Vec2 hi = mesh.cell_hi(n).array() + slack;
            auto inside = [&](const Vec2& p) {
                return p.x() >= lo.x() && p.y() >= lo.y() && p.x() <= hi.x() && p.y() <= hi.y();
            };
            if (inside(a) && inside(b))
                return n;
        }
    return -1;
}

} // namespace

std::vector<BoundaryQuadrature> build_boundary_quadrature(const ActiveMesh& active,
                                                          const PolygonDomain& domain, int order)
{
    const ReferenceMesh& mesh = active.mesh;
    const GaussRule& g = gauss_legendre(order);
    std::map<int, BoundaryQuadrature> by_cell;
    for (std::size_t e = 0; e < domain.size(); ++e) {
        const Vec2 a = domain.vertex(e);
        const Vec2 b = domain.vertex(e + 1);
        const Vec2 d = b - a;
        const double len = d.norm();
        if (len == 0.0)
            continue;
        const Vec2 normal(d.y() / len, -d.x() / len);
        const auto ts = grid_breaks(mesh, a, b);
        for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
            const Vec2 pa = a + ts[k] * d;
            const Vec2 pb = a + ts[k + 1] * d;
            const Vec2 mid = 0.5 * (pa + pb);
            int cell = mesh.locate(mid - 1e-9 * mesh.h * normal);
            if (cell < 0 || !active.is_active(cell))
                cell = mesh.locate(mid);
            // A piece far below clipping precision may sit in a sliver whose
            // area rounded to zero; give it to an active neighbour within reach.
            if (cell < 0 || !active.is_active(cell))
                cell = nearby_active_cell(active, pa, pb, 1e-6 * mesh.h);
            if (cell < 0 || !active.is_active(cell)) {
                char buf[200];
                std::snprintf(buf, sizeof buf,
                              "boundary segment (%.17g, %.17g)-(%.17g, %.17g) outside the active mesh",
                              pa.x(), pa.y(), pb.x(), pb.y());
                throw GeometryError(buf);
            }
            BoundaryQuadrature& bq = by_cell[cell];
            bq.parent_cell = cell;
            const double seg = (pb - pa).norm();
            for (std::size_t i = 0; i < g.points.size(); ++i) {
                bq.points.push_back(pa + g.points[i] * (pb - pa));
                bq.weights.push_back(g.weights[i] * seg);
                bq.normals.push_back(normal);
                bq.tags.push_back(domain.edge_tags()[e]);
            }
        }
    }
    std::vector<BoundaryQuadrature> out;
    out.reserve(by_cell.size());
    for (auto& [cell, bq] : by_cell)
        out.push_back(std::move(bq));
    return out;
}

BoundaryQuadrature boundary_quadrature(const ActiveMesh& active, const PolygonDomain& domain,
                                       int cell, int order)
{
    for (auto& bq : build_boundary_quadrature(active, domain, order))
        if (bq.parent_cell == cell)
            return bq;
    throw GeometryError("boundary_quadrature: no boundary inside cell");
}

// ---------------------------------------------------------------------------

PolygonDomain load_polygon_json(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw InvalidArgument("polygon: cannot open file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument("polygon: malformed JSON in '" + path + "': " + e.what());
    }
    if (!j.contains("vertices") || !j["vertices"].is_array())
        throw InvalidArgument("polygon.vertices: missing or not an array");
    std::vector<Vec2> verts;
    for (const auto& v : j["vertices"]) {
        if (!v.is_array() || v.size() != 2)
            throw InvalidArgument("polygon.vertices: each entry must be [x, y]");
        verts.emplace_back(v[0].get<double>(), v[1].get<double>());
    }
    std::optional<std::size_t> corner;
    if (j.contains("corner_index") && !j["corner_index"].is_null())
        corner = j["corner_index"].get<std::size_t>();
    std::vector<int> tags;
    if (j.contains("edge_tags"))
        tags = j["edge_tags"].get<std::vector<int>>();
    return PolygonDomain(std::move(verts), corner, std::move(tags));
}

} // namespace gradedfem
