#include "gradedfem/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gradedfem {

// ---------------------------------------------------------------------------
// BSplineBasis1D

BSplineBasis1D::BSplineBasis1D(double x0, double h, int n_cells, int degree, int regularity)
    : degree_(degree), multiplicity_(degree - regularity), n_cells_(n_cells), x0_(x0), h_(h)
{
    if (degree < 1)
        throw InvalidArgument("spline degree must be at least 1");
    if (regularity < 0 || regularity >= degree)
        throw InvalidArgument("spline regularity must satisfy 0 <= r <= p - 1");
    if (n_cells < 1)
        throw InvalidArgument("spline basis needs at least one cell");
    knots_.assign(degree + 1, x0);
    for (int c = 1; c < n_cells; ++c)
        knots_.insert(knots_.end(), multiplicity_, x0 + c * h);
    knots_.insert(knots_.end(), degree + 1, x0 + n_cells * h);
}

std::pair<int, int> BSplineBasis1D::support_cells(int i) const
{
    // Function i is nonzero on cells c with m c <= i <= m c + p.
    const int m = multiplicity_;
    const int first = i - degree_ <= 0 ? 0 : (i - degree_ + m - 1) / m;
    const int last = std::min(n_cells_ - 1, i / m);
    return {first, last};
}

void BSplineBasis1D::evaluate(int cell, double x, int n_derivs, Eigen::MatrixXd& out) const
{
    const int p = degree_;
    const int s = p + multiplicity_ * cell; // knot span index
    const auto& U = knots_;
    out.setZero(n_derivs + 1, p + 1);

    Eigen::MatrixXd ndu(p + 1, p + 1);
    std::vector<double> left(p + 1), right(p + 1);
    ndu(0, 0) = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = x - U[s + 1 - j];
        right[j] = U[s + j] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            ndu(j, r) = right[r + 1] + left[j - r];
            const double temp = ndu(r, j - 1) / ndu(j, r);
            ndu(r, j) = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu(j, j) = saved;
    }
    for (int j = 0; j <= p; ++j)
        out(0, j) = ndu(j, p);

    const int nd = std::min(n_derivs, p);
    Eigen::MatrixXd a(2, p + 1);
    for (int r = 0; r <= p; ++r) {
        int s1 = 0;
        int s2 = 1;
        a(0, 0) = 1.0;
        for (int k = 1; k <= nd; ++k) {
            double d = 0.0;
            const int rk = r - k;
            const int pk = p - k;
            if (r >= k) {
                a(s2, 0) = a(s1, 0) / ndu(pk + 1, rk);
                d = a(s2, 0) * ndu(rk, pk);
            }
            const int j1 = rk >= -1 ? 1 : -rk;
            const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
            for (int j = j1; j <= j2; ++j) {
                a(s2, j) = (a(s1, j) - a(s1, j - 1)) / ndu(pk + 1, rk + j);
                d += a(s2, j) * ndu(rk + j, pk);
            }
            if (r <= pk) {
                a(s2, k) = -a(s1, k - 1) / ndu(pk + 1, r);
                d += a(s2, k) * ndu(r, pk);
            }
            out(k, r) = d;
            std::swap(s1, s2);
        }
    }
    double factor = p;
    for (int k = 1; k <= nd; ++k) {
        out.row(k) *= factor;
        factor *= (p - k);
    }
}

std::vector<double> BSplineBasis1D::greville() const
{
    std::vector<double> g(size());
    for (int i = 0; i < size(); ++i) {
        double s = 0.0;
        for (int k = 1; k <= degree_; ++k)
            s += knots_[i + k];
        g[i] = s / degree_;
    }
    return g;
}

// ---------------------------------------------------------------------------
// DofMap

int DofMap::global(int basis, int component) const
{
    for (int d = 0; d < n_dofs; ++d)
        if (dof_basis[d] == basis && dof_component[d] == component)
            return d;
    return -1;
}

int DofMap::split_count() const
{
    int n = 0;
    for (int d = 0; d < n_dofs; ++d)
        if (dof_component[d] == 1)
            ++n;
    return n;
}

// ---------------------------------------------------------------------------
// SplineSpace

SplineSpace::SplineSpace(std::shared_ptr<const ActiveMesh> active, int degree, int regularity)
    : active_(std::move(active)), degree_(degree), regularity_(regularity)
{
    if (!active_)
        throw InvalidArgument("SplineSpace: null active mesh");
    const ReferenceMesh& mesh = active_->mesh;
    const Vec2 o = mesh.origin();
    bx_ = BSplineBasis1D(o.x(), mesh.h, mesh.nx, degree, regularity);
    by_ = BSplineBasis1D(o.y(), mesh.h, mesh.ny, degree, regularity);

    std::vector<int> tensor_to_dof(n_tensor(), -1);
    for (int c : active_->active_cells)
        for (int l = 0; l < local_size(); ++l)
            tensor_to_dof[tensor_index(c, l)] = 0;
    dofs_.cell_dofs.assign(mesh.n_cells(), {});
    for (int t = 0; t < n_tensor(); ++t)
        if (tensor_to_dof[t] == 0) {
            tensor_to_dof[t] = dofs_.n_dofs++;
            dofs_.dof_basis.push_back(t);
            dofs_.dof_component.push_back(0);
        }
    for (int c : active_->active_cells) {
        auto& cd = dofs_.cell_dofs[c];
        cd.resize(local_size());
        for (int l = 0; l < local_size(); ++l)
            cd[l] = tensor_to_dof[tensor_index(c, l)];
    }
}

int SplineSpace::tensor_index(int cell, int local) const
{
    const ReferenceMesh& mesh = active_->mesh;
    const int lx = local % (degree_ + 1);
    const int ly = local / (degree_ + 1);
    const int ix = bx_.first_function(mesh.col(cell)) + lx;
    const int iy = by_.first_function(mesh.row(cell)) + ly;
    return iy * bx_.size() + ix;
}

std::vector<int> SplineSpace::support(int tensor) const
{
    const ReferenceMesh& mesh = active_->mesh;
    const auto [cx0, cx1] = bx_.support_cells(tensor % bx_.size());
    const auto [cy0, cy1] = by_.support_cells(tensor / bx_.size());
    std::vector<int> cells;
    for (int j = cy0; j <= cy1; ++j)
        for (int i = cx0; i <= cx1; ++i) {
            const int c = mesh.index(i, j);
            if (active_->is_active(c))
                cells.push_back(c);
        }
    return cells;
}

SplineSpace build_space(std::shared_ptr<const ActiveMesh> active, int degree, int regularity)
{
    return SplineSpace(std::move(active), degree, regularity);
}

// ---------------------------------------------------------------------------
// Evaluation

BasisEval eval_basis(const SplineSpace& space, const DofMap& dofs, int cell, const Vec2& point,
                     int max_deriv)
{
    const int p = space.degree();
    if (max_deriv < 0 || max_deriv > p)
        throw InvalidArgument("eval_basis: derivative order must lie in [0, p]");
    const ActiveMesh& active = space.active();
    if (cell < 0 || cell >= active.mesh.n_cells() || !active.is_active(cell))
        throw InvalidArgument("eval_basis: point outside the active mesh");
    const ReferenceMesh& mesh = active.mesh;

    Eigen::MatrixXd ex, ey;
    space.basis_x().evaluate(mesh.col(cell), point.x(), max_deriv, ex);
    space.basis_y().evaluate(mesh.row(cell), point.y(), max_deriv, ey);

    BasisEval ev;
    ev.cell = cell;
    ev.local_dofs = dofs.cell_dofs[cell];
    ev.values.resize(derivative_count(max_deriv), space.local_size());
    for (int k = 0; k <= max_deriv; ++k)
        for (int ay = 0; ay <= k; ++ay) {
            const int ax = k - ay;
            const int row = derivative_index(ax, ay);
            for (int ly = 0; ly <= p; ++ly)
                for (int lx = 0; lx <= p; ++lx)
                    ev.values(row, ly * (p + 1) + lx) = ex(ax, lx) * ey(ay, ly);
        }
    return ev;
}

BasisEval eval_basis(const SplineSpace& space, const DofMap& dofs, const Vec2& point,
                     int max_deriv)
{
    const int cell = space.active().mesh.locate(point);
    if (cell < 0 || !space.active().is_active(cell))
        throw InvalidArgument("eval_basis: point outside the active mesh");
    return eval_basis(space, dofs, cell, point, max_deriv);
}

FieldValue evaluate_field(const SplineSpace& space, const DofMap& dofs, const Vector& coeffs,
                          int cell, const Vec2& point)
{
    const BasisEval ev = eval_basis(space, dofs, cell, point, 1);
    FieldValue f;
    for (std::size_t l = 0; l < ev.local_dofs.size(); ++l) {
        const double c = coeffs[ev.local_dofs[l]];
        f.value += c * ev.value(static_cast<int>(l));
        f.grad += c * ev.grad(static_cast<int>(l));
    }
    return f;
}

// ---------------------------------------------------------------------------
// Splitting

DofMap split_disjoint_supports(const SplineSpace& space)
{
    const ActiveMesh& active = space.active();
    const ReferenceMesh& mesh = active.mesh;
    const double min_open = 1e-12 * mesh.h;

    DofMap out;
    out.cell_dofs.assign(mesh.n_cells(), {});
    for (int c : active.active_cells)
        out.cell_dofs[c].assign(space.local_size(), -1);

    // component_of[(tensor, cell)] via per-tensor labelling.
    std::vector<std::vector<std::pair<int, int>>> labels(space.n_tensor());
    for (int t = 0; t < space.n_tensor(); ++t) {
        const std::vector<int> cells = space.support(t);
        if (cells.empty())
            continue;
        std::vector<int> comp(cells.size(), -1);
        int n_comp = 0;
        for (std::size_t s = 0; s < cells.size(); ++s) {
            if (comp[s] >= 0)
                continue;
            std::vector<std::size_t> stack{s};
            comp[s] = n_comp;
            while (!stack.empty()) {
                const std::size_t u = stack.back();
                stack.pop_back();
                const int cu = cells[u];
                for (std::size_t v = 0; v < cells.size(); ++v) {
                    if (comp[v] >= 0)
                        continue;
                    const int cv = cells[v];
                    const int di = std::abs(mesh.col(cu) - mesh.col(cv));
                    const int dj = std::abs(mesh.row(cu) - mesh.row(cv));
                    if (di + dj != 1)
                        continue;
                    if (active.face_open_length(cu, cv) > min_open) {
                        comp[v] = n_comp;
                        stack.push_back(v);
                    }
                }
            }
            ++n_comp;
        }
        for (int k = 0; k < n_comp; ++k) {
            out.dof_basis.push_back(t);
            out.dof_component.push_back(k);
        }
        const int base = out.n_dofs;
        out.n_dofs += n_comp;
        for (std::size_t s = 0; s < cells.size(); ++s)
            labels[t].emplace_back(cells[s], base + comp[s]);
    }
    for (int c : active.active_cells)
        for (int l = 0; l < space.local_size(); ++l) {
            const int t = space.tensor_index(c, l);
            for (const auto& [cell, dof] : labels[t])
                if (cell == c) {
                    out.cell_dofs[c][l] = dof;
                    break;
                }
        }
    return out;
}

// ---------------------------------------------------------------------------
// Interpolation

Vector interpolate(const SplineSpace& space, const DofMap& dofs,
                   const std::function<double(const Vec2&)>& fn)
{
    const BSplineBasis1D& bx = space.basis_x();
    const BSplineBasis1D& by = space.basis_y();
    auto collocation = [](const BSplineBasis1D& b) {
        const auto g = b.greville();
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(b.size(), b.size());
        Eigen::MatrixXd ev;
        for (int i = 0; i < b.size(); ++i) {
            int cell = static_cast<int>(std::floor((g[i] - b.knots().front()) /
                                                   (b.knots().back() - b.knots().front()) *
                                                   b.n_cells()));
            cell = std::clamp(cell, 0, b.n_cells() - 1);
            b.evaluate(cell, g[i], 0, ev);
            for (int l = 0; l <= b.degree(); ++l)
                A(i, b.first_function(cell) + l) = ev(0, l);
        }
        return std::make_pair(A, g);
    };
    const auto [Ax, gx] = collocation(bx);
    const auto [Ay, gy] = collocation(by);
    Eigen::MatrixXd F(bx.size(), by.size());
    for (int j = 0; j < by.size(); ++j)
        for (int i = 0; i < bx.size(); ++i)
            F(i, j) = fn(Vec2(gx[i], gy[j]));
    // F = Ax C Ay^T
    const Eigen::MatrixXd tmp = Ax.partialPivLu().solve(F);
    const Eigen::MatrixXd C = Ay.partialPivLu().solve(tmp.transpose()).transpose();
    Vector coeffs(dofs.n_dofs);
    for (int d = 0; d < dofs.n_dofs; ++d) {
        const int t = dofs.dof_basis[d];
        coeffs[d] = C(t % bx.size(), t / bx.size());
    }
    return coeffs;
}

} // namespace gradedfem
