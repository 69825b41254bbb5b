#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "gradedfem/geometry.hpp"
#include "gradedfem/types.hpp"

namespace gradedfem {

/// Univariate B-splines of degree p on a uniform grid with open knot vector.
/// Interior knots have multiplicity p - r, giving C^r continuity.
class BSplineBasis1D {
public:
    BSplineBasis1D() = default;
    BSplineBasis1D(double x0, double h, int n_cells, int degree, int regularity);

    int degree() const { return degree_; }
    int size() const { return static_cast<int>(knots_.size()) - degree_ - 1; }
    int n_cells() const { return n_cells_; }
    const std::vector<double>& knots() const { return knots_; }

    /// Index of the first of the p+1 functions that are nonzero on `cell`.
    int first_function(int cell) const { return multiplicity_ * cell; }
    /// Inclusive range of cells in the support of function i.
    std::pair<int, int> support_cells(int i) const;

    /// Values and derivatives of the p+1 functions living on `cell` at x.
    /// out(k, l) holds the k-th derivative of function first_function(cell) + l.
    void evaluate(int cell, double x, int n_derivs, Eigen::MatrixXd& out) const;

    /// Greville abscissae, one per function.
    std::vector<double> greville() const;

private:
    int degree_ = 0;
    int multiplicity_ = 1;
    int n_cells_ = 0;
    double x0_ = 0.0;
    double h_ = 0.0;
    std::vector<double> knots_;
};

/// Assignment of global unknowns to (tensor basis function, support component).
struct DofMap {
    int n_dofs = 0;
    /// Per mesh cell, the global DOF of each of the (p+1)^2 local functions
    /// (x index fastest). Empty for exterior cells.
    std::vector<std::vector<int>> cell_dofs;
    std::vector<int> dof_basis;     ///< tensor basis index per global DOF
    std::vector<int> dof_component; ///< support component per global DOF

    /// Global DOF for (basis, component); -1 if absent.
    int global(int basis, int component = 0) const;
    /// Number of tensor functions carrying more than one DOF.
    int split_count() const;
};

/// Tensor-product spline space on the background grid, restricted to the
/// active cells.
class SplineSpace {
public:
    SplineSpace(std::shared_ptr<const ActiveMesh> active, int degree, int regularity);

    int degree() const { return degree_; }
    int regularity() const { return regularity_; }
    const ActiveMesh& active() const { return *active_; }
    std::shared_ptr<const ActiveMesh> active_ptr() const { return active_; }
    const BSplineBasis1D& basis_x() const { return bx_; }
    const BSplineBasis1D& basis_y() const { return by_; }
    int n_tensor() const { return bx_.size() * by_.size(); }
    int local_size() const { return (degree_ + 1) * (degree_ + 1); }
    /// Tensor index of local function l on cell.
    int tensor_index(int cell, int local) const;
    /// Active cells in the support of a tensor function, ascending.
    std::vector<int> support(int tensor) const;

    /// One DOF per active tensor function.
    const DofMap& dofs() const { return dofs_; }

private:
    std::shared_ptr<const ActiveMesh> active_;
    int degree_;
    int regularity_;
    BSplineBasis1D bx_;
    BSplineBasis1D by_;
    DofMap dofs_;
};

SplineSpace build_space(std::shared_ptr<const ActiveMesh> active, int degree, int regularity);

/// Number of mixed partials of total order <= max_deriv.
inline int derivative_count(int max_deriv) { return (max_deriv + 1) * (max_deriv + 2) / 2; }
/// Row of d^(ax+ay) / dx^ax dy^ay in BasisEval::values.
inline int derivative_index(int ax, int ay)
{
    const int k = ax + ay;
    return k * (k + 1) / 2 + ay;
}

/// Basis functions with support on one cell evaluated at one point.
struct BasisEval {
    int cell = -1;
    std::vector<int> local_dofs;
    /// values(derivative_index(ax, ay), l) for local function l.
    Eigen::MatrixXd values;

    double value(int l) const { return values(0, l); }
    Vec2 grad(int l) const { return Vec2(values(1, l), values(2, l)); }
};

/// Evaluates on an explicit cell; the point may lie on the cell boundary,
/// in which case the polynomial piece of that cell is used.
BasisEval eval_basis(const SplineSpace& space, const DofMap& dofs, int cell, const Vec2& point,
                     int max_deriv);

/// Locates the active cell containing the point first.
BasisEval eval_basis(const SplineSpace& space, const DofMap& dofs, const Vec2& point,
                     int max_deriv);

/// Splits each tensor function into one DOF per connected component of its
/// active support, where two face-adjacent cells connect only if their shared
/// face meets the domain.
DofMap split_disjoint_supports(const SplineSpace& space);

/// Coefficients of the tensor Greville interpolant of fn. Split copies of a
/// function receive the same coefficient.
Vector interpolate(const SplineSpace& space, const DofMap& dofs,
                   const std::function<double(const Vec2&)>& fn);

/// Value and gradient of a discrete function at a point of a given cell.
struct FieldValue {
    double value = 0.0;
    Vec2 grad = Vec2::Zero();
};
FieldValue evaluate_field(const SplineSpace& space, const DofMap& dofs, const Vector& coeffs,
                          int cell, const Vec2& point);

} // namespace gradedfem
