#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "gradedfem/geometry.hpp"
#include "gradedfem/mapping.hpp"
#include "gradedfem/spaces.hpp"
#include "gradedfem/types.hpp"

namespace gradedfem {

/// Scalar field on the physical domain.
using ScalarField = std::function<double(const Vec2&)>;

/// Nitsche penalty beta and ghost-penalty scale tau.
struct NitscheParams {
    double beta = 100.0;
    double tau = 0.1;

    void validate() const;
};

/// Everything needed to assemble one patch: geometry, map, mesh, space and
/// quadrature, all in reference coordinates.
struct Discretization {
    PolygonDomain domain;
    GradedMap map;
    std::shared_ptr<const ActiveMesh> active;
    std::shared_ptr<const SplineSpace> space;
    DofMap dofs;
    std::vector<QuadratureCell> volume;
    std::vector<BoundaryQuadrature> boundary;
    int quad_order = 0;

    double h() const { return active->mesh.h; }
    int degree() const { return space->degree(); }
    int n_dofs() const { return dofs.n_dofs; }
};

struct DiscretizationOptions {
    double h = 0.1;
    Vec2 shift = Vec2::Zero();
    int degree = 2;
    int regularity = 1;
    bool split = false;
    int quad_order = 0; ///< 0 selects degree + 2
};

Discretization discretize(const PolygonDomain& domain, const GradedMap& map,
                          const DiscretizationOptions& options);

/// Element contributions before global insertion.
struct Contribution {
    std::vector<Triplet> entries;
    Vector rhs;
};

/// Sparse symmetric system of one or several coupled patches.
struct AssembledSystem {
    SparseMatrix matrix;
    Vector rhs;
    DofMap dof_map; ///< DOF map of the first (or only) patch
    NitscheParams params;
};

/// (grad v, B grad w) over the clipped cells.
Contribution assemble_volume(const SplineSpace& space, const DofMap& dofs, const GradedMap& map,
                             const std::vector<QuadratureCell>& quad);

/// Symmetric Nitsche terms on Dirichlet-tagged boundary points with the
/// uniform reference penalty beta / h, plus the matching load terms for the
/// physical boundary data g (evaluated at F(x_hat)).
Contribution assemble_nitsche_boundary(const SplineSpace& space, const DofMap& dofs,
                                       const GradedMap& map,
                                       const std::vector<BoundaryQuadrature>& bquad,
                                       const NitscheParams& params, const ScalarField& g);

/// Sum over ghost faces and j = 1..p of tau h^(2j-1) ([D^j v], [D^j w]) with
/// the Frobenius pairing of the full j-th derivative tensor.
Contribution assemble_ghost_penalty(const SplineSpace& space, const DofMap& dofs,
                                    const NitscheParams& params);

/// (gamma r_hat^(2(gamma-1)) f o F, v) over the clipped cells.
Vector assemble_load(const SplineSpace& space, const DofMap& dofs, const GradedMap& map,
                     const std::vector<QuadratureCell>& quad, const ScalarField& f);

/// Full single-patch system.
AssembledSystem assemble_system(const Discretization& disc, const NitscheParams& params,
                                const ScalarField& f, const ScalarField& g);

/// Ghost-penalty seminorm s_h(v, v) of a discrete function.
double ghost_penalty_energy(const SplineSpace& space, const DofMap& dofs,
                            const NitscheParams& params, const Vector& coeffs);

SparseMatrix to_sparse(int n, const std::vector<Triplet>& entries);

} // namespace gradedfem
