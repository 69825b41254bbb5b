#pragma once

#include <array>
#include <optional>
#include <vector>

#include "gradedfem/analysis.hpp"
#include "gradedfem/assembly.hpp"
#include "gradedfem/problems.hpp"

namespace gradedfem {

/// One patch in physical coordinates. The patch map is
/// x = center + scale * F_gamma(x_hat); with a corner, `center` is the corner
/// vertex. Without a corner the grading is normally 1.
struct Patch {
    std::vector<Vec2> vertices; ///< counterclockwise, physical coordinates
    std::optional<std::size_t> corner_index;
    double gamma = 1.0;
    std::optional<Vec2> center; ///< defaults to the corner or the vertex mean
    double scale = 0.0;         ///< 0: largest distance from center to a vertex

    Vec2 resolved_center() const;
    double resolved_scale() const;
    GradedMap map() const;
};

/// Straight interface segment shared by two patches (side1 < side2).
struct Interface {
    int side1 = 0;
    int side2 = 1;
    Vec2 a = Vec2::Zero();
    Vec2 b = Vec2::Zero();
};

struct PatchSet {
    std::vector<Patch> patches;
    std::vector<Interface> interfaces;

    /// Checks indices and that every interface lies on an edge of both sides.
    void validate() const;
};

/// Reference polygon of a patch: physical edges are subdivided (edges through
/// the corner stay single segments) and pulled back through the patch map.
/// Edges lying on an interface are tagged with its index + 1.
PolygonDomain pullback_polygon(const PatchSet& set, std::size_t patch, int segments_per_unit = 2048);

struct MultipatchOptions {
    double h = 0.1; ///< reference mesh size, shared by all patches
    int degree = 2;
    int regularity = 1;
    bool split = false;
    int interface_order = 0; ///< Gauss points per interface piece; 0 selects p + 1
    int segments_per_unit = 2048;
};

struct MultipatchSystem {
    std::vector<Discretization> patches;
    std::vector<int> offsets; ///< first global DOF of each patch
    AssembledSystem system;

    int n_dofs() const { return static_cast<int>(system.rhs.size()); }
    Vector patch_coefficients(const Vector& u, std::size_t patch) const;
};

std::vector<Discretization> discretize_patches(const PatchSet& set, const MultipatchOptions& options);

/// One interface point seen from both sides.
struct InterfacePoint {
    Vec2 physical = Vec2::Zero();
    double weight = 0.0; ///< physical arc length weight
    std::array<Vec2, 2> reference;
    std::array<int, 2> cell{};
};

/// Gauss points on an interface, broken wherever either side's grid lines
/// cross it.
std::vector<InterfacePoint> interface_quadrature(const Discretization& side1,
                                                 const Discretization& side2,
                                                 const Interface& interface, int order);

/// Symmetric Nitsche coupling -<n.grad v>[w] - [v]<n.grad w> + beta <1/h_Omega>[v][w]
/// with [v] = v1 - v2, n the outward normal of side 1 and arithmetic averages.
std::vector<Triplet> assemble_interface(const Discretization& side1, int offset1,
                                        const Discretization& side2, int offset2,
                                        const Interface& interface, const NitscheParams& params,
                                        int order);

/// Block system of all patches plus interface coupling.
MultipatchSystem assemble_multipatch(const PatchSet& set, const MultipatchOptions& options,
                                     const NitscheParams& params, const ScalarField& f,
                                     const ScalarField& g);

/// L2 norm of the jump of the discrete solution over all interfaces.
double interface_jump_norm(const MultipatchSystem& mp, const PatchSet& set, const Vector& u);

/// Patchwise errors summed in quadrature.
ErrorReport multipatch_errors(const MultipatchSystem& mp, const Vector& u, const Problem& problem,
                              const NitscheParams& params);

/// Two nonconvex corners: [0,1]x[0.5,1] with legs [0,0.3]x[0,0.5] and
/// [0.7,1]x[0,0.5], split into a graded left and right patch and an ungraded
/// middle strip.
PatchSet fig8_patch_set(double gamma = 4.0);
/// x(1-x) on the top edge y = 1, zero elsewhere.
ScalarField fig8_dirichlet();

/// Unit square as one patch, or split at x = 0.5 into two; all patches use
/// the same map scale so the physical mesh sizes agree.
PatchSet unit_square_patches(int n_patches);

} // namespace gradedfem
