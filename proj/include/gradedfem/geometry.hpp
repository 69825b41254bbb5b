#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gradedfem/types.hpp"

namespace gradedfem {

/// Edge tag of a Dirichlet boundary edge. Edges with any other tag are patch
/// interfaces and receive no boundary terms.
inline constexpr int kDirichletTag = 0;

/// Simple counterclockwise polygon in reference coordinates.
///
/// When a singular corner is marked it must sit exactly at the origin. Curved
/// boundaries are expected to be polygonized by the caller at a resolution
/// much finer than the mesh size.
class PolygonDomain {
public:
    PolygonDomain() = default;

    /// Validates orientation, simplicity, the corner position and containment
    /// in [-1,1]^2. `edge_tags` may be empty (all edges Dirichlet).
    PolygonDomain(std::vector<Vec2> vertices, std::optional<std::size_t> corner_index,
                  std::vector<int> edge_tags = {});

    const std::vector<Vec2>& vertices() const { return vertices_; }
    const std::vector<int>& edge_tags() const { return edge_tags_; }
    std::optional<std::size_t> corner_index() const { return corner_index_; }
    std::optional<Vec2> corner() const;
    std::size_t size() const { return vertices_.size(); }
    Vec2 vertex(std::size_t i) const { return vertices_[i % vertices_.size()]; }

    double area() const;
    double perimeter() const;
    /// Winding-number membership; boundary points count as inside.
    bool contains(const Vec2& p) const;

    /// Same polygon with the vertex list rotated to start at `start`.
    PolygonDomain relabeled(std::size_t start) const;

private:
    std::vector<Vec2> vertices_;
    std::optional<std::size_t> corner_index_;
    std::vector<int> edge_tags_;
};

/// Uniform square grid over [-1,1]^2, displaced by `shift`.
///
/// Grid lines sit at -1 - shift + k h, and each axis has enough cells to cover
/// [-1,1]. Cells are indexed row-major: index = j * nx + i.
struct ReferenceMesh {
    double h = 0.0;
    Vec2 shift = Vec2::Zero();
    int nx = 0;
    int ny = 0;

    Vec2 origin() const { return Vec2(-1.0 - shift.x(), -1.0 - shift.y()); }
    int n_cells() const { return nx * ny; }
    int index(int i, int j) const { return j * nx + i; }
    int col(int cell) const { return cell % nx; }
    int row(int cell) const { return cell / nx; }
    Vec2 cell_lo(int cell) const;
    Vec2 cell_hi(int cell) const;
    /// Cell containing p (half-open convention), or -1 outside the grid.
    int locate(const Vec2& p) const;
};

ReferenceMesh build_reference_mesh(double h, const Vec2& shift = Vec2::Zero());

/// Offset placing the origin at the centre of a cell.
Vec2 centered_shift(double h);

enum class CellState : std::uint8_t { Exterior, Interior, Cut };

/// Interior face between two active cells, at least one of them cut.
struct GhostFace {
    int minus = -1; ///< lower-left cell
    int plus = -1;  ///< upper-right neighbour
    int axis = 0;   ///< 0: vertical face (neighbours along x); 1: horizontal face
    double open_length = 0.0; ///< length of face intersected with the domain
    Vec2 a = Vec2::Zero();
    Vec2 b = Vec2::Zero();
};

/// Background cells restricted to the domain.
struct ActiveMesh {
    ReferenceMesh mesh;
    std::vector<CellState> state;
    std::vector<double> covered_area; ///< area(cell ∩ domain) per cell
    std::vector<int> active_cells;
    std::vector<int> cut_cells;
    std::vector<GhostFace> ghost_faces;
    /// Connected pieces of cell ∩ domain for cut cells, each a CCW ring.
    std::map<int, std::vector<std::vector<Vec2>>> pieces;
    std::optional<Vec2> corner;

    bool is_active(int cell) const { return state[cell] != CellState::Exterior; }
    bool is_cut(int cell) const { return state[cell] == CellState::Cut; }
    /// Length of the shared face ∩ domain for two face-adjacent active cells.
    double face_open_length(int cell_a, int cell_b) const;

private:
    friend ActiveMesh classify_elements(const ReferenceMesh&, const PolygonDomain&);
    std::map<std::pair<int, int>, std::size_t> ghost_lookup_;
};

/// Relative exterior-area threshold above which a cell counts as cut.
inline constexpr double kCutTolerance = 1e-12;

ActiveMesh classify_elements(const ReferenceMesh& mesh, const PolygonDomain& domain);

/// Quadrature over cell ∩ domain in reference coordinates.
struct QuadratureCell {
    int parent_cell = -1;
    std::vector<Vec2> points;
    std::vector<double> weights;

    double measure() const;
};

/// Quadrature for cell ∩ domain with `order` Gauss points per direction.
/// Regions touching the singular corner are fanned from it; `corner_layers` > 0
/// adds geometric radial subdivision toward the corner. Slivers below
/// kCutTolerance * h^2 yield an empty rule.
QuadratureCell clip_element(const ActiveMesh& active, int cell, int order, int corner_layers = 0);

/// Rules for every active cell, ordered as active.active_cells.
std::vector<QuadratureCell> build_volume_quadrature(const ActiveMesh& active, int order,
                                                    int corner_layers = 0);

/// Quadrature along the part of the domain boundary owned by one cell.
struct BoundaryQuadrature {
    int parent_cell = -1;
    std::vector<Vec2> points;
    std::vector<double> weights;
    std::vector<Vec2> normals; ///< unit outward normals
    std::vector<int> tags;     ///< edge tag of the polygon edge

    double measure() const;
};

/// Splits every polygon edge at grid lines and assigns each piece to the
/// active cell on its interior side. Result is sorted by cell.
std::vector<BoundaryQuadrature> build_boundary_quadrature(const ActiveMesh& active,
                                                          const PolygonDomain& domain, int order);

/// Boundary rule for a single cell; throws GeometryError when no boundary
/// passes through it.
BoundaryQuadrature boundary_quadrature(const ActiveMesh& active, const PolygonDomain& domain,
                                       int cell, int order);

/// Triangulates a simple CCW ring (ear clipping; a fan from `apex` is used when
/// it is a vertex and the ring is star-shaped from it). Triangles are CCW and
/// the apex, when used, is always the first vertex.
std::vector<std::array<Vec2, 3>> triangulate(const std::vector<Vec2>& ring,
                                             const std::optional<Vec2>& apex = std::nullopt);

PolygonDomain load_polygon_json(const std::string& path);

} // namespace gradedfem
