#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "gradedfem/types.hpp"

namespace gradedfem {

/// Smooth bijective planar map applied after the radial grading.
struct PostMap {
    std::function<Vec2(const Vec2&)> forward;
    std::function<Vec2(const Vec2&)> inverse;
    std::function<Mat2(const Vec2&)> jacobian;

    /// x -> offset + matrix * x.
    static PostMap affine(const Mat2& matrix, const Vec2& offset);
    /// x -> offset + scale * x.
    static PostMap scaled(double scale, const Vec2& offset);
};

/// Radial grading r = r_hat^gamma toward the origin, optionally followed by a
/// post map. Angles are preserved and the unit circle is fixed.
class GradedMap {
public:
    explicit GradedMap(double gamma = 1.0, std::optional<PostMap> post_map = std::nullopt);

    double gamma() const { return gamma_; }
    const std::optional<PostMap>& post_map() const { return post_map_; }

    Vec2 forward(const Vec2& ref) const;
    Vec2 inverse(const Vec2& phys) const;
    /// Jacobian of the full map at a reference point.
    Mat2 jacobian(const Vec2& ref) const;
    /// Reference diffusion matrix DF^{-1} DF^{-T} |det DF|.
    Mat2 diffusion(const Vec2& ref) const;
    /// |det DF|, the area weight of the reference measure.
    double measure_weight(const Vec2& ref) const;
    /// Physical mesh function h r_hat^(gamma-1), scaled by the post map.
    double mesh_function(double h, const Vec2& ref) const;

    /// Samples the post-map Jacobian on [-1,1]^2 and throws if it degenerates.
    void check_post_map(int samples_per_axis = 33) const;

private:
    double gamma_;
    std::optional<PostMap> post_map_;
};

/// r_hat^(gamma-1) * q, the grading map in Cartesian form.
Vec2 graded_forward(double gamma, const Vec2& ref);
Vec2 graded_inverse(double gamma, const Vec2& phys);
/// DF of the pure grading map.
Mat2 graded_jacobian(double gamma, const Vec2& ref);

/// B = S^T diag(1/gamma, gamma) S with S the rotation by the polar angle.
/// At the origin the angle-zero value is returned and a diagnostic is logged.
Mat2 b_matrix(double gamma, const Vec2& ref);

/// gamma (x^2 + y^2)^(gamma - 1).
double load_weight(double gamma, const Vec2& ref);

/// h r_hat^(gamma - 1).
double mesh_function(double gamma, double h, const Vec2& ref);

/// Strict lower bound p * omega / pi on gamma for a corner of opening angle
/// omega in (pi, 2 pi).
double min_gamma(int p, double omega);

/// Weighted-norm powers alpha_1..alpha_{p+1} attached to the grading.
std::vector<double> alpha_powers(int p, double gamma);

} // namespace gradedfem
