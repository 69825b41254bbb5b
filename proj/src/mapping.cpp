#include "gradedfem/mapping.hpp"

#include <atomic>
#include <cmath>
#include <iostream>
#include <numbers>

namespace gradedfem {

namespace {

/// Rotation whose rows are the radial and angular unit vectors at q.
Mat2 polar_rotation(const Vec2& q)
{
    const double r = q.norm();
    const double c = q.x() / r;
    const double s = q.y() / r;
    Mat2 S;
    S << c, s, -s, c;
    return S;
}

void warn_origin()
{
    static std::atomic<bool> warned{false};
    if (!warned.exchange(true))
        std::cerr << "gradedfem: diffusion matrix requested at the singular corner; "
                     "using the angle-zero value\n";
}

} // namespace

PostMap PostMap::affine(const Mat2& matrix, const Vec2& offset)
{
    if (std::abs(matrix.determinant()) < 1e-14)
        throw InvalidArgument("affine post map must be nonsingular");
    const Mat2 inv = matrix.inverse();
    PostMap m;
    m.forward = [matrix, offset](const Vec2& x) -> Vec2 { return offset + matrix * x; };
    m.inverse = [inv, offset](const Vec2& y) -> Vec2 { return inv * (y - offset); };
    m.jacobian = [matrix](const Vec2&) -> Mat2 { return matrix; };
    return m;
}

PostMap PostMap::scaled(double scale, const Vec2& offset)
{
    return affine(scale * Mat2::Identity(), offset);
}

Vec2 graded_forward(double gamma, const Vec2& ref)
{
    const double r = ref.norm();
    if (r == 0.0 || gamma == 1.0)
        return ref;
    return std::pow(r, gamma - 1.0) * ref;
}

Vec2 graded_inverse(double gamma, const Vec2& phys)
{
    const double r = phys.norm();
    if (r == 0.0 || gamma == 1.0)
        return phys;
    return std::pow(r, 1.0 / gamma - 1.0) * phys;
}

Mat2 graded_jacobian(double gamma, const Vec2& ref)
{
    const double r = ref.norm();
    if (gamma == 1.0)
        return Mat2::Identity();
    if (r == 0.0)
        return gamma > 1.0 ? Mat2(Mat2::Zero()) : Mat2(Mat2::Identity());
    const Vec2 e = ref / r;
    return std::pow(r, gamma - 1.0) * (Mat2::Identity() + (gamma - 1.0) * e * e.transpose());
}

Mat2 b_matrix(double gamma, const Vec2& ref)
{
    if (!(gamma > 0.0))
        throw InvalidArgument("b_matrix: gamma must be positive");
    Vec2 q = ref;
    if (q.norm() == 0.0) {
        warn_origin();
        q = Vec2(1.0, 0.0);
    }
    const Mat2 S = polar_rotation(q);
    const Mat2 D = Eigen::Vector2d(1.0 / gamma, gamma).asDiagonal();
    return S.transpose() * D * S;
}

double load_weight(double gamma, const Vec2& ref)
{
    return gamma * std::pow(ref.squaredNorm(), gamma - 1.0);
}

double mesh_function(double gamma, double h, const Vec2& ref)
{
    return h * std::pow(ref.norm(), gamma - 1.0);
}

double min_gamma(int p, double omega)
{
    if (p < 1)
        throw InvalidArgument("min_gamma: degree must be at least 1");
    if (!(omega > std::numbers::pi && omega < 2.0 * std::numbers::pi))
        throw InvalidArgument("min_gamma: opening angle must lie in (pi, 2 pi)");
    return p * omega / std::numbers::pi;
}

std::vector<double> alpha_powers(int p, double gamma)
{
    if (!(gamma > 0.0))
        throw InvalidArgument("alpha_powers: gamma must be positive");
    const int k = p + 1;
    const double alpha_k = (k - 1) * (gamma - 1.0) / gamma;
    std::vector<double> alphas(k);
    for (int j = 1; j <= k; ++j)
        alphas[j - 1] = (j - k) + alpha_k;
    return alphas;
}

// ---------------------------------------------------------------------------

GradedMap::GradedMap(double gamma, std::optional<PostMap> post_map)
    : gamma_(gamma), post_map_(std::move(post_map))
{
    if (!(gamma_ > 0.0))
        throw InvalidArgument("GradedMap: gamma must be positive");
}

Vec2 GradedMap::forward(const Vec2& ref) const
{
    const Vec2 y = graded_forward(gamma_, ref);
    return post_map_ ? post_map_->forward(y) : y;
}

Vec2 GradedMap::inverse(const Vec2& phys) const
{
    const Vec2 y = post_map_ ? post_map_->inverse(phys) : phys;
    return graded_inverse(gamma_, y);
}

Mat2 GradedMap::jacobian(const Vec2& ref) const
{
    const Mat2 J = graded_jacobian(gamma_, ref);
    if (!post_map_)
        return J;
    return post_map_->jacobian(graded_forward(gamma_, ref)) * J;
}

Mat2 GradedMap::diffusion(const Vec2& ref) const
{
    const Mat2 B = b_matrix(gamma_, ref);
    if (!post_map_)
        return B;
    // DF_gamma = r^(gamma-1) S^T diag(gamma, 1) S; the radial power cancels,
    // leaving gamma * M G M with M = S^T diag(1/gamma, 1) S and
    // G = J^{-1} J^{-T} |det J| for the post map.
    Vec2 q = ref.norm() == 0.0 ? Vec2(1.0, 0.0) : ref;
    const Mat2 S = polar_rotation(q);
    const Mat2 M = S.transpose() * Eigen::Vector2d(1.0 / gamma_, 1.0).asDiagonal() * S;
    const Mat2 J = post_map_->jacobian(graded_forward(gamma_, ref));
    const Mat2 Jinv = J.inverse();
    const Mat2 G = Jinv * Jinv.transpose() * std::abs(J.determinant());
    return gamma_ * M * G * M;
}

double GradedMap::measure_weight(const Vec2& ref) const
{
    double w = load_weight(gamma_, ref);
    if (post_map_)
        w *= std::abs(post_map_->jacobian(graded_forward(gamma_, ref)).determinant());
    return w;
}

double GradedMap::mesh_function(double h, const Vec2& ref) const
{
    double hf = gradedfem::mesh_function(gamma_, h, ref);
    if (post_map_)
        hf *= std::sqrt(std::abs(post_map_->jacobian(graded_forward(gamma_, ref)).determinant()));
    return hf;
}

void GradedMap::check_post_map(int samples_per_axis) const
{
    if (!post_map_)
        return;
    for (int j = 0; j < samples_per_axis; ++j)
        for (int i = 0; i < samples_per_axis; ++i) {
            const Vec2 x(-1.0 + 2.0 * i / (samples_per_axis - 1),
                         -1.0 + 2.0 * j / (samples_per_axis - 1));
            if (std::abs(post_map_->jacobian(x).determinant()) < 1e-12)
                throw InvalidArgument("post map Jacobian is singular on [-1,1]^2");
        }
}

} // namespace gradedfem
