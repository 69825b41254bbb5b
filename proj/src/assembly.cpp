#include "gradedfem/assembly.hpp"

#include <cmath>
#include <map>

#include "gradedfem/quadrature.hpp"

namespace gradedfem {

namespace {

Mat2 symmetric_diffusion(const GradedMap& map, const Vec2& x)
{
    const Mat2 B = map.diffusion(x);
    return 0.5 * (B + B.transpose());
}

void scatter(const std::vector<int>& dofs, const Eigen::MatrixXd& local,
             std::vector<Triplet>& entries)
{
    for (std::size_t a = 0; a < dofs.size(); ++a)
        for (std::size_t b = 0; b < dofs.size(); ++b)
            if (local(a, b) != 0.0)
                entries.emplace_back(dofs[a], dofs[b], local(a, b));
}

double factorial(int n)
{
    double f = 1.0;
    for (int k = 2; k <= n; ++k)
        f *= k;
    return f;
}

/// Jump data of all local functions of both neighbours across one face point.
struct FaceJumps {
    std::vector<int> dofs;
    Eigen::MatrixXd jumps; // (derivative row, union dof)
};

FaceJumps face_jumps(const SplineSpace& space, const DofMap& dofs, const GhostFace& face,
                     const Vec2& x)
{
    const int p = space.degree();
    const BasisEval em = eval_basis(space, dofs, face.minus, x, p);
    const BasisEval ep = eval_basis(space, dofs, face.plus, x, p);
    FaceJumps fj;
    std::map<int, int> pos;
    for (int d : em.local_dofs)
        if (pos.emplace(d, static_cast<int>(fj.dofs.size())).second)
            fj.dofs.push_back(d);
    for (int d : ep.local_dofs)
        if (pos.emplace(d, static_cast<int>(fj.dofs.size())).second)
            fj.dofs.push_back(d);
    fj.jumps.setZero(em.values.rows(), static_cast<Eigen::Index>(fj.dofs.size()));
    for (std::size_t l = 0; l < em.local_dofs.size(); ++l)
        fj.jumps.col(pos[em.local_dofs[l]]) += em.values.col(static_cast<Eigen::Index>(l));
    for (std::size_t l = 0; l < ep.local_dofs.size(); ++l)
        fj.jumps.col(pos[ep.local_dofs[l]]) -= ep.values.col(static_cast<Eigen::Index>(l));
    return fj;
}

} // namespace

void NitscheParams::validate() const
{
    if (!(beta > 0.0))
        throw InvalidArgument("Nitsche penalty beta must be positive");
    if (!(tau >= 0.0))
        throw InvalidArgument("ghost penalty tau must be nonnegative");
}

Discretization discretize(const PolygonDomain& domain, const GradedMap& map,
                          const DiscretizationOptions& options)
{
    Discretization disc;
    disc.domain = domain;
    disc.map = map;
    const ReferenceMesh mesh = build_reference_mesh(options.h, options.shift);
    disc.active = std::make_shared<const ActiveMesh>(classify_elements(mesh, domain));
    disc.space = std::make_shared<const SplineSpace>(
        build_space(disc.active, options.degree, options.regularity));
    disc.dofs = options.split ? split_disjoint_supports(*disc.space) : disc.space->dofs();
    disc.quad_order = options.quad_order > 0 ? options.quad_order : options.degree + 2;
    disc.volume = build_volume_quadrature(*disc.active, disc.quad_order);
    disc.boundary = build_boundary_quadrature(*disc.active, domain, disc.quad_order);
    return disc;
}

SparseMatrix to_sparse(int n, const std::vector<Triplet>& entries)
{
    SparseMatrix A(n, n);
    A.setFromTriplets(entries.begin(), entries.end());
    A.makeCompressed();
    return A;
}

Contribution assemble_volume(const SplineSpace& space, const DofMap& dofs, const GradedMap& map,
                             const std::vector<QuadratureCell>& quad)
{
    Contribution out;
    out.rhs = Vector::Zero(dofs.n_dofs);
    const int n = space.local_size();
    Eigen::MatrixXd local(n, n);
    Eigen::MatrixXd grads(2, n);
    for (const QuadratureCell& q : quad) {
        if (q.points.empty())
            continue;
        local.setZero();
        for (std::size_t k = 0; k < q.points.size(); ++k) {
            const BasisEval ev = eval_basis(space, dofs, q.parent_cell, q.points[k], 1);
            grads.row(0) = ev.values.row(1);
            grads.row(1) = ev.values.row(2);
            const Mat2 B = symmetric_diffusion(map, q.points[k]);
            local.noalias() += q.weights[k] * (grads.transpose() * (B * grads));
        }
        scatter(dofs.cell_dofs[q.parent_cell], local, out.entries);
    }
    return out;
}

Contribution assemble_nitsche_boundary(const SplineSpace& space, const DofMap& dofs,
                                       const GradedMap& map,
                                       const std::vector<BoundaryQuadrature>& bquad,
                                       const NitscheParams& params, const ScalarField& g)
{
    if (!g)
        throw InvalidArgument("assemble_nitsche_boundary: missing Dirichlet data");
    params.validate();
    Contribution out;
    out.rhs = Vector::Zero(dofs.n_dofs);
    const double penalty = params.beta / space.active().mesh.h;
    const int n = space.local_size();
    Eigen::MatrixXd local(n, n);
    Eigen::VectorXd local_rhs(n);
    for (const BoundaryQuadrature& bq : bquad) {
        local.setZero();
        local_rhs.setZero();
        bool any = false;
        for (std::size_t k = 0; k < bq.points.size(); ++k) {
            if (bq.tags[k] != kDirichletTag)
                continue;
            any = true;
            const Vec2& x = bq.points[k];
            const BasisEval ev = eval_basis(space, dofs, bq.parent_cell, x, 1);
            const Mat2 B = symmetric_diffusion(map, x);
            const Vec2 bn = B * bq.normals[k];
            const Eigen::VectorXd phi = ev.values.row(0).transpose();
            const Eigen::VectorXd flux =
                (bn.x() * ev.values.row(1) + bn.y() * ev.values.row(2)).transpose();
            const double w = bq.weights[k];
            local.noalias() += w * (penalty * phi * phi.transpose() - flux * phi.transpose() -
                                    phi * flux.transpose());
            const double gx = g(map.forward(x));
            local_rhs.noalias() += w * gx * (penalty * phi - flux);
        }
        if (!any)
            continue;
        const auto& cd = dofs.cell_dofs[bq.parent_cell];
        scatter(cd, local, out.entries);
        for (int a = 0; a < n; ++a)
            out.rhs[cd[a]] += local_rhs[a];
    }
    return out;
}

Contribution assemble_ghost_penalty(const SplineSpace& space, const DofMap& dofs,
                                    const NitscheParams& params)
{
    params.validate();
    Contribution out;
    out.rhs = Vector::Zero(dofs.n_dofs);
    if (params.tau == 0.0)
        return out;
    const int p = space.degree();
    const double h = space.active().mesh.h;
    const GaussRule& g = gauss_legendre(p + 1);
    for (const GhostFace& face : space.active().ghost_faces) {
        const double len = (face.b - face.a).norm();
        Eigen::MatrixXd local;
        std::vector<int> face_dofs;
        for (std::size_t q = 0; q < g.points.size(); ++q) {
            const Vec2 x = face.a + g.points[q] * (face.b - face.a);
            const FaceJumps fj = face_jumps(space, dofs, face, x);
            if (local.size() == 0) {
                face_dofs = fj.dofs;
                local.setZero(static_cast<Eigen::Index>(face_dofs.size()),
                              static_cast<Eigen::Index>(face_dofs.size()));
            }
            const double w = g.weights[q] * len;
            for (int j = 1; j <= p; ++j) {
                const double scale = params.tau * std::pow(h, 2 * j - 1) * w;
                for (int ay = 0; ay <= j; ++ay) {
                    const int ax = j - ay;
                    const double mult = factorial(j) / (factorial(ax) * factorial(ay));
                    const Eigen::RowVectorXd jr = fj.jumps.row(derivative_index(ax, ay));
                    local.noalias() += scale * mult * (jr.transpose() * jr);
                }
            }
        }
        scatter(face_dofs, local, out.entries);
    }
    return out;
}

double ghost_penalty_energy(const SplineSpace& space, const DofMap& dofs,
                            const NitscheParams& params, const Vector& coeffs)
{
    const int p = space.degree();
    const double h = space.active().mesh.h;
    const GaussRule& g = gauss_legendre(p + 1);
    double energy = 0.0;
    for (const GhostFace& face : space.active().ghost_faces) {
        const double len = (face.b - face.a).norm();
        for (std::size_t q = 0; q < g.points.size(); ++q) {
            const Vec2 x = face.a + g.points[q] * (face.b - face.a);
            const FaceJumps fj = face_jumps(space, dofs, face, x);
            Eigen::VectorXd c(fj.dofs.size());
            for (std::size_t d = 0; d < fj.dofs.size(); ++d)
                c[static_cast<Eigen::Index>(d)] = coeffs[fj.dofs[d]];
            const Eigen::VectorXd jump = fj.jumps * c;
            for (int j = 1; j <= p; ++j)
                for (int ay = 0; ay <= j; ++ay) {
                    const int ax = j - ay;
                    const double mult = factorial(j) / (factorial(ax) * factorial(ay));
                    const double v = jump[derivative_index(ax, ay)];
                    energy += params.tau * std::pow(h, 2 * j - 1) * g.weights[q] * len * mult * v * v;
                }
        }
    }
    return energy;
}

Vector assemble_load(const SplineSpace& space, const DofMap& dofs, const GradedMap& map,
                     const std::vector<QuadratureCell>& quad, const ScalarField& f)
{
    Vector rhs = Vector::Zero(dofs.n_dofs);
    if (!f)
        return rhs;
    for (const QuadratureCell& q : quad) {
        const auto& cd = dofs.cell_dofs[q.parent_cell];
        for (std::size_t k = 0; k < q.points.size(); ++k) {
            const Vec2& x = q.points[k];
            const double fx = f(map.forward(x));
            if (fx == 0.0)
                continue;
            const BasisEval ev = eval_basis(space, dofs, q.parent_cell, x, 0);
            const double s = q.weights[k] * map.measure_weight(x) * fx;
            for (std::size_t a = 0; a < cd.size(); ++a)
                rhs[cd[a]] += s * ev.value(static_cast<int>(a));
        }
    }
    return rhs;
}

AssembledSystem assemble_system(const Discretization& disc, const NitscheParams& params,
                                const ScalarField& f, const ScalarField& g)
{
    params.validate();
    const SplineSpace& space = *disc.space;
    Contribution vol = assemble_volume(space, disc.dofs, disc.map, disc.volume);
    Contribution bnd =
        assemble_nitsche_boundary(space, disc.dofs, disc.map, disc.boundary, params, g);
    Contribution gp = assemble_ghost_penalty(space, disc.dofs, params);

    std::vector<Triplet> entries = std::move(vol.entries);
    entries.insert(entries.end(), bnd.entries.begin(), bnd.entries.end());
    entries.insert(entries.end(), gp.entries.begin(), gp.entries.end());

    AssembledSystem sys;
    sys.matrix = to_sparse(disc.n_dofs(), entries);
    sys.rhs = bnd.rhs + assemble_load(space, disc.dofs, disc.map, disc.volume, f);
    sys.dof_map = disc.dofs;
    sys.params = params;
    return sys;
}

} // namespace gradedfem
