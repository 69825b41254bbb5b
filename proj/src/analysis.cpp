#include "gradedfem/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <random>
#include <thread>

namespace gradedfem {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

ErrorReport compute_errors(const Discretization& disc, const Vector& coeffs, const Problem& problem,
                           const NitscheParams& params, const ErrorOptions& options)
{
    if (!problem.exact || !problem.exact_grad)
        throw InvalidArgument("compute_errors: problem has no exact solution");
    if (coeffs.size() != disc.n_dofs())
        throw InvalidArgument("compute_errors: coefficient vector has wrong size");
    const SplineSpace& space = *disc.space;
    const GradedMap& map = disc.map;
    const int order = options.quad_order > 0 ? options.quad_order : space.degree() + 3;
    const double h = disc.h();

    double l2 = 0.0, h1 = 0.0, grad_ref = 0.0;
    for (const QuadratureCell& q : build_volume_quadrature(*disc.active, order, options.corner_layers)) {
        for (std::size_t k = 0; k < q.points.size(); ++k) {
            const Vec2& x = q.points[k];
            const FieldValue fv = evaluate_field(space, disc.dofs, coeffs, q.parent_cell, x);
            const Vec2 y = map.forward(x);
            const double e = problem.exact(y) - fv.value;
            const Vec2 ge = map.jacobian(x).transpose() * problem.exact_grad(y) - fv.grad;
            const double w = q.weights[k];
            l2 += w * e * e * map.measure_weight(x);
            h1 += w * ge.dot(map.diffusion(x) * ge);
            grad_ref += w * ge.squaredNorm();
        }
    }

    double boundary = 0.0;
    for (const BoundaryQuadrature& bq : disc.boundary) {
        for (std::size_t k = 0; k < bq.points.size(); ++k) {
            const Vec2& x = bq.points[k];
            const FieldValue fv = evaluate_field(space, disc.dofs, coeffs, bq.parent_cell, x);
            const Vec2 y = map.forward(x);
            const double e = problem.exact(y) - fv.value;
            const Vec2 ge = map.jacobian(x).transpose() * problem.exact_grad(y) - fv.grad;
            boundary += bq.weights[k] * (h * ge.squaredNorm() + e * e / h);
        }
    }
    const double stab = ghost_penalty_energy(space, disc.dofs, params, coeffs);

    ErrorReport r;
    r.h = h;
    r.n_dofs = disc.n_dofs();
    r.l2 = std::sqrt(std::max(l2, 0.0));
    r.h1_semi = std::sqrt(std::max(h1, 0.0));
    r.energy = std::sqrt(std::max(grad_ref + boundary + stab, 0.0));
    r.gamma = map.gamma();
    r.p = space.degree();
    r.beta = params.beta;
    r.tau = params.tau;
    r.split_dofs = disc.dofs.split_count();
    return r;
}

double fit_rate(const std::vector<double>& h, const std::vector<double>& error, int last)
{
    if (h.size() != error.size())
        throw InvalidArgument("fit_rate: size mismatch");
    if (h.size() < 3 || last < 3)
        throw InvalidArgument("fit_rate: need at least 3 points");
    const std::size_t n = std::min<std::size_t>(h.size(), static_cast<std::size_t>(last));
    const std::size_t first = h.size() - n;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = first; i < h.size(); ++i) {
        if (!(h[i] > 0.0) || !(error[i] > 0.0))
            throw InvalidArgument("fit_rate: values must be positive");
        const double x = std::log(h[i]);
        const double y = std::log(error[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double m = static_cast<double>(n);
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

FittedRates fit_rates(const RateTable& table, int last)
{
    std::vector<double> h, l2, h1, en;
    for (const ErrorReport& r : table.rows) {
        h.push_back(r.h);
        l2.push_back(r.l2);
        h1.push_back(r.h1_semi);
        en.push_back(r.energy);
    }
    return {fit_rate(h, l2, last), fit_rate(h, h1, last), fit_rate(h, en, last)};
}

std::vector<double> pairwise_rates(const std::vector<double>& h, const std::vector<double>& error)
{
    std::vector<double> out(h.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 1; i < h.size(); ++i)
        out[i] = std::log(error[i] / error[i - 1]) / std::log(h[i] / h[i - 1]);
    return out;
}

FixMode parse_fix_mode(const std::string& name)
{
    if (name == "on")
        return FixMode::On;
    if (name == "off")
        return FixMode::Off;
    if (name == "auto")
        return FixMode::Auto;
    throw InvalidArgument("fix must be one of on, off, auto");
}

std::string to_string(FixMode mode)
{
    switch (mode) {
    case FixMode::On:
        return "on";
    case FixMode::Off:
        return "off";
    default:
        return "auto";
    }
}

void SectorRun::validate() const
{
    if (!(omega > std::numbers::pi && omega < 2.0 * std::numbers::pi))
        throw InvalidArgument("omega must lie in (pi, 2 pi)");
    if (p < 1)
        throw InvalidArgument("p must be at least 1");
    if (regularity < 0 || regularity >= p)
        throw InvalidArgument("regularity must lie in [0, p-1]");
    if (gamma < 0.0)
        throw InvalidArgument("gamma must be positive");
    if (!(h > 0.0 && h <= 1.0))
        throw InvalidArgument("h must lie in (0, 1]");
    params.validate();
}

RunResult run_sector(const SectorRun& run)
{
    run.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const PolygonDomain domain = run.domain ? *run.domain : sector_polygon(run.omega, run.n_arc);
    const GradedMap map(run.resolved_gamma());
    DiscretizationOptions opt;
    opt.h = run.h;
    opt.shift = run.shift ? *run.shift : centered_shift(run.h);
    opt.degree = run.p;
    opt.regularity = run.regularity;
    // The split is the identity whenever no support is disconnected, so the
    // automatic mode simply applies it.
    opt.split = run.fix != FixMode::Off;

    RunResult res;
    res.disc = discretize(domain, map, opt);
    SectorProblem sp;
    sp.omega = run.omega;
    sp.smooth_part = run.smooth_part;
    const Problem problem = sp.problem();
    const AssembledSystem sys = assemble_system(res.disc, run.params, problem.source, problem.dirichlet);
    res.solve = solve(sys, 1e-10, run.solver);
    res.report = compute_errors(res.disc, res.solve.solution, problem, run.params);
    res.report.omega = run.omega;
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

RateTable convergence_study(const SectorRun& base, const std::vector<double>& hs)
{
    RateTable table;
    table.rows.resize(hs.size());
    parallel_for(static_cast<int>(hs.size()), [&](int i) {
        SectorRun r = base;
        r.h = hs[i];
        table.rows[i] = run_sector(r).report;
    });
    return table;
}

std::vector<Vec2> random_shifts(double h, int n, std::uint64_t seed)
{
    std::vector<Vec2> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        std::mt19937_64 rng(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(i))));
        std::uniform_real_distribution<double> dist(0.0, h);
        const double sx = dist(rng);
        const double sy = dist(rng);
        out.emplace_back(sx, sy);
    }
    return out;
}

ShiftStatistics statistics(const std::vector<double>& values)
{
    ShiftStatistics s;
    if (values.empty())
        return s;
    double sum = 0.0;
    for (double v : values)
        sum += v;
    s.mean = sum / values.size();
    double sq = 0.0;
    for (double v : values)
        sq += (v - s.mean) * (v - s.mean);
    s.stddev = values.size() > 1 ? std::sqrt(sq / (values.size() - 1)) : 0.0;
    s.relative = s.mean != 0.0 ? s.stddev / s.mean : 0.0;
    return s;
}

ShiftStudy mesh_shift_study(const SectorRun& base, int n_trials, std::uint64_t seed)
{
    if (n_trials < 1)
        throw InvalidArgument("mesh_shift_study: need at least one trial");
    return mesh_shift_study(base, random_shifts(base.h, n_trials, seed), seed);
}

ShiftStudy mesh_shift_study(const SectorRun& base, const std::vector<Vec2>& shifts,
                            std::uint64_t seed)
{
    ShiftStudy study;
    study.seed = seed;
    study.shifts = shifts;
    study.trials.resize(shifts.size());
    parallel_for(static_cast<int>(shifts.size()), [&](int i) {
        SectorRun r = base;
        r.shift = shifts[i];
        try {
            study.trials[i] = run_sector(r).report;
        } catch (const std::exception& e) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "trial %d with shift (%.17g, %.17g) failed: ", i,
                          shifts[i].x(), shifts[i].y());
            throw SolverError(buf + std::string(e.what()));
        }
    });
    std::vector<double> l2, h1;
    for (const ErrorReport& r : study.trials) {
        l2.push_back(r.l2);
        h1.push_back(r.h1_semi);
    }
    study.l2 = statistics(l2);
    study.h1_semi = statistics(h1);
    return study;
}

FieldSample sample_field(const Discretization& disc, const Vector& coeffs, int n)
{
    if (n < 2)
        throw InvalidArgument("sample_field: need at least 2 samples per axis");
    Vec2 lo = disc.domain.vertex(0);
    Vec2 hi = lo;
    for (const Vec2& v : disc.domain.vertices()) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    FieldSample fs;
    fs.n = n;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const Vec2 x(lo.x() + (hi.x() - lo.x()) * i / (n - 1), lo.y() + (hi.y() - lo.y()) * j / (n - 1));
            const int c = disc.active->mesh.locate(x);
            const bool in = c >= 0 && disc.active->is_active(c) && disc.domain.contains(x);
            fs.reference.push_back(x);
            fs.physical.push_back(disc.map.forward(x));
            fs.value.push_back(in ? evaluate_field(*disc.space, disc.dofs, coeffs, c, x).value : 0.0);
            fs.inside.push_back(in ? 1 : 0);
        }
    return fs;
}

int thread_count()
{
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1)
        n = 1;
    if (const char* env = std::getenv("GRADEDFEM_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1)
            n = cap;
    }
    return n;
}

void parallel_for(int n, const std::function<void(int)>& fn)
{
    const int workers = std::min(thread_count(), n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::mutex mtx;
    int failed_index = n;
    std::exception_ptr failure;
    auto work = [&] {
        for (int i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mtx);
                if (i < failed_index) {
                    failed_index = i;
                    failure = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t)
        pool.emplace_back(work);
    for (std::thread& t : pool)
        t.join();
    if (failure)
        std::rethrow_exception(failure);
}

} // namespace gradedfem
