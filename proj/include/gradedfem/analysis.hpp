#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gradedfem/assembly.hpp"
#include "gradedfem/problems.hpp"
#include "gradedfem/solver.hpp"

namespace gradedfem {

struct ErrorReport {
    double h = 0.0;
    int n_dofs = 0;
    double l2 = 0.0;
    double h1_semi = 0.0;
    double energy = 0.0;
    double gamma = 1.0;
    double omega = 0.0;
    int p = 0;
    double beta = 0.0;
    double tau = 0.0;
    int split_dofs = 0; ///< tensor functions carrying more than one DOF
};

struct ErrorOptions {
    int quad_order = 0;     ///< 0 selects p + 3
    int corner_layers = 24; ///< radial layers in triangles at the corner
};

/// L2, H1-seminorm and discrete energy-norm errors of a discrete solution,
/// all integrated on the reference domain. The energy norm evaluates the
/// stabilization term on the discrete solution alone, since the derivative
/// jumps of a smooth exact solution vanish.
ErrorReport compute_errors(const Discretization& disc, const Vector& coeffs, const Problem& problem,
                           const NitscheParams& params, const ErrorOptions& options = {});

struct RateTable {
    std::vector<ErrorReport> rows;
};

struct FittedRates {
    double l2 = 0.0;
    double h1_semi = 0.0;
    double energy = 0.0;
};

/// Least-squares slope of log(error) against log(h) over the last `last`
/// points. Throws InvalidArgument with fewer than 3 points.
double fit_rate(const std::vector<double>& h, const std::vector<double>& error, int last = 3);
FittedRates fit_rates(const RateTable& table, int last = 3);

/// Rates between consecutive rows; the first entry is NaN.
std::vector<double> pairwise_rates(const std::vector<double>& h, const std::vector<double>& error);

enum class FixMode { Off, On, Auto };
FixMode parse_fix_mode(const std::string& name);
std::string to_string(FixMode mode);

/// One graded sector computation.
struct SectorRun {
    double omega = 1.5 * 3.14159265358979323846;
    int p = 2;
    int regularity = 1;
    double gamma = 0.0; ///< 0 selects 2p
    NitscheParams params;
    double h = 0.1;
    std::optional<Vec2> shift; ///< nullopt puts the corner at a cell centre
    FixMode fix = FixMode::Auto;
    SolverMethod solver = SolverMethod::Direct;
    int n_arc = 4096;
    bool smooth_part = false;
    /// Replaces the sector; must keep the corner at the origin with its first
    /// edge along +x.
    std::optional<PolygonDomain> domain;

    double resolved_gamma() const { return gamma > 0.0 ? gamma : 2.0 * p; }
    void validate() const;
};

struct RunResult {
    ErrorReport report;
    Discretization disc;
    SolveReport solve;
    double seconds = 0.0;
};

RunResult run_sector(const SectorRun& run);

/// Independent runs for each h; rows are ordered as `hs`.
RateTable convergence_study(const SectorRun& base, const std::vector<double>& hs);

struct ShiftStatistics {
    double mean = 0.0;
    double stddev = 0.0;
    double relative = 0.0; ///< stddev / mean
};

struct ShiftStudy {
    std::uint64_t seed = 0;
    std::vector<Vec2> shifts;
    std::vector<ErrorReport> trials;
    ShiftStatistics l2;
    ShiftStatistics h1_semi;
};

/// Shifts drawn uniformly from [0,h)^2, trial i seeded from (seed, i).
std::vector<Vec2> random_shifts(double h, int n, std::uint64_t seed);

ShiftStatistics statistics(const std::vector<double>& values);

/// Repeats `base` over random grid shifts. Throws SolverError naming the
/// shift of the first failing trial.
ShiftStudy mesh_shift_study(const SectorRun& base, int n_trials, std::uint64_t seed);
ShiftStudy mesh_shift_study(const SectorRun& base, const std::vector<Vec2>& shifts,
                            std::uint64_t seed = 0);

/// Worker count: GRADEDFEM_THREADS if set, else hardware concurrency.
/// Discrete solution sampled on a uniform n x n grid over the bounding box of
/// the reference domain. Points outside the active domain get value 0.
struct FieldSample {
    int n = 0;
    std::vector<Vec2> reference;
    std::vector<Vec2> physical;
    std::vector<double> value;
    std::vector<int> inside;
};
FieldSample sample_field(const Discretization& disc, const Vector& coeffs, int n);

int thread_count();

/// Calls fn(i) for i in [0, n) on up to thread_count() threads. The first
/// exception (lowest index) is rethrown after all workers finish.
void parallel_for(int n, const std::function<void(int)>& fn);

} // namespace gradedfem
