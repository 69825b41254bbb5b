// Command-line front end: convergence series, mesh-shift studies, fix
// comparisons and the three-patch example.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11/CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gradedfem/analysis.hpp"
#include "gradedfem/multipatch.hpp"
#include "gradedfem/solver.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace gradedfem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRun = 3;
constexpr int kExitCheck = 4;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string problem = "sector";
    double omega = 1.5 * std::numbers::pi;
    int p = 2;
    int regularity = -1; ///< -1 selects p - 1
    std::string gamma = "auto";
    double beta = 100.0;
    double tau = 0.1;
    std::vector<double> h_series{0.4, 0.2, 0.1, 0.05};
    std::string shift = "centered";
    std::string fix = "auto";
    std::string solver = "direct";
    std::string output_dir = "out";
    std::uint64_t seed = 0;
    std::string polygon;
    int n_arc = 4096;
    int field_samples = 101;
    bool compare_fix = false;
    bool check = false;

    int resolved_regularity() const { return regularity >= 0 ? regularity : p - 1; }
    double resolved_gamma() const
    {
        if (gamma == "auto")
            return 2.0 * p;
        try {
            std::size_t pos = 0;
            const double g = std::stod(gamma, &pos);
            if (pos != gamma.size())
                throw std::invalid_argument("trailing");
            return g;
        } catch (const std::exception&) {
            throw ConfigError("gamma: expected a number or \"auto\", got '" + gamma + "'");
        }
    }
};

std::vector<double> parse_h_list(const std::string& s)
{
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ConfigError("h: cannot parse '" + item + "'");
        }
    }
    if (out.empty())
        throw ConfigError("h: empty list");
    return out;
}

std::string json_to_text(const json& v)
{
    return v.is_string() ? v.get<std::string>() : v.dump();
}

void apply_json(RunConfig& c, const json& j)
{
    static const std::vector<std::string> known{"problem", "omega", "p",      "regularity", "gamma",
                                                "beta",    "tau",   "h",      "shift",      "fix",
                                                "solver",  "out",   "seed",   "polygon",    "n_arc",
                                                "field_samples",    "compare_fix"};
    for (const auto& [key, value] : j.items())
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ConfigError(key + ": unknown config field");
    try {
        if (j.contains("problem"))
            c.problem = j["problem"].get<std::string>();
        if (j.contains("omega"))
            c.omega = j["omega"].get<double>();
        if (j.contains("p"))
            c.p = j["p"].get<int>();
        if (j.contains("regularity"))
            c.regularity = j["regularity"].get<int>();
        if (j.contains("gamma"))
            c.gamma = json_to_text(j["gamma"]);
        if (j.contains("beta"))
            c.beta = j["beta"].get<double>();
        if (j.contains("tau"))
            c.tau = j["tau"].get<double>();
        if (j.contains("h"))
            c.h_series = j["h"].is_array() ? j["h"].get<std::vector<double>>()
                                           : parse_h_list(json_to_text(j["h"]));
        if (j.contains("shift")) {
            const json& s = j["shift"];
            c.shift = s.is_array() ? std::to_string(s.at(0).get<double>()) + "," +
                                         std::to_string(s.at(1).get<double>())
                                   : s.get<std::string>();
        }
        if (j.contains("fix"))
            c.fix = j["fix"].get<std::string>();
        if (j.contains("solver"))
            c.solver = j["solver"].get<std::string>();
        if (j.contains("out"))
            c.output_dir = j["out"].get<std::string>();
        if (j.contains("seed"))
            c.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("polygon"))
            c.polygon = j["polygon"].get<std::string>();
        if (j.contains("n_arc"))
            c.n_arc = j["n_arc"].get<int>();
        if (j.contains("field_samples"))
            c.field_samples = j["field_samples"].get<int>();
        if (j.contains("compare_fix"))
            c.compare_fix = j["compare_fix"].get<bool>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

/// Shift specification: "centered", "x,y" or "random(seed,n)".
struct ShiftSpec {
    std::optional<Vec2> fixed;
    bool random = false;
    std::uint64_t seed = 0;
    int trials = 0;
};

ShiftSpec parse_shift(const std::string& s)
{
    ShiftSpec spec;
    if (s == "centered")
        return spec;
    std::smatch m;
    static const std::regex rnd(R"(random\(\s*(\d+)\s*,\s*(\d+)\s*\))");
    static const std::regex pair(R"(\s*([-+0-9.eE]+)\s*,\s*([-+0-9.eE]+)\s*)");
    if (std::regex_match(s, m, rnd)) {
        spec.random = true;
        spec.seed = std::stoull(m[1]);
        spec.trials = std::stoi(m[2]);
        if (spec.trials < 10)
            throw ConfigError("shift: random studies need at least 10 trials");
        return spec;
    }
    if (std::regex_match(s, m, pair)) {
        spec.fixed = Vec2(std::stod(m[1]), std::stod(m[2]));
        return spec;
    }
    throw ConfigError("shift: expected \"centered\", \"x,y\" or \"random(seed,n)\", got '" + s + "'");
}

SolverMethod parse_solver(const std::string& s)
{
    if (s == "direct")
        return SolverMethod::Direct;
    if (s == "cg")
        return SolverMethod::ConjugateGradient;
    throw ConfigError("solver: expected direct or cg, got '" + s + "'");
}

void validate(const RunConfig& c)
{
    if (c.problem != "sector" && c.problem != "sector+smooth" && c.problem != "multipatch-fig8")
        throw ConfigError("problem: expected sector, sector+smooth or multipatch-fig8, got '" +
                          c.problem + "'");
    if (c.p < 1)
        throw ConfigError("p: must be at least 1");
    if (c.resolved_regularity() >= c.p)
        throw ConfigError("regularity: must lie in [0, p-1]");
    if (!(c.resolved_gamma() > 0.0))
        throw ConfigError("gamma: must be positive");
    if (!(c.beta > 0.0))
        throw ConfigError("beta: must be positive");
    if (!(c.tau >= 0.0))
        throw ConfigError("tau: must be nonnegative");
    for (double h : c.h_series)
        if (!(h > 0.0 && h <= 1.0))
            throw ConfigError("h: every entry must lie in (0, 1]");
    if (c.field_samples < 2)
        throw ConfigError("field_samples: must be at least 2");
    try {
        parse_fix_mode(c.fix);
    } catch (const InvalidArgument&) {
        throw ConfigError("fix: expected on, off or auto, got '" + c.fix + "'");
    }
    parse_solver(c.solver);
    parse_shift(c.shift);
    if (c.problem != "multipatch-fig8" && !(c.omega > std::numbers::pi && c.omega < 2 * std::numbers::pi))
        throw ConfigError("omega: must lie in (pi, 2 pi)");
}

json resolved_config(const RunConfig& c)
{
    json j;
    j["problem"] = c.problem;
    j["omega"] = c.omega;
    j["p"] = c.p;
    j["regularity"] = c.resolved_regularity();
    j["gamma"] = c.resolved_gamma();
    j["beta"] = c.beta;
    j["tau"] = c.tau;
    j["h"] = c.h_series;
    j["shift"] = c.shift;
    j["fix"] = c.fix;
    j["solver"] = c.solver;
    j["seed"] = c.seed;
    j["polygon"] = c.polygon.empty() ? json(nullptr) : json(c.polygon);
    j["n_arc"] = c.n_arc;
    j["field_samples"] = c.field_samples;
    j["compare_fix"] = c.compare_fix;
    return j;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json report_row(const ErrorReport& r)
{
    json j;
    j["h"] = r.h;
    j["n_dofs"] = r.n_dofs;
    j["l2"] = r.l2;
    j["h1_semi"] = r.h1_semi;
    j["energy"] = r.energy;
    j["gamma"] = r.gamma;
    j["omega"] = r.omega;
    j["p"] = r.p;
    j["beta"] = r.beta;
    j["tau"] = r.tau;
    j["split_dofs"] = r.split_dofs;
    return j;
}

std::string csv_number(double v)
{
    if (!std::isfinite(v))
        return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_rates_csv(const fs::path& path, const std::vector<ErrorReport>& rows, bool with_errors,
                     bool with_rates)
{
    std::vector<double> h, l2, h1;
    for (const ErrorReport& r : rows) {
        h.push_back(r.h);
        l2.push_back(r.l2);
        h1.push_back(r.h1_semi);
    }
    std::vector<double> nan(rows.size(), std::nan(""));
    const auto rl2 = with_rates && with_errors ? pairwise_rates(h, l2) : nan;
    const auto rh1 = with_rates && with_errors ? pairwise_rates(h, h1) : nan;
    std::ofstream out(path);
    out << "h,n_dofs,l2,h1_semi,energy,rate_l2,rate_h1\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const ErrorReport& r = rows[i];
        out << csv_number(r.h) << ',' << r.n_dofs << ','
            << (with_errors ? csv_number(r.l2) : "") << ',' << (with_errors ? csv_number(r.h1_semi) : "")
            << ',' << (with_errors ? csv_number(r.energy) : "") << ',' << csv_number(rl2[i]) << ','
            << csv_number(rh1[i]) << '\n';
    }
}

void write_vtk(const fs::path& path, const FieldSample& f)
{
    std::ofstream out(path);
    out << "# vtk DataFile Version 3.0\ndiscrete solution\nASCII\nDATASET STRUCTURED_GRID\n";
    out << "DIMENSIONS " << f.n << ' ' << f.n << " 1\n";
    out << "POINTS " << f.physical.size() << " double\n";
    out.precision(12);
    for (const Vec2& x : f.physical)
        out << x.x() << ' ' << x.y() << " 0\n";
    out << "POINT_DATA " << f.value.size() << "\nSCALARS u_h double 1\nLOOKUP_TABLE default\n";
    for (double v : f.value)
        out << v << '\n';
    out << "SCALARS inside int 1\nLOOKUP_TABLE default\n";
    for (int v : f.inside)
        out << v << '\n';
    out << "VECTORS reference double\n";
    for (const Vec2& x : f.reference)
        out << x.x() << ' ' << x.y() << " 0\n";
}

void write_json(const fs::path& path, const json& j)
{
    std::ofstream out(path);
    out << j.dump(2) << '\n';
}

SectorRun sector_run(const RunConfig& c, const ShiftSpec& shift)
{
    SectorRun r;
    r.omega = c.omega;
    r.p = c.p;
    r.regularity = c.resolved_regularity();
    r.gamma = c.resolved_gamma();
    r.params.beta = c.beta;
    r.params.tau = c.tau;
    r.shift = shift.fixed;
    r.fix = parse_fix_mode(c.fix);
    r.solver = parse_solver(c.solver);
    r.n_arc = c.n_arc;
    r.smooth_part = c.problem == "sector+smooth";
    if (!c.polygon.empty()) {
        try {
            r.domain = load_polygon_json(c.polygon);
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
    }
    return r;
}

struct Outcome {
    json report;
    json timing;
    std::vector<std::string> failures;
};

void check_rates(const RunConfig& c, const FittedRates& f, std::vector<std::string>& failures)
{
    const double p = c.p;
    char buf[160];
    if (f.l2 < p + 0.7 || f.l2 > p + 1.3) {
        std::snprintf(buf, sizeof buf, "L2 rate %.3f outside [%.1f, %.1f]", f.l2, p + 0.7, p + 1.3);
        failures.emplace_back(buf);
    }
    if (f.h1_semi < p - 0.3 || f.h1_semi > p + 0.3) {
        std::snprintf(buf, sizeof buf, "H1 rate %.3f outside [%.1f, %.1f]", f.h1_semi, p - 0.3, p + 0.3);
        failures.emplace_back(buf);
    }
}

Outcome run_sector_series(const RunConfig& c, const fs::path& out)
{
    const ShiftSpec shift = parse_shift(c.shift);
    SectorRun base = sector_run(c, shift);
    Outcome o;
    o.report["config"] = resolved_config(c);

    std::vector<RunResult> results(c.h_series.size());
    parallel_for(static_cast<int>(c.h_series.size()), [&](int i) {
        SectorRun r = base;
        r.h = c.h_series[i];
        results[i] = run_sector(r);
    });
    std::vector<ErrorReport> rows;
    json jrows = json::array();
    json timing = json::array();
    for (std::size_t i = 0; i < results.size(); ++i) {
        rows.push_back(results[i].report);
        jrows.push_back(report_row(results[i].report));
        timing.push_back({{"h", c.h_series[i]}, {"seconds", results[i].seconds}});
    }
    o.report["rows"] = jrows;
    o.timing["levels"] = timing;
    if (rows.size() >= 3) {
        RateTable t{rows};
        const FittedRates f = fit_rates(t);
        o.report["fitted_rates"] = {{"l2", f.l2}, {"h1_semi", f.h1_semi}, {"energy", f.energy}};
        if (c.check)
            check_rates(c, f, o.failures);
    } else {
        o.report["fitted_rates"] = nullptr;
        if (c.check)
            o.failures.emplace_back("rate check needs at least 3 mesh sizes");
    }
    write_rates_csv(out / "rates.csv", rows, true, true);

    if (c.compare_fix) {
        json cmp = json::array();
        for (FixMode m : {FixMode::Off, FixMode::On}) {
            SectorRun r = base;
            r.fix = m;
            json level = json::array();
            for (double h : c.h_series) {
                r.h = h;
                level.push_back(report_row(run_sector(r).report));
            }
            cmp.push_back({{"fix", to_string(m)}, {"rows", level}});
        }
        o.report["fix_comparison"] = cmp;
    }

    const RunResult& finest = results.back();
    write_vtk(out / "field.vtk", sample_field(finest.disc, finest.solve.solution, c.field_samples));
    return o;
}

Outcome run_shift_study(const RunConfig& c, const fs::path& out)
{
    const ShiftSpec shift = parse_shift(c.shift);
    SectorRun base = sector_run(c, shift);
    base.h = c.h_series.front();
    Outcome o;
    o.report["config"] = resolved_config(c);
    const auto t0 = std::chrono::steady_clock::now();
    const ShiftStudy s = mesh_shift_study(base, shift.trials, shift.seed);
    json trials = json::array();
    for (std::size_t i = 0; i < s.trials.size(); ++i) {
        json row = report_row(s.trials[i]);
        row["shift"] = {s.shifts[i].x(), s.shifts[i].y()};
        trials.push_back(row);
    }
    o.report["shift_seed"] = s.seed;
    o.report["trials"] = trials;
    auto stats = [](const ShiftStatistics& st) {
        return json{{"mean", st.mean}, {"stddev", st.stddev}, {"relative", st.relative}};
    };
    o.report["statistics"] = {{"l2", stats(s.l2)}, {"h1_semi", stats(s.h1_semi)}};
    o.timing["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_rates_csv(out / "rates.csv", s.trials, true, false);
    if (c.check) {
        char buf[160];
        if (s.h1_semi.relative > 0.10) {
            std::snprintf(buf, sizeof buf, "H1 relative std %.4f above 0.10", s.h1_semi.relative);
            o.failures.emplace_back(buf);
        }
        if (s.l2.relative > 0.15) {
            std::snprintf(buf, sizeof buf, "L2 relative std %.4f above 0.15", s.l2.relative);
            o.failures.emplace_back(buf);
        }
    }
    return o;
}

Outcome run_fig8(const RunConfig& c, const fs::path& out)
{
    const PatchSet set = fig8_patch_set(c.resolved_gamma());
    NitscheParams params;
    params.beta = c.beta;
    params.tau = c.tau;
    params.validate();
    const SolverMethod method = parse_solver(c.solver);
    Outcome o;
    o.report["config"] = resolved_config(c);
    json rows = json::array();
    json timing = json::array();
    std::vector<ErrorReport> csv_rows;
    std::vector<double> jumps;
    MultipatchSystem finest;
    Vector finest_u;
    for (double h : c.h_series) {
        const auto t0 = std::chrono::steady_clock::now();
        MultipatchOptions opt;
        opt.h = h;
        opt.degree = c.p;
        opt.regularity = c.resolved_regularity();
        opt.split = parse_fix_mode(c.fix) != FixMode::Off;
        MultipatchSystem mp = assemble_multipatch(set, opt, params, [](const Vec2&) { return 0.0; },
                                                  fig8_dirichlet());
        const SolveReport sol = solve(mp.system, 1e-10, method);
        const double jump = interface_jump_norm(mp, set, sol.solution);
        jumps.push_back(jump);
        rows.push_back({{"h", h}, {"n_dofs", mp.n_dofs()}, {"interface_jump", jump}});
        timing.push_back({{"h", h},
                          {"seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}});
        ErrorReport r;
        r.h = h;
        r.n_dofs = mp.n_dofs();
        csv_rows.push_back(r);
        finest = std::move(mp);
        finest_u = sol.solution;
    }
    o.report["rows"] = rows;
    o.timing["levels"] = timing;
    write_rates_csv(out / "rates.csv", csv_rows, false, false);
    for (std::size_t i = 0; i < finest.patches.size(); ++i)
        write_vtk(out / ("field_patch" + std::to_string(i) + ".vtk"),
                  sample_field(finest.patches[i], finest.patch_coefficients(finest_u, i), c.field_samples));
    if (c.check) {
        if (jumps.size() < 2)
            o.failures.emplace_back("jump check needs at least 2 mesh sizes");
        for (std::size_t i = 1; i < jumps.size(); ++i)
            if (!(jumps[i] < jumps[i - 1]))
                o.failures.emplace_back("interface jump did not decrease at h = " + csv_number(c.h_series[i]));
    }
    return o;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Graded cut finite element solver for Poisson problems with corner singularities"};
    app.set_help_flag("--help", "Print this help message and exit");
    app.require_subcommand(1);
    CLI::App* run = app.add_subcommand("run", "Run a study and write report.json, rates.csv and field dumps");

    std::string config_path, problem, gamma, h_list, shift, fix, solver, out_dir, polygon;
    double omega = 0, beta = 0, tau = 0;
    int p = 0, regularity = 0;
    std::uint64_t seed = 0;
    bool check = false, compare_fix = false;
    run->add_option("--config", config_path, "JSON config file; flags override its fields");
    auto* o_problem = run->add_option("--problem", problem, "sector, sector+smooth or multipatch-fig8");
    auto* o_omega = run->add_option("--omega", omega, "opening angle in radians");
    auto* o_p = run->add_option("--p", p, "spline degree");
    auto* o_reg = run->add_option("--regularity", regularity, "spline continuity (default p-1)");
    auto* o_gamma = run->add_option("--gamma", gamma, "grading exponent or auto (= 2p)");
    auto* o_beta = run->add_option("--beta", beta, "Nitsche penalty");
    auto* o_tau = run->add_option("--tau", tau, "ghost penalty scale");
    auto* o_h = run->add_option("--h", h_list, "comma separated mesh sizes");
    auto* o_shift = run->add_option("--shift", shift, "centered, x,y or random(seed,n)");
    auto* o_fix = run->add_option("--fix", fix, "on, off or auto");
    auto* o_solver = run->add_option("--solver", solver, "direct or cg");
    auto* o_out = run->add_option("--out", out_dir, "output directory");
    auto* o_seed = run->add_option("--seed", seed, "seed recorded in the report");
    auto* o_polygon = run->add_option("--polygon", polygon, "reference polygon JSON replacing the sector");
    run->add_flag("--check", check, "exit 4 when the study misses its acceptance windows");
    auto* o_cmp = run->add_flag("--compare-fix", compare_fix, "also run with the fix off and on");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    RunConfig cfg;
    Outcome outcome;
    fs::path out;
    try {
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in)
                throw ConfigError("config: cannot open '" + config_path + "'");
            json j;
            try {
                in >> j;
            } catch (const json::exception& e) {
                throw ConfigError(std::string("config: malformed JSON: ") + e.what());
            }
            if (!j.is_object())
                throw ConfigError("config: top level must be an object");
            apply_json(cfg, j);
        }
        if (*o_problem) cfg.problem = problem;
        if (*o_omega) cfg.omega = omega;
        if (*o_p) cfg.p = p;
        if (*o_reg) cfg.regularity = regularity;
        if (*o_gamma) cfg.gamma = gamma;
        if (*o_beta) cfg.beta = beta;
        if (*o_tau) cfg.tau = tau;
        if (*o_h) cfg.h_series = parse_h_list(h_list);
        if (*o_shift) cfg.shift = shift;
        if (*o_fix) cfg.fix = fix;
        if (*o_solver) cfg.solver = solver;
        if (*o_out) cfg.output_dir = out_dir;
        if (*o_seed) cfg.seed = seed;
        if (*o_polygon) cfg.polygon = polygon;
        if (*o_cmp) cfg.compare_fix = compare_fix;
        cfg.check = check;
        validate(cfg);
        if (!cfg.polygon.empty() && !fs::exists(cfg.polygon))
            throw ConfigError("polygon: file '" + cfg.polygon + "' does not exist");

        out = cfg.output_dir;
        fs::create_directories(out);
        const ShiftSpec shift_spec = parse_shift(cfg.shift);
        if (cfg.problem == "multipatch-fig8")
            outcome = run_fig8(cfg, out);
        else if (shift_spec.random)
            outcome = run_shift_study(cfg, out);
        else
            outcome = run_sector_series(cfg, out);
    } catch (const ConfigError& e) {
        std::cerr << "invalid config: " << e.what() << '\n';
        return kExitConfig;
    } catch (const InvalidArgument& e) {
        std::cerr << "invalid config: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "run failed: " << e.what() << '\n';
        return kExitRun;
    }

    outcome.report["check"] = cfg.check ? json{{"passed", outcome.failures.empty()}, {"failures", outcome.failures}}
                                        : json(nullptr);
    write_json(out / "report.json", outcome.report);
    write_json(out / "timing.json", outcome.timing);
    std::cout << outcome.report.dump(2) << '\n';
    if (!outcome.failures.empty()) {
        for (const std::string& f : outcome.failures)
            std::cerr << "check failed: " << f << '\n';
        return kExitCheck;
    }
    return 0;
}
