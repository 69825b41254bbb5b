#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gradedfem/analysis.hpp"
#include "gradedfem/multipatch.hpp"
#include "gradedfem/solver.hpp"

namespace py = pybind11;
using namespace gradedfem;

namespace {

SectorRun make_run(double omega, int p, int regularity, double gamma, double beta, double tau, double h,
                   std::optional<Vec2> shift, const std::string& fix, const std::string& solver, bool smooth)
{
    SectorRun r;
    r.omega = omega;
    r.p = p;
    r.regularity = regularity < 0 ? p - 1 : regularity;
    r.gamma = gamma;
    r.params.beta = beta;
    r.params.tau = tau;
    r.h = h;
    r.shift = shift;
    r.fix = parse_fix_mode(fix);
    r.solver = parse_solver_method(solver);
    r.smooth_part = smooth;
    return r;
}

py::dict to_dict(const ErrorReport& r)
{
    py::dict d;
    d["h"] = r.h;
    d["n_dofs"] = r.n_dofs;
    d["l2"] = r.l2;
    d["h1_semi"] = r.h1_semi;
    d["energy"] = r.energy;
    d["gamma"] = r.gamma;
    d["omega"] = r.omega;
    d["p"] = r.p;
    d["beta"] = r.beta;
    d["tau"] = r.tau;
    d["split_dofs"] = r.split_dofs;
    return d;
}

#define SECTOR_ARGS                                                                                     \
    py::arg("omega") = 1.5 * 3.14159265358979323846, py::arg("p") = 2, py::arg("regularity") = -1,      \
    py::arg("gamma") = 0.0, py::arg("beta") = 100.0, py::arg("tau") = 0.1

} // namespace

PYBIND11_MODULE(_gradedfem, m)
{
    m.doc() = "Graded cut finite element solver for Poisson problems with corner singularities";

    py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
    py::register_exception<GeometryError>(m, "GeometryError", PyExc_RuntimeError);
    py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

    m.def("graded_forward", &graded_forward, py::arg("gamma"), py::arg("ref"));
    m.def("graded_inverse", &graded_inverse, py::arg("gamma"), py::arg("phys"));
    m.def("graded_jacobian", &graded_jacobian, py::arg("gamma"), py::arg("ref"));
    m.def("b_matrix", &b_matrix, py::arg("gamma"), py::arg("ref"));
    m.def("load_weight", &load_weight, py::arg("gamma"), py::arg("ref"));
    m.def("mesh_function", py::overload_cast<double, double, const Vec2&>(&mesh_function), py::arg("gamma"),
          py::arg("h"), py::arg("ref"));
    m.def("min_gamma", &min_gamma, py::arg("p"), py::arg("omega"));
    m.def("alpha_powers", &alpha_powers, py::arg("p"), py::arg("gamma"));

    m.def(
        "singular_solution",
        [](double omega, double r, double theta) {
            const SingularValue s = singular_solution(omega, r, theta);
            return py::make_tuple(s.value, s.grad);
        },
        py::arg("omega"), py::arg("r"), py::arg("theta"), "Value and Cartesian gradient of the singular part.");

    m.def("fit_rate", &fit_rate, py::arg("h"), py::arg("error"), py::arg("last") = 3);

    m.def(
        "run_sector",
        [](double omega, int p, int regularity, double gamma, double beta, double tau, double h,
           std::optional<Vec2> shift, const std::string& fix, const std::string& solver, bool smooth) {
            const RunResult res =
                run_sector(make_run(omega, p, regularity, gamma, beta, tau, h, shift, fix, solver, smooth));
            py::dict d = to_dict(res.report);
            d["seconds"] = res.seconds;
            d["solver_iterations"] = res.solve.iterations;
            return d;
        },
        SECTOR_ARGS, py::arg("h") = 0.1, py::arg("shift") = py::none(), py::arg("fix") = "auto",
        py::arg("solver") = "direct", py::arg("smooth") = false,
        "Solve the sector problem once and return its error report.");

    m.def(
        "convergence_study",
        [](const std::vector<double>& hs, double omega, int p, int regularity, double gamma, double beta,
           double tau, const std::string& fix) {
            const RateTable t = convergence_study(
                make_run(omega, p, regularity, gamma, beta, tau, hs.front(), std::nullopt, fix, "direct", false), hs);
            py::list rows;
            for (const ErrorReport& r : t.rows)
                rows.append(to_dict(r));
            py::dict out;
            out["rows"] = rows;
            if (hs.size() >= 3) {
                const FittedRates f = fit_rates(t);
                out["rate_l2"] = f.l2;
                out["rate_h1"] = f.h1_semi;
                out["rate_energy"] = f.energy;
            }
            return out;
        },
        py::arg("hs"), SECTOR_ARGS, py::arg("fix") = "auto");

    m.def(
        "mesh_shift_study",
        [](double h, int n_trials, std::uint64_t seed, double omega, int p, int regularity, double gamma,
           double beta, double tau) {
            const ShiftStudy s = mesh_shift_study(
                make_run(omega, p, regularity, gamma, beta, tau, h, std::nullopt, "auto", "direct", false), n_trials,
                seed);
            py::dict out;
            out["seed"] = s.seed;
            out["shifts"] = s.shifts;
            py::list trials;
            for (const ErrorReport& r : s.trials)
                trials.append(to_dict(r));
            out["trials"] = trials;
            out["l2_relative_std"] = s.l2.relative;
            out["h1_relative_std"] = s.h1_semi.relative;
            return out;
        },
        py::arg("h"), py::arg("n_trials"), py::arg("seed"), SECTOR_ARGS);

    m.def(
        "sample_sector_field",
        [](double h, int n, double omega, int p, int regularity, double gamma, double beta, double tau) {
            const RunResult res = run_sector(
                make_run(omega, p, regularity, gamma, beta, tau, h, std::nullopt, "auto", "direct", false));
            const FieldSample f = sample_field(res.disc, res.solve.solution, n);
            Eigen::MatrixXd ref(f.reference.size(), 2), phys(f.physical.size(), 2);
            for (std::size_t k = 0; k < f.reference.size(); ++k) {
                ref.row(k) = f.reference[k].transpose();
                phys.row(k) = f.physical[k].transpose();
            }
            py::dict out;
            out["reference"] = ref;
            out["physical"] = phys;
            out["value"] = Eigen::Map<const Eigen::VectorXd>(f.value.data(), f.value.size()).eval();
            out["inside"] = f.inside;
            return out;
        },
        py::arg("h"), py::arg("n") = 51, SECTOR_ARGS,
        "Discrete solution on an n x n grid with reference and physical coordinates.");

    m.def(
        "multipatch_fig8",
        [](const std::vector<double>& hs, double gamma, int p) {
            const PatchSet set = fig8_patch_set(gamma);
            py::list rows;
            for (double h : hs) {
                MultipatchOptions o;
                o.h = h;
                o.degree = p;
                o.regularity = p - 1;
                const MultipatchSystem mp = assemble_multipatch(
                    set, o, NitscheParams{}, [](const Vec2&) { return 0.0; }, fig8_dirichlet());
                const Vector u = solve(mp.system).solution;
                py::dict d;
                d["h"] = h;
                d["n_dofs"] = mp.n_dofs();
                d["interface_jump"] = interface_jump_norm(mp, set, u);
                rows.append(d);
            }
            return rows;
        },
        py::arg("hs"), py::arg("gamma") = 4.0, py::arg("p") = 2);
}
