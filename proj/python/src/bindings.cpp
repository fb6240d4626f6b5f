#include "mick/concordance.hpp"
#include "mick/copula.hpp"
#include "mick/error.hpp"
#include "mick/harness.hpp"
#include "mick/io.hpp"
#include "mick/solver.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>
#include <vector>

namespace py = pybind11;
using namespace mick;

namespace {

// Raises the module's exception type with `code` (and `best` for NoConvergence) attached.
void raise_mick(const char* type_name, const Error& e, py::object best)
{
    py::object type = py::module_::import("mickcopula._core").attr(type_name);
    py::object instance = type(py::str(e.what()));
    instance.attr("code") = std::string(to_string(e.code()));
    instance.attr("best") = std::move(best);
    PyErr_SetObject(type.ptr(), instance.ptr());
}

std::vector<UvPair> pairs_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a)
{
    if (a.ndim() != 2 || a.shape(1) != 2)
        throw Error(Errc::InvalidArgument, "expected an array of shape (N, 2)");
    std::vector<UvPair> pairs(static_cast<std::size_t>(a.shape(0)));
    auto view = a.unchecked<2>();
    for (py::ssize_t k = 0; k < a.shape(0); ++k)
        pairs[static_cast<std::size_t>(k)] = {view(k, 0), view(k, 1)};
    return pairs;
}

py::array_t<double> pairs_to_array(const std::vector<UvPair>& pairs)
{
    py::array_t<double> out({static_cast<py::ssize_t>(pairs.size()), py::ssize_t{2}});
    auto view = out.mutable_unchecked<2>();
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        view(static_cast<py::ssize_t>(k), 0) = pairs[k].u;
        view(static_cast<py::ssize_t>(k), 1) = pairs[k].v;
    }
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Frank copula and the minimum-information checkerboard copula under fixed Kendall's tau";

    py::object error_type = py::reinterpret_steal<py::object>(
        PyErr_NewException("mickcopula._core.MickError", PyExc_RuntimeError, nullptr));
    m.attr("MickError") = error_type;
    m.attr("NoConvergence") = py::reinterpret_steal<py::object>(
        PyErr_NewException("mickcopula._core.NoConvergence", error_type.ptr(), nullptr));
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p)
                std::rethrow_exception(p);
        } catch (const NoConvergence& e) {
            raise_mick("NoConvergence", e, py::cast(e.best()));
        } catch (const Error& e) {
            raise_mick("MickError", e, py::none());
        }
    });

    py::class_<FrankParameter>(m, "FrankParameter")
        .def(py::init<double>(), py::arg("theta"))
        .def_property_readonly("theta", &FrankParameter::theta)
        .def("supported", &FrankParameter::supported)
        .def("__float__", &FrankParameter::theta)
        .def("__repr__", [](const FrankParameter& p) { return "FrankParameter(" + format_double(p.theta()) + ")"; });
    py::implicitly_convertible<double, FrankParameter>();
    m.attr("MAX_SUPPORTED_THETA") = FrankParameter::kMaxSupportedTheta;

    py::class_<CheckerboardDensity>(m, "CheckerboardDensity")
        .def(py::init<>())
        .def_static("from_masses", &CheckerboardDensity::from_masses, py::arg("masses"),
                    py::arg("tol") = CheckerboardDensity::kMarginalTolerance)
        .def_static("uniform", &CheckerboardDensity::uniform, py::arg("n"))
        .def_property_readonly("n", &CheckerboardDensity::n)
        .def_property_readonly("masses", [](const CheckerboardDensity& c) { return Eigen::MatrixXd(c.masses()); })
        .def("max_marginal_error", &CheckerboardDensity::max_marginal_error)
        .def("__getitem__",
             [](const CheckerboardDensity& c, std::pair<int, int> ij) {
                 if (ij.first < 0 || ij.first >= c.n() || ij.second < 0 || ij.second >= c.n())
                     throw py::index_error("cell index out of range");
                 return c(ij.first, ij.second);
             })
        .def("__eq__", [](const CheckerboardDensity& a, const CheckerboardDensity& b) { return a == b; })
        .def("__repr__", [](const CheckerboardDensity& c) { return "CheckerboardDensity(n=" + std::to_string(c.n()) + ")"; });

    m.def("frank_cdf", &frank_cdf, py::arg("theta"), py::arg("u"), py::arg("v"));
    m.def("frank_density", &frank_density, py::arg("theta"), py::arg("u"), py::arg("v"));
    m.def("frank_conditional_cdf", &frank_conditional_cdf, py::arg("theta"), py::arg("u"), py::arg("v"));
    m.def("frank_generator", &frank_generator, py::arg("theta"), py::arg("t"));
    m.def("frank_generator_inverse", &frank_generator_inverse, py::arg("theta"), py::arg("s"));
    m.def(
        "frank_sample",
        [](const FrankParameter& p, int count, std::uint64_t seed) { return pairs_to_array(frank_sample(p, count, seed)); },
        py::arg("theta"), py::arg("count"), py::arg("seed"), "Array of shape (count, 2) holding (u, v) pairs.");
    m.def("debye_d1", &debye_d1, py::arg("x"));
    m.def("tau_from_theta", &tau_from_theta, py::arg("theta"));
    m.def("theta_from_tau", &theta_from_tau, py::arg("tau"), py::arg("tol") = 1e-13);
    m.def("frank_checkerboard", &frank_checkerboard, py::arg("theta"), py::arg("n"));
    m.def("checkerboard_cdf_eval", &checkerboard_cdf_eval, py::arg("density"), py::arg("u"), py::arg("v"));
    m.def(
        "checkerboard_cdf_nodes", [](const CheckerboardDensity& c) { return checkerboard_cdf_nodes(c).values; },
        py::arg("density"));

    m.def("kendall_tau_checkerboard", &kendall_tau_checkerboard, py::arg("density"));
    m.def(
        "concordance_potential", [](const CheckerboardDensity& c) { return concordance_potential(c).values; },
        py::arg("density"));
    m.def(
        "kendall_tau_sample",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
            return kendall_tau_sample(pairs_from_array(a));
        },
        py::arg("pairs"));
    m.def(
        "liouville_residual",
        [](const BivariateFunction& density, double constant, int n) {
            return liouville_residual(density, constant, n).values;
        },
        py::arg("density"), py::arg("constant"), py::arg("n"));
    m.def("frank_F", &frank_F, py::arg("theta"), py::arg("u"), py::arg("v"));
    m.def("frank_F_identity", &frank_F_identity, py::arg("theta"), py::arg("n"));

    py::class_<SolverConfig>(m, "SolverConfig")
        .def(py::init([](int n, double target_tau, double tol_tau, double tol_fix, int max_outer, int max_inner,
                         double damping, std::optional<double> multiplier_init) {
                 return SolverConfig{n, target_tau, tol_tau, tol_fix, max_outer, max_inner, damping, multiplier_init};
             }),
             py::kw_only(), py::arg("n") = 8, py::arg("target_tau") = 0.0, py::arg("tol_tau") = 1e-6,
             py::arg("tol_fix") = 1e-9, py::arg("max_outer") = 60, py::arg("max_inner") = 5000,
             py::arg("damping") = 0.5, py::arg("multiplier_init") = py::none())
        .def_readwrite("n", &SolverConfig::n)
        .def_readwrite("target_tau", &SolverConfig::target_tau)
        .def_readwrite("tol_tau", &SolverConfig::tol_tau)
        .def_readwrite("tol_fix", &SolverConfig::tol_fix)
        .def_readwrite("max_outer", &SolverConfig::max_outer)
        .def_readwrite("max_inner", &SolverConfig::max_inner)
        .def_readwrite("damping", &SolverConfig::damping)
        .def_readwrite("multiplier_init", &SolverConfig::multiplier_init)
        .def("validate", &SolverConfig::validate);

    py::class_<SolverReport>(m, "SolverReport")
        .def_property_readonly("density", [](const SolverReport& r) { return r.state.density; })
        .def_property_readonly("multiplier", [](const SolverReport& r) { return r.state.multiplier; })
        .def_property_readonly("row_potentials", [](const SolverReport& r) { return r.state.row_potentials; })
        .def_property_readonly("col_potentials", [](const SolverReport& r) { return r.state.col_potentials; })
        .def_readonly("achieved_tau", &SolverReport::achieved_tau)
        .def_readonly("stationarity_residual", &SolverReport::stationarity_residual)
        .def_readonly("outer_iterations", &SolverReport::outer_iterations)
        .def_readonly("inner_iterations_total", &SolverReport::inner_iterations_total)
        .def_readonly("converged", &SolverReport::converged)
        .def_readonly("implied_theta", &SolverReport::implied_theta)
        .def_property_readonly("trace",
                               [](const SolverReport& r) {
                                   std::vector<std::pair<double, double>> out;
                                   for (const auto& probe : r.trace)
                                       out.emplace_back(probe.multiplier, probe.tau);
                                   return out;
                               })
        .def_readonly("monotone_trace", &SolverReport::monotone_trace)
        .def_readonly("config", &SolverReport::config)
        .def("to_json", [](const SolverReport& r) { return report_to_json(r).dump(); })
        .def_static("from_json", [](const std::string& text) {
            try {
                return report_from_json(nlohmann::json::parse(text));
            } catch (const nlohmann::json::exception& e) {
                throw Error(Errc::ParseError, e.what());
            }
        });

    m.def("tau_max", &tau_max, py::arg("n"));
    m.def("negentropy", &negentropy, py::arg("density"));
    m.def("solve_mick", &solve_mick, py::arg("config"), py::call_guard<py::gil_scoped_release>());
    m.def(
        "solve",
        [](double tau, int n) {
            SolverConfig cfg;
            cfg.n = n;
            cfg.target_tau = tau;
            return solve_mick(cfg);
        },
        py::arg("tau"), py::arg("n"), py::call_guard<py::gil_scoped_release>(),
        "solve_mick with default tolerances.");

    m.def("sup_cell_difference", &sup_cell_difference, py::arg("a"), py::arg("b"));
    m.def("compare_to_frank", &compare_to_frank, py::arg("report"), py::arg("theta"));

    py::class_<SweepRun>(m, "SweepRun")
        .def_readonly("n", &SweepRun::n)
        .def_readonly("ok", &SweepRun::ok)
        .def_readonly("sup_error", &SweepRun::sup_error)
        .def_readonly("report", &SweepRun::report)
        .def_readonly("error", &SweepRun::error);

    py::class_<SweepResult>(m, "SweepResult")
        .def_readonly("grid_sizes", &SweepResult::grid_sizes)
        .def_readonly("sup_errors", &SweepResult::sup_errors)
        .def_readonly("tau", &SweepResult::tau)
        .def_readonly("theta", &SweepResult::theta)
        .def_readonly("runs", &SweepResult::runs)
        .def("complete", &SweepResult::complete)
        .def("to_csv", &sweep_to_csv)
        .def("to_svg", &sweep_to_svg);

    m.def("convergence_sweep", &convergence_sweep, py::arg("tau"), py::arg("grid_sizes"),
          py::arg("config") = SolverConfig{}, py::arg("threads") = 0, py::call_guard<py::gil_scoped_release>());

    m.def(
        "density_to_json",
        [](const CheckerboardDensity& c, std::optional<double> tau, std::optional<double> theta) {
            return density_to_json(c, {tau, theta}).dump();
        },
        py::arg("density"), py::arg("tau") = py::none(), py::arg("theta") = py::none());
    m.def(
        "density_from_json",
        [](const std::string& text) {
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(text);
            } catch (const nlohmann::json::exception& e) {
                throw Error(Errc::ParseError, e.what());
            }
            auto record = density_from_json(j);
            return py::make_tuple(record.density, record.meta.tau, record.meta.theta);
        },
        py::arg("text"), "Returns (density, tau, theta).");
    m.def("density_to_csv", &density_to_csv, py::arg("density"));
    m.def("density_from_csv", &density_from_csv, py::arg("text"));

    m.def(
        "cli_main",
        [](const std::vector<std::string>& args) {
            std::vector<const char*> argv{"mick-copula"};
            for (const auto& a : args)
                argv.push_back(a.c_str());
            std::ostringstream out, err;
            const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the command-line tool in-process; returns (exit_code, stdout, stderr).");
}
