// Python extension. Structured results cross the boundary as the same JSON
// documents the CLI emits; the Python package decodes them.

#include <complex>
#include <sstream>
#include <tuple>

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ctcmbqc/cli.hpp"
#include "ctcmbqc/ctc.hpp"
#include "ctcmbqc/error.hpp"
#include "ctcmbqc/graphstate.hpp"
#include "ctcmbqc/report.hpp"
#include "ctcmbqc/scenarios.hpp"

namespace py = pybind11;
using namespace ctcmbqc;

namespace {

StateVector state_from(const std::vector<std::complex<double>> &amps) {
    Vector v(static_cast<Eigen::Index>(amps.size()));
    for (std::size_t i = 0; i < amps.size(); ++i) v(static_cast<Eigen::Index>(i)) = amps[i];
    return StateVector(v);
}

std::vector<DensityMatrix> grid_states() {
    std::vector<DensityMatrix> out;
    for (const BlochVector &b : bloch_grid62()) out.push_back(to_density(b));
    return out;
}

}  // namespace

PYBIND11_MODULE(_ctcmbqc, m) {
    static py::exception<ctcmbqc::Error> error(m, "Error", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ctcmbqc::Error &e) {
            py::object exc = py::handle(error.ptr())(std::string(error_code_name(e.code())) + ": " + e.what());
            exc.attr("code") = error_code_name(e.code());
            PyErr_SetObject(error.ptr(), exc.ptr());
        }
    });

    m.def(
        "run_cli",
        [](const std::vector<std::string> &args) {
            std::ostringstream out, err;
            int code = run_cli(args, out, err);
            return std::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Run the command-line front end in process; returns (exit_code, stdout, stderr).");

    m.def("scenario_names", &scenario_names);
    m.def(
        "repro",
        [](const std::string &name, double theta, double tol, std::uint64_t seed) {
            return dump_json(to_json(run_scenario(name, {theta, tol, seed})));
        },
        py::arg("name"), py::arg("theta") = 0.7, py::arg("tol") = 1e-10, py::arg("seed") = 0);

    m.def(
        "bss_simulate",
        [](const std::string &spec, const std::vector<std::complex<double>> &input) {
            return dump_json(to_json(bss_simulate(parse_ctc_spec(spec), state_from(input))));
        },
        py::arg("spec"), py::arg("input"));
    m.def(
        "deutsch",
        [](const std::string &spec, double x, double y, double z) {
            return dump_json(to_json(deutsch_fixed_points(parse_ctc_spec(spec), to_density({x, y, z}))));
        },
        py::arg("spec"), py::arg("x"), py::arg("y"), py::arg("z"));
    m.def(
        "compare",
        [](const std::string &spec, double tol) {
            return dump_json(to_json(compare_models(parse_ctc_spec(spec), grid_states(), tol)));
        },
        py::arg("spec"), py::arg("tol") = 1e-9);
    m.def(
        "simplify",
        [](const std::string &spec) {
            return dump_json(to_json(deterministic_ctc_simulation(build_bss_circuit(parse_ctc_spec(spec)))));
        },
        py::arg("spec"));
    m.def(
        "pattern_to_circuit", [](const std::string &text) { return serialize_circuit(pattern_to_circuit(parse_pattern(text))); },
        py::arg("pattern"));
    m.def(
        "circuit_to_pattern", [](const std::string &text) { return circuit_to_pattern(parse_circuit(text)).to_string(); },
        py::arg("circuit"));
}
