// Python face of the library. The heavy lifting stays in C++: this module
// exposes the experiment runner (JSON in, JSON out) plus a few direct numeric
// entry points that are convenient from a notebook.
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>

#include "json.hpp"
#include "modvar/errors.hpp"
#include "modvar/measurement.hpp"
#include "modvar/modular.hpp"
#include "modvar/runner.hpp"
#include "modvar/version.hpp"

namespace py = pybind11;

namespace {

std::string run_experiment(const std::string& name, const std::string& config_json,
                           std::uint64_t seed, int threads) {
    modvar::RunOptions opt;
    opt.experiment = name;
    opt.seed = seed;
    opt.threads = threads;
    try {
        opt.config = modvar::Json::parse(config_json);
    } catch (const nlohmann::json::parse_error& e) {
        throw modvar::ParseError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!opt.config.is_object())
        throw modvar::ValidationError("config must be a JSON object");
    const modvar::ExperimentResult result = modvar::dispatch(opt);
    return modvar::result_to_json(result, opt);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "modular-variable interference laboratory";
    m.attr("__version__") = modvar::kVersion;
    m.attr("default_seed") = modvar::kDefaultSeed;

    // All library errors surface as ValueError so callers need one handler.
    py::register_exception<modvar::Error>(m, "ModvarError", PyExc_ValueError);

    m.def("run_experiment", &run_experiment, py::arg("name"),
          py::arg("config_json") = "{}", py::arg("seed") = modvar::kDefaultSeed,
          py::arg("threads") = 1,
          py::call_guard<py::gil_scoped_release>(),
          "Run one experiment and return its summary as a JSON string.\n"
          "Names: gedanken, mz, theorem1, flatness, grating, ellipse, zn.");

    m.def(
        "modular_decompose",
        [](double value, double period) {
            const modvar::ModularParts p = modvar::decompose(value, period);
            return py::make_tuple(p.quotient, p.remainder);
        },
        py::arg("value"), py::arg("period"),
        "Split value into (integer quotient, remainder in [0, period)).");

    m.def("weak_value", &modvar::weak_value, py::arg("op"), py::arg("state_in"),
          py::arg("state_fin"),
          "Weak value <fin|A|in> / <fin|in> of a Hermitian operator.");

    m.def(
        "zn_eigenvalues",
        [](int order) { return modvar::zn_basis(order).eigenvalues; },
        py::arg("order"),
        "Shift-operator eigenvalues b^k, b = exp(-2 pi i / order).");
}
