#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "floquet/scenario.hpp"

namespace py = pybind11;
using namespace floquet;

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Floquet decompositions, periodic dynamical invariants, and "
      "non-Abelian geometric phases for driven finite-dimensional systems";
  m.attr("__version__") = kVersion;

  py::register_exception<ValidationError>(m, "ValidationError");
  py::register_exception<BranchBoundaryError>(m, "BranchBoundaryError");
  py::register_exception<LevelCrossingError>(m, "LevelCrossingError");
  py::register_exception<ToleranceError>(m, "ToleranceError");

  m.def(
      "spin_generators",
      [](double j) {
        const SpinGenerators& g = spin_generators(j);
        return py::make_tuple(g.j1.mat(), g.j2.mat(), g.j3.mat());
      },
      py::arg("j"), "Angular-momentum generators (J1, J2, J3) for spin j.");

  m.def(
      "herm_eig",
      [](const Matrix& a, std::optional<double> cluster_tol) {
        const SpectralDecomposition sd =
            herm_eig(HermitianOperator(a), cluster_tol);
        py::list clusters;
        for (const auto& c : sd.clusters) {
          clusters.append(py::make_tuple(c.eigenvalue, c.basis));
        }
        return clusters;
      },
      py::arg("a"), py::arg("cluster_tol") = std::nullopt,
      "Clustered Hermitian eigendecomposition: [(eigenvalue, basis), ...] "
      "sorted by descending eigenvalue.");

  m.def(
      "unitary_exp",
      [](const Matrix& a, double s) {
        return unitary_exp(HermitianOperator(a), s).mat();
      },
      py::arg("a"), py::arg("s"), "e^{i s A} for Hermitian A.");

  m.def(
      "unitary_log",
      [](const Matrix& u, double resonance_tol) {
        return unitary_log(UnitaryOperator(u), resonance_tol).mat();
      },
      py::arg("u"), py::arg("resonance_tol") = kResonanceTol,
      "Principal Hermitian logarithm K with U = e^{iK}.");

  m.def(
      "polar_unitary", [](const Matrix& a) { return polar_unitary(a).mat(); },
      py::arg("a"), "Unitary factor of the polar decomposition.");

  m.def("commutator_norm", &commutator_norm, py::arg("a"), py::arg("b"),
        "||AB - BA||_F.");

  m.def(
      "precessing_connection",
      [](double j, double omega, double big_omega, Complex xi, Complex zeta) {
        const PrecessingConnection c =
            precessing_connection({j, omega, big_omega}, xi, zeta);
        return py::make_tuple(Matrix(c.e), Matrix(c.a), Matrix(c.delta));
      },
      py::arg("j"), py::arg("omega"), py::arg("big_omega"), py::arg("xi"),
      py::arg("zeta"),
      "Closed-form (E, A, Delta) of the precessing model for a mixed frame.");

  m.def(
      "run_scenario_json",
      [](const std::string& config) {
        return run_scenario(ScenarioConfig::from_json(config)).to_json();
      },
      py::arg("config"),
      "Run a scenario from a JSON config string; returns the report JSON.");

  m.def(
      "self_check_json",
      [](int steps) {
        return self_check({.steps = steps}).to_json();
      },
      py::arg("steps") = 512,
      "Run the acceptance self-check; returns the report JSON.");

  m.def("default_config_json",
        []() { return default_scenario().to_json(); },
        "The built-in spin1-precessing scenario config as JSON.");
}
