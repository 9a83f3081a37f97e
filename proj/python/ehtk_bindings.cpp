#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ehtk/analysis.hpp"
#include "ehtk/io.hpp"
#include "ehtk/pipeline.hpp"

#include <algorithm>
#include <bit>

namespace py = pybind11;
using namespace ehtk;

namespace {

py::object to_py(const Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

Json from_py(const py::object& o) {
  return Json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

PureState state_from(const CVector& amplitudes) {
  const auto dim = static_cast<std::uint64_t>(amplitudes.size());
  if (dim < 2 || !std::has_single_bit(dim)) throw ValidationError("amplitude count must be a power of two");
  return PureState(std::countr_zero(dim), amplitudes);
}

EHAnsatz ansatz_from(const std::string& variant, const Sites& a, const Sites& b, double delta, bool cross_links) {
  switch (variant_from_string(variant)) {
    case AnsatzVariant::LocalLinks:
      return EHAnsatz::local_links(a, delta);
    case AnsatzVariant::PolynomialProfile:
      return EHAnsatz::polynomial_profile(a, delta);
    case AnsatzVariant::BilocalPairs:
      return EHAnsatz::bilocal_pairs(a, b, delta, cross_links);
  }
  throw ValidationError("unknown variant");
}

}  // namespace

PYBIND11_MODULE(_ehtk, m) {
  m.doc() = "Entanglement Hamiltonian tomography for XXZ spin chains";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<SpinModel>(m, "SpinModel")
      .def(py::init<int, double, double>(), py::arg("n"), py::arg("j") = 1.0, py::arg("delta") = 1.0)
      .def_property_readonly("n", &SpinModel::n_sites)
      .def_property_readonly("j", &SpinModel::coupling_j)
      .def_property_readonly("delta", &SpinModel::anisotropy_delta)
      .def("hamiltonian", &SpinModel::hamiltonian)
      .def("link_energies", &SpinModel::link_energies, py::arg("amplitudes"));

  m.def(
      "ground_state",
      [](const SpinModel& model, std::optional<int> sector) {
        const EigenPair e = ground_state(model, sector);
        return py::make_tuple(e.energy, e.state.amplitudes());
      },
      py::arg("model"), py::arg("sector") = py::none());

  m.def(
      "reduced_density_matrix",
      [](const CVector& amplitudes, const Sites& sites) {
        return reduced_density_matrix(state_from(amplitudes), sites).matrix;
      },
      py::arg("amplitudes"), py::arg("sites"));
  m.def("vn_entropy", py::overload_cast<const CMatrix&>(&vn_entropy), py::arg("rho"));
  m.def("uhlmann_fidelity", py::overload_cast<const CMatrix&, const CMatrix&>(&uhlmann_fidelity), py::arg("rho1"),
        py::arg("rho2"));

  m.def(
      "sample",
      [](const CVector& amplitudes, const Sites& sites, long long shots, std::uint64_t seed, int window, double p1,
         double p2) {
        std::optional<NoiseParams> noise;
        if (p1 > 0 || p2 > 0) noise = NoiseParams{p1, p2};
        const int n = static_cast<int>(sites.size());
        const auto settings = window_settings(n, std::min(window, n));
        return encode_dataset(sample_dataset(state_from(amplitudes), sites, settings, shots, noise, seed, "python"));
      },
      py::arg("amplitudes"), py::arg("sites"), py::arg("shots"), py::arg("seed"), py::arg("window") = 5,
      py::arg("p1") = 0.0, py::arg("p2") = 0.0, "Measurement dataset as JSON lines.");

  m.def(
      "fit",
      [](const std::string& dataset, const std::string& variant, const Sites& a, const Sites& b, double delta,
         bool cross_links, double p1, double p2) {
        const EHAnsatz ansatz = ansatz_from(variant, a, b, delta, cross_links);
        return to_py(to_json(fit_eh(decode_dataset(dataset), ansatz, NoiseParams{p1, p2})));
      },
      py::arg("dataset"), py::arg("variant") = "local-links", py::arg("a") = Sites{}, py::arg("b") = Sites{},
      py::arg("delta") = 1.0, py::arg("cross_links") = true, py::arg("p1") = 0.0, py::arg("p2") = 0.0);

  m.def(
      "fitted_rho",
      [](const py::object& fit, double delta, bool cross_links, const Sites& a, const Sites& b) {
        const FitResult f = fit_result_from_json(from_py(fit));
        const Sites first = f.variant == AnsatzVariant::BilocalPairs ? a : f.geometry;
        return fitted_state(ansatz_from(to_string(f.variant), first, b, delta, cross_links), f).rho.matrix;
      },
      py::arg("fit"), py::arg("delta") = 1.0, py::arg("cross_links") = true, py::arg("a") = Sites{},
      py::arg("b") = Sites{});

  m.def("read_state", [](const std::string& path) { return read_state_file(path).amplitudes(); }, py::arg("path"));
  m.def(
      "write_state", [](const std::string& path, const CVector& amplitudes) { write_state_file(path, state_from(amplitudes)); },
      py::arg("path"), py::arg("amplitudes"));

  m.def("preset_names", &preset_names);
  m.def(
      "preset",
      [](const std::string& name) {
        py::list out;
        for (const auto& c : preset(name)) out.append(to_py(to_json(c)));
        return out;
      },
      py::arg("name"));
  m.def(
      "normalize_config", [](const py::object& config) { return to_py(to_json(config_from_json(from_py(config)))); },
      py::arg("config"));
  m.def(
      "run_stage",
      [](const std::string& stage, const py::object& config, const std::string& out) {
        const ExperimentConfig c = config_from_json(from_py(config));
        Json summary;
        {
          py::gil_scoped_release release;
          summary = run_stage(stage, c, out);
        }
        return to_py(summary);
      },
      py::arg("stage"), py::arg("config"), py::arg("out"));
  m.def(
      "run_pipeline",
      [](const py::object& config, const std::string& out) {
        const ExperimentConfig c = config_from_json(from_py(config));
        Json manifest;
        {
          py::gil_scoped_release release;
          manifest = run_pipeline(c, out);
        }
        return to_py(manifest);
      },
      py::arg("config"), py::arg("out"));
}
