#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "beurling/experiments.hpp"
#include "beurling/integer_lattice.hpp"
#include "beurling/smoothing.hpp"
#include "beurling/verify.hpp"

namespace py = pybind11;
using namespace beurling;

namespace {

json to_json(const py::object& obj) {
  const auto text = py::module_::import("json").attr("dumps")(obj).cast<std::string>();
  return json::parse(text);
}

py::object from_json(const json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

DensityRoute route_from(const std::string& s) {
  if (s == "auto") return DensityRoute::kAuto;
  if (s == "convolution") return DensityRoute::kConvolution;
  if (s == "fourier") return DensityRoute::kFourier;
  throw DomainError("route must be auto, convolution or fourier");
}

}  // namespace

PYBIND11_MODULE(_beurling, m) {
  m.doc() = "Generalized prime systems: enumeration, densities, transfer chain and smoothing";

  auto domain = py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<PoleError>(m, "PoleError", domain.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<CapacityError>(m, "CapacityError", PyExc_RuntimeError);
  py::register_exception<UnsupportedError>(m, "UnsupportedError", PyExc_NotImplementedError);
  py::register_exception<ConditioningError>(m, "ConditioningError", PyExc_ArithmeticError);
  py::register_exception<ToleranceError>(m, "ToleranceError", PyExc_ArithmeticError);
  py::register_exception<ResolutionError>(m, "ResolutionError", PyExc_ValueError);

  m.def("tau", &tau, py::arg("y"), "Logarithmic-integral reference prime counting function.");
  m.def("sieve_primes", &sieve_primes, py::arg("limit"));

  m.def(
      "generate",
      [](const py::object& system, double X) {
        const IntegerMultiset n = generate(system_from_json(to_json(system)), X);
        std::vector<std::pair<double, double>> out;
        out.reserve(n.size());
        for (const LatticeEntry& e : n.entries()) out.emplace_back(e.value, e.multiplicity);
        return out;
      },
      py::arg("system"), py::arg("X"), "Generalized integers up to X as (value, multiplicity) pairs.");

  m.def(
      "density",
      [](const py::object& system, double X) {
        return from_json(density_estimate(generate(system_from_json(to_json(system)), X)).to_json());
      },
      py::arg("system"), py::arg("X"));

  m.def(
      "euler_density",
      [](const std::vector<double>& removed, const std::vector<double>& added) {
        return euler_density(removed, added);
      },
      py::arg("removed"), py::arg("added") = std::vector<double>{});

  m.def(
      "transfer",
      [](const py::object& perturbation, std::complex<double> s) {
        const TransferChain chain(perturbation_from_json(to_json(perturbation)));
        py::dict d;
        d["A"] = chain.A(s);
        d["B"] = chain.B(s);
        d["C"] = chain.C(s);
        d["Z"] = chain.Z(s);
        return d;
      },
      py::arg("perturbation"), py::arg("s"), "A, B, C and Z at s. Raises PoleError at s = 1 for the tau reference.");

  m.def(
      "diamond_integral",
      [](const py::object& perturbation, const std::vector<double>& Y_grid) {
        return from_json(diamond_integral(perturbation_from_json(to_json(perturbation)), Y_grid).to_json());
      },
      py::arg("perturbation"), py::arg("Y_grid"));

  m.def(
      "smooth_counting",
      [](const py::object& system, double X, double eps, const std::vector<double>& u_grid, double tilt) {
        const StepFunction n = generate(system_from_json(to_json(system)), X).to_step_function();
        return smooth_counting(n, eps, u_grid, tilt).values;
      },
      py::arg("system"), py::arg("X"), py::arg("eps"), py::arg("u_grid"), py::arg("tilt") = 1.0,
      "Gaussian-smoothed counting of the integers generated up to X.");

  m.def(
      "fourier_counting",
      [](const py::object& perturbation, double sigma, double eps, const std::vector<double>& u_grid) {
        return fourier_counting(perturbation_from_json(to_json(perturbation)), sigma, eps, u_grid).values;
      },
      py::arg("perturbation"), py::arg("sigma"), py::arg("eps"), py::arg("u_grid"));

  m.def(
      "density_via_c1",
      [](const py::object& perturbation, double eps, double u_probe, const std::string& route) {
        return from_json(
            density_via_C1(perturbation_from_json(to_json(perturbation)), eps, u_probe, route_from(route)).to_json());
      },
      py::arg("perturbation"), py::arg("eps"), py::arg("u_probe"), py::arg("route") = "auto");

  m.def(
      "holder_modulus",
      [](const py::object& perturbation, double T, double dt, const std::vector<double>& deltas, double fit_lo) {
        const LineSamples L = sample_line(perturbation_from_json(to_json(perturbation)), LineWhich::kA, 1.0, T, dt);
        return from_json(holder_modulus(L, deltas, {64, fit_lo}).to_json());
      },
      py::arg("perturbation"), py::arg("T"), py::arg("dt"), py::arg("deltas"), py::arg("fit_lo") = 0.0,
      "Modulus of continuity of A(1+it) on [-T, T].");

  m.def("validate_config", [](const py::object& config) { validate_config(to_json(config)); }, py::arg("config"));

  m.def(
      "run",
      [](const py::object& config, const std::filesystem::path& out_dir, std::optional<std::uint64_t> seed,
         int threads) {
        RunOptions opt{out_dir, seed, threads};
        RunResult r;
        {
          const json cfg = to_json(config);
          py::gil_scoped_release release;
          r = run(cfg, opt);
        }
        py::dict d;
        d["exit_code"] = r.exit_code;
        d["message"] = r.message;
        d["report"] = from_json(r.report);
        return d;
      },
      py::arg("config"), py::arg("out_dir"), py::arg("seed") = py::none(), py::arg("threads") = 1);

  m.def("verify", [] { return from_json(run_invariant_suite().to_json()); });
}
