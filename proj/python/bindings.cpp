#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "reuse_lab/closed_form.hpp"
#include "reuse_lab/harness.hpp"
#include "reuse_lab/model.hpp"
#include "reuse_lab/reuse.hpp"
#include "reuse_lab/sgd_sim.hpp"

namespace py = pybind11;
using namespace reuse_lab;

namespace {

std::vector<double> to_vector(std::span<const double> s) { return {s.begin(), s.end()}; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multi-epoch SGD for linear regression: risk formulas, simulation and effective reuse rates.";

  py::register_exception<ModelError>(m, "ModelError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_RuntimeError);

  py::class_<Spectrum>(m, "Spectrum")
      .def(py::init<std::vector<double>>(), py::arg("eigenvalues"))
      .def_property_readonly("eigenvalues", [](const Spectrum& s) { return to_vector(s.eigenvalues()); })
      .def_property_readonly("dimension", &Spectrum::dimension)
      .def_property_readonly("trace", &Spectrum::trace)
      .def_property_readonly("bottom_multiplicity", &Spectrum::bottom_multiplicity);

  py::class_<Problem>(m, "Problem")
      .def(py::init<Spectrum, std::vector<double>, double, std::vector<double>, double>(), py::arg("spectrum"),
           py::arg("ground_truth"), py::arg("noise_std"), py::arg("init") = std::vector<double>{},
           py::arg("data_bound") = 0.0)
      .def_property_readonly("spectrum", &Problem::spectrum)
      .def_property_readonly("dimension", &Problem::dimension)
      .def_property_readonly("ground_truth", [](const Problem& p) { return to_vector(p.ground_truth()); })
      .def_property_readonly("init", [](const Problem& p) { return to_vector(p.init()); })
      .def_property_readonly("noise_std", &Problem::noise_std)
      .def_property_readonly("data_bound", &Problem::data_bound)
      .def_property_readonly("stable_lr_bound", &Problem::stable_lr_bound);

  py::enum_<ZipfLaw>(m, "ZipfLaw")
      .value("Power", ZipfLaw::Power)
      .value("LogPower", ZipfLaw::LogPower)
      .value("Explicit", ZipfLaw::Explicit);

  py::class_<ZipfModel>(m, "ZipfModel")
      .def(py::init<std::vector<double>, std::vector<double>>(), py::arg("probabilities"), py::arg("scales"))
      .def_property_readonly("dimension", &ZipfModel::dimension)
      .def_property_readonly("probabilities", [](const ZipfModel& z) { return to_vector(z.probabilities()); })
      .def_property_readonly("scales", [](const ZipfModel& z) { return to_vector(z.scales()); })
      .def_property_readonly("law", &ZipfModel::law)
      .def_property_readonly("a", &ZipfModel::a)
      .def_property_readonly("b", &ZipfModel::b);

  m.def("make_gaussian_isotropic", &make_gaussian_isotropic, py::arg("d"), py::arg("sigma"), py::arg("seed"));
  m.def("make_zipf", &make_zipf, py::arg("law"), py::arg("a"), py::arg("b"), py::arg("d"));
  m.def("make_zipf_problem", &make_zipf_problem, py::arg("model"), py::arg("sigma"), py::arg("seed"));

  py::class_<RiskEstimate>(m, "RiskEstimate")
      .def_readonly("mean", &RiskEstimate::mean)
      .def_readonly("std_error", &RiskEstimate::std_error)
      .def_readonly("replicas", &RiskEstimate::replicas)
      .def("__repr__", [](const RiskEstimate& r) {
        return "RiskEstimate(mean=" + format_real(r.mean) + ", std_error=" + format_real(r.std_error) +
               ", replicas=" + std::to_string(r.replicas) + ")";
      });

  m.def("excess_risk", [](const Problem& p, const std::vector<double>& w) { return excess_risk(p, w); },
        py::arg("problem"), py::arg("w"));

  m.def(
      "run_sgd",
      [](const Problem& problem, std::int64_t epochs, std::int64_t n, double eta, std::uint64_t seed,
         bool track_decomposition) {
        Trajectory t;
        {
          py::gil_scoped_release release;
          t = run_sgd(problem, SgdRun{epochs, n, eta, seed}, GaussianData{}, track_decomposition);
        }
        py::dict out;
        out["final_weight"] = t.final_weight;
        if (t.final_bias) out["final_bias"] = *t.final_bias;
        if (t.final_var) out["final_var"] = *t.final_var;
        out["steps_taken"] = t.steps_taken;
        return out;
      },
      py::arg("problem"), py::arg("epochs"), py::arg("n"), py::arg("eta"), py::arg("seed"),
      py::arg("track_decomposition") = false);

  m.def(
      "monte_carlo_risk",
      [](const Problem& problem, std::int64_t epochs, std::int64_t n, double eta, std::int64_t replicas,
         std::uint64_t base_seed, std::size_t threads) {
        MonteCarloOptions options;
        options.threads = threads;
        return monte_carlo_risk(problem, epochs, n, eta, replicas, base_seed, options);
      },
      py::arg("problem"), py::arg("epochs"), py::arg("n"), py::arg("eta"), py::arg("replicas"),
      py::arg("base_seed") = 0, py::arg("threads") = 0, py::call_guard<py::gil_scoped_release>());

  py::class_<RiskBreakdown>(m, "RiskBreakdown")
      .def_readonly("bias", &RiskBreakdown::bias)
      .def_readonly("var_across_epochs", &RiskBreakdown::var_across_epochs)
      .def_readonly("var_within_epoch", &RiskBreakdown::var_within_epoch)
      .def_readonly("total", &RiskBreakdown::total);

  py::enum_<Regime>(m, "Regime").value("SmallK", Regime::SmallK).value("LargeK", Regime::LargeK);

  m.def("approx_risk", &approx_risk, py::arg("problem"), py::arg("epochs"), py::arg("n"), py::arg("eta"));
  m.def("simplified_risk", &simplified_risk, py::arg("problem"), py::arg("epochs"), py::arg("n"), py::arg("eta"),
        py::arg("regime"));
  m.def(
      "optimal_lr",
      [](const Problem& p, std::int64_t epochs, std::int64_t n) {
        const auto lr = optimal_lr(p, epochs, n);
        return py::make_tuple(lr.eta, lr.exceeds_stability);
      },
      py::arg("problem"), py::arg("epochs"), py::arg("n"));
  m.def("zipf_risk", &zipf_risk, py::arg("model"), py::arg("epochs"), py::arg("n"), py::arg("eta"));
  m.def("muennighoff_effective_n", &muennighoff_effective_n, py::arg("epochs"), py::arg("n"),
        py::arg("r_star") = 15.39);

  py::class_<OptimalRisk>(m, "OptimalRisk")
      .def_readonly("eta_star", &OptimalRisk::eta_star)
      .def_readonly("risk_star", &OptimalRisk::risk_star)
      .def_readonly("search_trace", &OptimalRisk::search_trace)
      .def_readonly("at_boundary", &OptimalRisk::at_boundary);

  m.def("minimize_risk", &minimize_risk, py::arg("risk_fn"), py::arg("lo"), py::arg("hi"),
        py::arg("grid_points") = 64, py::arg("refine_iters") = 60);
  m.def(
      "risk_star_zipf",
      [](const ZipfModel& model, std::int64_t epochs, double n) { return risk_star_zipf(model, epochs, n); },
      py::arg("model"), py::arg("epochs"), py::arg("n"), py::call_guard<py::gil_scoped_release>());

  py::class_<ReusePoint>(m, "ReusePoint")
      .def_readonly("epochs", &ReusePoint::epochs)
      .def_readonly("n", &ReusePoint::n)
      .def_readonly("n_prime", &ReusePoint::n_prime)
      .def_readonly("e_value", &ReusePoint::e_value)
      .def_readonly("eta_star", &ReusePoint::eta_star)
      .def_readonly("risk_star", &ReusePoint::risk_star);

  m.def(
      "effective_reuse_zipf",
      [](const ZipfModel& model, std::int64_t epochs, double n) { return effective_reuse_zipf(model, epochs, n); },
      py::arg("model"), py::arg("epochs"), py::arg("n"), py::call_guard<py::gil_scoped_release>());

  py::enum_<FitTransform>(m, "FitTransform")
      .value("XPower", FitTransform::XPower)
      .value("LogXPower", FitTransform::LogXPower);

  py::class_<PowerFit>(m, "PowerFit")
      .def_readonly("c1", &PowerFit::c1)
      .def_readonly("c2", &PowerFit::c2)
      .def_readonly("r_squared", &PowerFit::r_squared);

  m.def(
      "fit_power_law",
      [](const std::vector<std::pair<double, double>>& points, FitTransform transform) {
        return fit_power_law(points, transform);
      },
      py::arg("points"), py::arg("transform") = FitTransform::XPower);

  m.def("plateau_exponent", &plateau_exponent, py::arg("model"));
  m.def("zipf_risk_by_enumeration", &zipf_risk_by_enumeration, py::arg("model"), py::arg("epochs"), py::arg("n"),
        py::arg("eta"));
}
