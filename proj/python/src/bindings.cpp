#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <sstream>

#include "crnalloc/config.hpp"
#include "crnalloc/harness.hpp"
#include "crnalloc/interference.hpp"
#include "crnalloc/modulation.hpp"
#include "crnalloc/optimizer.hpp"
#include "crnalloc/selftest.hpp"
#include "crnalloc/sinr.hpp"

namespace py = pybind11;
using namespace crnalloc;

namespace {

using Doubles = py::array_t<double, py::array::c_style | py::array::forcecast>;

// Scalars come back as floats, arrays keep their shape.
template <typename Fn>
py::object elementwise(const Doubles& in, Fn&& fn) {
  Doubles out(std::vector<py::ssize_t>(in.shape(), in.shape() + in.ndim()));
  const double* src = in.data();
  double* dst = out.mutable_data();
  for (py::ssize_t i = 0; i < in.size(); ++i) dst[i] = fn(src[i]);
  if (in.ndim() == 0) return py::float_(dst[0]);
  return std::move(out);
}

py::dict report_dict(const EvaluationReport& r) {
  py::dict d;
  d["fingerprint"] = r.fingerprint;
  d["num_states"] = r.num_states;
  d["ase"] = r.ase;
  d["ase_per_subcarrier"] = r.ase_per_subcarrier;
  d["ase_stderr"] = r.ase_stderr;
  d["avg_power_used"] = r.avg_power_used;
  d["max_interference"] = r.max_interference();
  d["max_collision"] = r.max_collision();
  d["iterations"] = r.iterations;
  d["converged"] = r.converged;
  py::list collision;
  for (const auto& c : r.collision) collision.append(py::make_tuple(c.probability, c.standard_error));
  d["collision"] = collision;
  py::list trace;
  for (const auto& t : r.trace) trace.append(py::make_tuple(t.iter, t.mu, t.primal_ase, t.dual_value, t.power_gap));
  d["trace"] = trace;
  return d;
}

HarnessOptions harness_options(std::size_t states, unsigned threads, int max_iterations) {
  HarnessOptions opt;
  opt.num_states = states;
  opt.solver.threads = threads;
  opt.solver.max_iterations = max_iterations;
  return opt;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "OFDMA cognitive-radio resource allocation";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<InfeasibleError>(m, "InfeasibleError", base.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());

  py::class_<ScenarioConfig>(m, "Config")
      .def_static("reference", &reference_scenario)
      .def_static("reference_probabilistic", &reference_probabilistic_scenario)
      .def_static("parse", [](const std::string& text) { return parse_config(text); }, py::arg("text"))
      .def_static("load", [](const std::string& path) { return load_config(path); }, py::arg("path"))
      .def("set", [](ScenarioConfig& c, const std::string& key, const std::string& value) {
        apply_override(c, key, value);
      }, py::arg("key"), py::arg("value"))
      .def("text", &to_config_text)
      .def("fingerprint", &config_fingerprint)
      .def_readonly("users", &ScenarioConfig::num_users)
      .def_readonly("primaries", &ScenarioConfig::num_primaries)
      .def_readonly("subcarriers", &ScenarioConfig::num_subcarriers)
      .def_readonly("total_power_w", &ScenarioConfig::total_power_w)
      .def_readonly("ber_target", &ScenarioConfig::ber_target)
      .def_readonly("seed", &ScenarioConfig::rng_seed)
      .def("__eq__", [](const ScenarioConfig& a, const ScenarioConfig& b) { return a == b; })
      .def("__repr__", [](const ScenarioConfig& c) {
        return "<Config fingerprint=" + std::to_string(config_fingerprint(c)) + ">";
      });

  m.def("config_keys", &config_keys);

  py::class_<SinrDistribution>(m, "SinrDistribution")
      .def("cdf", [](const SinrDistribution& d, const Doubles& g) {
        return elementwise(g, [&](double x) { return d.cdf(x); });
      }, py::arg("gamma"))
      .def("pdf", [](const SinrDistribution& d, const Doubles& g) {
        return elementwise(g, [&](double x) { return d.pdf(x); });
      }, py::arg("gamma"))
      .def_property_readonly("switch_point", &SinrDistribution::switch_point);

  m.def("sinr_distribution", [](const ScenarioConfig& cfg, int user, int subcarrier, int prx) {
    return sinr_distribution(Scenario(cfg), user, subcarrier, prx);
  }, py::arg("config"), py::arg("user") = 0, py::arg("subcarrier") = 0, py::arg("prx") = 0);

  m.def("sample_sinr", [](const ScenarioConfig& cfg, std::size_t count, int user, int subcarrier, int prx,
                          unsigned threads) {
    std::vector<double> samples;
    {
      py::gil_scoped_release release;
      samples = sample_sinr_mc(Scenario(cfg), prx, user, subcarrier, count, threads).samples();
    }
    py::array_t<double> out(static_cast<py::ssize_t>(samples.size()));
    std::copy(samples.begin(), samples.end(), out.mutable_data());
    return out;
  }, py::arg("config"), py::arg("count"), py::arg("user") = 0, py::arg("subcarrier") = 0, py::arg("prx") = 0,
        py::arg("threads") = 0, "Sorted Monte Carlo samples of the reference SINR.");

  m.def("zeta_for_target", &zeta_for_target, py::arg("ber_target"));
  m.def("ber_exact", &ber_exact, py::arg("constellation"), py::arg("sinr"));
  m.def("ber_bound", &ber_bound, py::arg("constellation"), py::arg("effective_sinr"));
  m.def("discretize_rate", &discretize_rate, py::arg("constellation"));
  m.def("waterfill_power", &waterfill_power, py::arg("gamma"), py::arg("density"), py::arg("mu"), py::arg("eta"),
        py::arg("cross_weight"), py::arg("zeta"), py::arg("reference_power"));
  m.def("surrogate_budget", py::overload_cast<double, double, int>(&surrogate_budget), py::arg("limit_w"),
        py::arg("epsilon"), py::arg("subcarriers"));
  m.def("central_tail_approx", [](const std::vector<double>& weights, const std::vector<double>& xi_means,
                                  double threshold) {
    return central_tail_approx(composite_chisq(weights, xi_means), threshold);
  }, py::arg("weights"), py::arg("xi_means"), py::arg("threshold"));

  m.def("run", [](const ScenarioConfig& cfg, std::size_t states, unsigned threads, int max_iterations) {
    EvaluationReport r;
    {
      py::gil_scoped_release release;
      r = run_experiment(cfg, harness_options(states, threads, max_iterations));
    }
    return report_dict(r);
  }, py::arg("config"), py::arg("states") = 2000, py::arg("threads") = 0, py::arg("max_iterations") = 500);

  m.def("sweep", [](const ScenarioConfig& cfg, const std::string& axis, const std::vector<double>& values,
                    std::size_t states, unsigned threads) {
    const auto opt = harness_options(states, threads, 500);
    SweepResult result;
    {
      py::gil_scoped_release release;
      result = sweep(cfg, parse_axis(axis), values, opt);
    }
    std::ostringstream csv, json;
    write_report_csv(csv, result);
    write_report_json(json, result, opt);
    py::list points;
    for (const auto& p : result.points) {
      auto d = report_dict(p.report);
      d["value"] = p.value;
      d["plateau"] = p.plateau;
      points.append(d);
    }
    py::dict out;
    out["axis"] = std::string(to_string(result.axis));
    out["plateau"] = result.plateau;
    out["points"] = points;
    out["csv"] = csv.str();
    out["json"] = json.str();
    return out;
  }, py::arg("config"), py::arg("axis"), py::arg("values"), py::arg("states") = 2000, py::arg("threads") = 0);

  m.def("selftest", [](unsigned threads) {
    std::ostringstream out;
    bool ok;
    {
      py::gil_scoped_release release;
      ok = run_selftest(out, threads);
    }
    return py::make_tuple(ok, out.str());
  }, py::arg("threads") = 0);
}
