#include "crnalloc/harness.hpp"

#include <cmath>
#include <iomanip>
#include "json.hpp"
#include <ostream>
#include <sstream>

#include "crnalloc/config.hpp"
#include "crnalloc/csv.hpp"
#include "crnalloc/parallel.hpp"

namespace crnalloc {
namespace {

constexpr double kPlateauGain = 0.01;

std::string hex(std::uint64_t v) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << v;
  return out.str();
}

}  // namespace

double EvaluationReport::max_interference() const {
  double out = 0.0;
  for (const auto& s : interference) out = std::max(out, s.max);
  return out;
}

double EvaluationReport::max_collision() const {
  double out = 0.0;
  for (const auto& c : collision) out = std::max(out, c.probability);
  return out;
}

EvaluationReport run_experiment(const ScenarioConfig& config, const HarnessOptions& options) {
  if (options.num_states < 100) throw ConfigError("at least 100 states are needed for expectation estimates");
  const Scenario scenario(config);
  const std::size_t count = options.num_states;
  const auto prx = static_cast<std::size_t>(scenario.primaries());

  std::vector<ChannelRealization> states(count);
  parallel_for(count, options.solver.threads, [&](std::size_t s) { states[s] = sample_realization(scenario, s); });
  const auto sol = solve_dual(scenario, states, options.solver);

  EvaluationReport report;
  report.config = config;
  report.fingerprint = config_fingerprint(config);
  report.num_states = count;
  report.ase = sol.ase;
  report.ase_per_subcarrier = sol.ase / scenario.subcarriers();
  report.ase_stderr = sol.ase_stderr;
  report.avg_power_used = sol.avg_power;
  report.iterations = sol.dual.iterations;
  report.converged = sol.dual.converged;
  report.trace = sol.dual.trace;

  std::vector<InterferenceAudit> audits(count);
  parallel_for(count, options.solver.threads,
               [&](std::size_t s) { audits[s] = audit_deterministic(sol.policies[s], states[s], scenario); });
  report.interference.resize(prx);
  for (std::size_t m = 0; m < prx; ++m) {
    auto& st = report.interference[m];
    std::size_t violations = 0;
    for (const auto& a : audits) {
      st.mean += a.interference_w[m];
      st.max = std::max(st.max, a.interference_w[m]);
      violations += a.violated[m] ? 1 : 0;
    }
    st.mean /= static_cast<double>(count);
    st.violation_rate = static_cast<double>(violations) / static_cast<double>(count);
  }

  report.collision.resize(prx);
  if (config.constraint_mode == ConstraintMode::probabilistic && scenario.total_power() > 0.0) {
    const std::size_t audited = std::min(options.audit_states, count);
    std::vector<std::vector<CollisionEstimate>> per_state(audited);
    for (std::size_t s = 0; s < audited; ++s) {
      const auto post = posterior_stats(scenario, states[s].cross_est);
      per_state[s] = audit_probabilistic(sol.policies[s], post, scenario, options.audit_samples, s, options.solver.threads);
    }
    for (std::size_t m = 0; m < prx; ++m) {
      double p = 0.0;
      for (const auto& est : per_state) p += est[m].probability;
      p /= static_cast<double>(std::max<std::size_t>(audited, 1));
      const double draws = static_cast<double>(audited * options.audit_samples);
      report.collision[m] = {p, draws > 0.0 ? std::sqrt(p * (1.0 - p) / draws) : 0.0};
    }
  } else {
    for (std::size_t m = 0; m < prx; ++m) {
      const double p = report.interference[m].violation_rate;
      report.collision[m] = {p, std::sqrt(p * (1.0 - p) / static_cast<double>(count))};
    }
  }
  return report;
}

SweepAxis parse_axis(std::string_view name) {
  if (name == "ith") return SweepAxis::ith;
  if (name == "pt") return SweepAxis::pt;
  if (name == "eps") return SweepAxis::eps;
  if (name == "xi") return SweepAxis::xi;
  if (name == "k") return SweepAxis::k;
  throw ConfigError("unknown sweep axis '" + std::string(name) + "' (expected ith|pt|eps|xi|k)");
}

std::string_view to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::ith: return "ith";
    case SweepAxis::pt: return "pt";
    case SweepAxis::eps: return "eps";
    case SweepAxis::xi: return "xi";
    case SweepAxis::k: return "k";
  }
  return "ith";
}

ScenarioConfig with_axis_value(const ScenarioConfig& base, SweepAxis axis, double value) {
  ScenarioConfig cfg = base;
  switch (axis) {
    case SweepAxis::ith: cfg.interference_limits_w = {value}; break;
    case SweepAxis::pt: cfg.total_power_w = value; break;
    case SweepAxis::eps: cfg.collision_limits = {value}; break;
    case SweepAxis::xi: cfg.ber_target = value; break;
    case SweepAxis::k:
      if (value != std::floor(value) || value < 1.0) throw ConfigError("subcarrier sweep values must be positive integers");
      cfg.num_subcarriers = static_cast<int>(value);
      break;
  }
  return cfg;
}

double axis_value(const ScenarioConfig& config, SweepAxis axis) {
  switch (axis) {
    case SweepAxis::ith: return config.interference_limits_w.empty() ? 0.0 : config.interference_limits_w.front();
    case SweepAxis::pt: return config.total_power_w;
    case SweepAxis::eps: return config.collision_limits.empty() ? 0.0 : config.collision_limits.front();
    case SweepAxis::xi: return config.ber_target;
    case SweepAxis::k: return config.num_subcarriers;
  }
  return 0.0;
}

SweepResult sweep(const ScenarioConfig& base, SweepAxis axis, std::span<const double> values,
                  const HarnessOptions& options) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (!(values[i] > values[i - 1])) throw ConfigError("sweep values must be strictly increasing");
  }
  SweepResult result;
  result.axis = axis;
  for (double v : values) {
    SweepPoint point;
    point.value = v;
    point.report = run_experiment(with_axis_value(base, axis, v), options);
    if (!result.points.empty()) {
      const double prev = result.points.back().report.ase;
      point.plateau = prev > 0.0 && (point.report.ase - prev) / prev < kPlateauGain;
    }
    result.points.push_back(std::move(point));
  }
  result.plateau = result.points.back().plateau;
  return result;
}

SweepResult as_sweep(EvaluationReport report, SweepAxis axis) {
  SweepResult result;
  result.axis = axis;
  SweepPoint point;
  point.value = axis_value(report.config, axis);
  point.report = std::move(report);
  result.points.push_back(std::move(point));
  return result;
}

void write_report_csv(std::ostream& out, const SweepResult& result) {
  out << "axis_value,ase,ase_stderr,power_used,max_interf,collision,epsilon\n";
  for (const auto& p : result.points) {
    const auto& r = p.report;
    double eps = 0.0;
    for (double e : r.config.collision_limits) eps = std::max(eps, e);
    out << format_number(p.value) << ',' << format_number(r.ase) << ',' << format_number(r.ase_stderr) << ','
        << format_number(r.avg_power_used) << ',' << format_number(r.max_interference()) << ','
        << format_number(r.max_collision()) << ',' << format_number(eps) << '\n';
  }
}

void write_report_json(std::ostream& out, const SweepResult& result, const HarnessOptions& options) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["axis"] = std::string(to_string(result.axis));
  doc["num_states"] = options.num_states;
  doc["audit_states"] = options.audit_states;
  doc["audit_samples"] = options.audit_samples;
  doc["plateau"] = result.plateau;
  ordered_json points = ordered_json::array();
  for (const auto& p : result.points) {
    const auto& r = p.report;
    ordered_json config = ordered_json::object();
    std::istringstream lines(to_config_text(r.config));
    for (std::string line; std::getline(lines, line);) {
      const auto eq = line.find(" = ");
      config[line.substr(0, eq)] = line.substr(eq + 3);
    }
    ordered_json interference = ordered_json::array();
    for (std::size_t m = 0; m < r.interference.size(); ++m) {
      interference.push_back({{"prx", m},
                              {"mean_w", r.interference[m].mean},
                              {"max_w", r.interference[m].max},
                              {"violation_rate", r.interference[m].violation_rate},
                              {"collision", r.collision[m].probability},
                              {"collision_stderr", r.collision[m].standard_error}});
    }
    points.push_back({{"axis_value", p.value},
                      {"fingerprint", hex(r.fingerprint)},
                      {"seed", r.config.rng_seed},
                      {"ase", r.ase},
                      {"ase_per_subcarrier", r.ase_per_subcarrier},
                      {"ase_stderr", r.ase_stderr},
                      {"power_used", r.avg_power_used},
                      {"iterations", r.iterations},
                      {"converged", r.converged},
                      {"plateau", p.plateau},
                      {"interference", interference},
                      {"config", config}});
  }
  doc["points"] = points;
  out << doc.dump(2) << '\n';
}

}  // namespace crnalloc
