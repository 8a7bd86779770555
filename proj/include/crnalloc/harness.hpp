#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crnalloc/interference.hpp"
#include "crnalloc/optimizer.hpp"
#include "crnalloc/scenario.hpp"

namespace crnalloc {

struct HarnessOptions {
  std::size_t num_states = 2000;
  /// States whose allocations are resampled for the collision audit
  /// (probabilistic mode only).
  std::size_t audit_states = 20;
  std::size_t audit_samples = 10000;
  SolverOptions solver;
};

/// Instantaneous interference at one PRx over all states, true cross links.
struct InterferenceStats {
  double mean = 0.0;
  double max = 0.0;
  double violation_rate = 0.0;  // fraction of states above I_th
};

struct EvaluationReport {
  ScenarioConfig config;
  std::uint64_t fingerprint = 0;
  std::size_t num_states = 0;
  double ase = 0.0;                 // sum over subcarriers, bits per channel use
  double ase_per_subcarrier = 0.0;
  double ase_stderr = 0.0;
  double avg_power_used = 0.0;
  std::vector<InterferenceStats> interference;  // per PRx
  /// Probabilistic mode: audit_probabilistic pooled over the audited states.
  /// Deterministic mode: the violation rate, with its binomial standard error.
  std::vector<CollisionEstimate> collision;
  int iterations = 0;
  bool converged = false;
  std::vector<TraceRow> trace;

  double max_interference() const;
  double max_collision() const;
};

/// Samples num_states realizations (streams 0..num_states-1), solves the
/// dual problem, evaluates ASE and audits interference. Deterministic in
/// (config, options). Requires num_states >= 100.
EvaluationReport run_experiment(const ScenarioConfig& config, const HarnessOptions& options = {});

enum class SweepAxis { ith, pt, eps, xi, k };

/// "ith", "pt", "eps", "xi", "k". Throws ConfigError otherwise.
SweepAxis parse_axis(std::string_view name);
std::string_view to_string(SweepAxis axis);

/// Copy of `base` with the swept parameter set to `value`.
ScenarioConfig with_axis_value(const ScenarioConfig& base, SweepAxis axis, double value);

struct SweepPoint {
  double value = 0.0;
  EvaluationReport report;
  bool plateau = false;  // ASE gain over the previous point below 1%
};

struct SweepResult {
  SweepAxis axis = SweepAxis::ith;
  std::vector<SweepPoint> points;
  /// The final step's gain was below 1%.
  bool plateau = false;
};

/// One report per value, all sharing the base seed. Values must be nonempty
/// and strictly increasing.
SweepResult sweep(const ScenarioConfig& base, SweepAxis axis, std::span<const double> values,
                  const HarnessOptions& options = {});

/// axis_value,ase,ase_stderr,power_used,max_interf,collision,epsilon
void write_report_csv(std::ostream& out, const SweepResult& result);
/// JSON sidecar: fingerprint, canonical config and per-point details.
void write_report_json(std::ostream& out, const SweepResult& result, const HarnessOptions& options);

/// Single experiment viewed as a one-point sweep of `axis` at the config's own value.
SweepResult as_sweep(EvaluationReport report, SweepAxis axis = SweepAxis::ith);
double axis_value(const ScenarioConfig& config, SweepAxis axis);

}  // namespace crnalloc
