#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "crnalloc/allocation.hpp"
#include "crnalloc/interference.hpp"
#include "crnalloc/scenario.hpp"
#include "crnalloc/sinr.hpp"

namespace crnalloc {

/// [f / (ln2 (mu f + eta w)) - P_ref / (zeta gamma)]^+
///
/// gamma is the reference SINR, f its density at gamma, w the cross weight
/// (|Hsp|^2, or alpha_k under the probabilistic surrogate). Throws
/// DegenerateError when mu = eta = 0.
double waterfill_power(double gamma, double density, double mu, double eta, double cross_weight, double zeta,
                       double reference_power);

/// f [x / (ln2 (1 + x)) + log2(1 + x)] with x = zeta gamma P / P_ref.
double selection_metric(double gamma, double density, double power, double zeta, double reference_power);

/// Column-wise argmax; ties go to the lowest user index.
Matrix<std::uint8_t> assign_subcarriers(const Matrix<double>& metric);

/// One channel realization prepared for the per-state subproblem: reference
/// SINRs, their densities, cross weights and interference budgets.
class StateProblem {
 public:
  StateProblem(const Scenario& scenario, const ChannelRealization& real);

  int users() const noexcept { return users_; }
  int subcarriers() const noexcept { return carriers_; }
  int primaries() const noexcept { return primaries_; }
  double zeta() const noexcept { return zeta_; }

  /// min(P_t/K, budget_m / N_m) over the binding PRx.
  double reference_power() const noexcept { return reference_power_; }
  int reference_prx() const noexcept { return reference_prx_; }
  double sinr(int n, int k) const { return sinr_(static_cast<std::size_t>(n), static_cast<std::size_t>(k)); }
  double density(int n, int k) const { return density_(static_cast<std::size_t>(n), static_cast<std::size_t>(k)); }
  /// |Hss|^2 / sigma^2.
  double unit_sinr(int n, int k) const { return unit_sinr_(static_cast<std::size_t>(n), static_cast<std::size_t>(k)); }
  double cross_weight(int m, int k) const { return weight_(static_cast<std::size_t>(m), static_cast<std::size_t>(k)); }
  /// I_th[m] (deterministic) or the surrogate budget (probabilistic).
  double budget(int m) const { return budget_.at(static_cast<std::size_t>(m)); }
  const std::optional<PosteriorCrossStats>& posterior() const noexcept { return posterior_; }

  /// Constraint loads sum_k w[m,k] p_k of the allocation induced by (mu, eta).
  /// Infinite when mu and every eta are 0.
  void loads(double mu, std::span<const double> eta, std::span<double> out) const;

  /// Power, assignment and continuous constellations induced by (mu, eta).
  AllocationPolicy allocate(double mu, std::span<const double> eta) const;

  struct Summary {
    double power = 0.0;       // sum phi P
    double ase = 0.0;         // sum phi log2(1 + zeta g P)
    double lagrangian = 0.0;  // sum phi (log2(1 + zeta g P) - mu P)
  };
  Summary summarize(double mu, std::span<const double> eta) const;

 private:
  template <typename Visit>
  void solve_columns(double mu, std::span<const double> eta, Visit&& visit) const;

  int users_;
  int carriers_;
  int primaries_;
  double zeta_;
  double reference_power_;
  int reference_prx_;
  Matrix<double> sinr_;
  Matrix<double> density_;
  Matrix<double> unit_sinr_;
  Matrix<double> weight_;
  std::vector<double> budget_;
  std::optional<PosteriorCrossStats> posterior_;
};

/// Per-state interference multipliers for a fixed mu: 0 where the
/// unconstrained allocation already fits, otherwise the smallest value that
/// makes the budget tight. `warm` seeds the bracket search. Throws
/// InfeasibleError if 60 doublings of the bracket do not reach feasibility.
std::vector<double> inner_interference_multiplier(const StateProblem& state, double mu,
                                                  std::span<const double> warm = {});

struct SolverOptions {
  int max_iterations = 500;
  /// Stop when |E{sum phi P} - P_t| <= tolerance * P_t.
  double tolerance = 1e-3;
  /// Step a / (b + t); a defaults to b * mu0 / P_t with mu0 = K / (ln2 P_t).
  double step_offset = 10.0;
  std::optional<double> step_scale;
  std::optional<double> initial_mu;
  /// Keep iterating after convergence up to max_iterations (for traces).
  bool run_all_iterations = false;
  unsigned threads = 0;
};

struct TraceRow {
  int iter = 0;
  double mu = 0.0;
  double primal_ase = 0.0;
  double dual_value = 0.0;
  double power_gap = 0.0;
};

struct DualState {
  double mu = 0.0;
  std::vector<std::vector<double>> eta;  // per state, per PRx
  int iterations = 0;
  bool converged = false;
  std::vector<TraceRow> trace;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<TraceRow> trace)
      : Error(ErrorKind::convergence, what), trace_(std::move(trace)) {}
  const std::vector<TraceRow>& trace() const noexcept { return trace_; }

 private:
  std::vector<TraceRow> trace_;
};

struct DualSolution {
  std::vector<AllocationPolicy> policies;
  std::vector<double> state_ase;    // sum_k log2 M (bits in discrete mode)
  std::vector<double> state_power;  // sum phi P
  std::vector<std::vector<double>> state_load;  // constraint load per PRx
  DualState dual;
  double ase = 0.0;
  double ase_stderr = 0.0;
  double avg_power = 0.0;
};

/// Dual decomposition over sampled states: projected subgradient on mu,
/// per-state bisection on eta, water-filling and argmax assignment inside.
/// Throws ConvergenceError (with the trace) after max_iterations.
DualSolution solve_dual(const Scenario& scenario, std::span<const ChannelRealization> states,
                        const SolverOptions& options = {});

/// iter,mu,primal_ase,dual_value,power_gap
void write_trace_csv(std::ostream& out, std::span<const TraceRow> trace);

/// Single-link expectation evaluated on the density instead of samples:
/// 200-point log-spaced grid over gamma, water level fixed by the per-link
/// power budget. Valid when the interference constraint is inactive.
struct QuadratureSolution {
  double mu = 0.0;
  double ase = 0.0;
  double power = 0.0;
};
QuadratureSolution single_link_quadrature(const SinrDistribution& dist, double zeta, double power_budget,
                                          double reference_power);

}  // namespace crnalloc
