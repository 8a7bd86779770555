#include "crnalloc/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

#include "crnalloc/csv.hpp"
#include "crnalloc/modulation.hpp"
#include "crnalloc/parallel.hpp"

namespace crnalloc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxDoublings = 60;
constexpr int kMaxBisections = 300;

// f / (ln2 (mu f + price)); infinite when nothing prices the power.
double water_level(double density, double mu, double price) {
  if (price > 0.0) {
    if (!(density > 0.0)) return 0.0;
    return 1.0 / (std::numbers::ln2 * (mu + price / density));
  }
  if (mu <= 0.0) return kInf;
  return 1.0 / (std::numbers::ln2 * mu);
}

double metric_from_ratio(double density, double x) {
  if (!(x > 0.0)) return 0.0;
  return density * (x / (std::numbers::ln2 * (1.0 + x)) + std::log1p(x) / std::numbers::ln2);
}

// Smallest eta with load(eta) <= budget, to within the bisection tolerance.
template <typename Load>
double smallest_feasible(Load&& load, double budget, double warm) {
  if (load(0.0) <= budget) return 0.0;
  double lo = 0.0;
  double hi = warm > 0.0 ? warm : 1.0;
  double hi_load = load(hi);
  if (hi_load > budget) {
    int doublings = 0;
    while (hi_load > budget) {
      if (++doublings > kMaxDoublings) {
        throw InfeasibleError("interference budget unreachable after 60 doublings of the multiplier bracket");
      }
      lo = hi;
      hi *= 2.0;
      hi_load = load(hi);
    }
  } else if (warm > 0.0) {
    for (int halvings = 0; halvings < kMaxDoublings; ++halvings) {
      const double cand = 0.5 * hi;
      const double cand_load = load(cand);
      if (cand_load > budget) {
        lo = cand;
        break;
      }
      hi = cand;
      hi_load = cand_load;
    }
  }
  for (int it = 0; it < kMaxBisections; ++it) {
    if (hi_load >= budget * (1.0 - 1e-9)) break;
    if (hi - lo <= 1e-14 * hi) break;
    const double mid = 0.5 * (lo + hi);
    const double mid_load = load(mid);
    if (mid_load > budget) {
      lo = mid;
    } else {
      hi = mid;
      hi_load = mid_load;
    }
  }
  return hi;
}

double mean_of(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return v.empty() ? 0.0 : sum / static_cast<double>(v.size());
}

}  // namespace

double waterfill_power(double gamma, double density, double mu, double eta, double cross_weight, double zeta,
                       double reference_power) {
  if (mu == 0.0 && eta == 0.0) throw DegenerateError("mu = eta = 0 leaves the transmit power unbounded");
  if (!(reference_power > 0.0)) throw DomainError("reference power must be > 0");
  if (!(gamma > 0.0)) return 0.0;
  const double water = water_level(density, mu, eta * cross_weight);
  return std::max(0.0, water - reference_power / (zeta * gamma));
}

double selection_metric(double gamma, double density, double power, double zeta, double reference_power) {
  if (!(reference_power > 0.0)) throw DomainError("reference power must be > 0");
  return metric_from_ratio(density, zeta * gamma * power / reference_power);
}

Matrix<std::uint8_t> assign_subcarriers(const Matrix<double>& metric) {
  Matrix<std::uint8_t> phi(metric.rows(), metric.cols(), 0);
  if (metric.rows() == 0) return phi;
  for (std::size_t k = 0; k < metric.cols(); ++k) {
    std::size_t best = 0;
    for (std::size_t n = 1; n < metric.rows(); ++n) {
      if (metric(n, k) > metric(best, k)) best = n;
    }
    phi(best, k) = 1;
  }
  return phi;
}

StateProblem::StateProblem(const Scenario& scenario, const ChannelRealization& real)
    : users_(scenario.users()),
      carriers_(scenario.subcarriers()),
      primaries_(scenario.primaries()),
      zeta_(scenario.zeta()) {
  if (!(scenario.total_power() > 0.0)) throw DomainError("state subproblem needs P_t > 0");
  const auto& cfg = scenario.config();
  const auto users = static_cast<std::size_t>(users_);
  const auto carriers = static_cast<std::size_t>(carriers_);
  const auto prx = static_cast<std::size_t>(primaries_);
  weight_ = Matrix<double>(prx, carriers);
  budget_.resize(prx);
  std::vector<double> aggregate(prx, 0.0);

  if (cfg.constraint_mode == ConstraintMode::deterministic) {
    for (std::size_t m = 0; m < prx; ++m) {
      budget_[m] = scenario.interference_limit(static_cast<int>(m));
      for (std::size_t k = 0; k < carriers; ++k) {
        weight_(m, k) = std::norm(real.cross_est(m, k));
        aggregate[m] += weight_(m, k);
      }
    }
  } else {
    posterior_ = posterior_stats(scenario, real.cross_est);
    for (std::size_t m = 0; m < prx; ++m) {
      const auto surrogate = surrogate_for(scenario, *posterior_, static_cast<int>(m));
      budget_[m] = surrogate.budget;
      for (std::size_t k = 0; k < carriers; ++k) {
        weight_(m, k) = surrogate.alpha[k];
        // alpha_k = |posterior mean|^2 + 2 var, so this sums to the posterior mean of N.
        aggregate[m] += surrogate.alpha[k];
      }
    }
  }

  const double cap = scenario.total_power() / carriers_;
  reference_prx_ = 0;
  double best_ratio = kInf;
  for (std::size_t m = 0; m < prx; ++m) {
    const double ratio = aggregate[m] > 0.0 ? budget_[m] / aggregate[m] : kInf;
    if (ratio < best_ratio) {
      best_ratio = ratio;
      reference_prx_ = static_cast<int>(m);
    }
  }
  reference_power_ = std::min(cap, best_ratio);

  AggregateGainParams agg;
  if (posterior_) {
    const auto row = posterior_->mean.row(static_cast<std::size_t>(reference_prx_));
    const std::vector<double> vars(carriers, posterior_->variance);
    agg = aggregate_gain_params(row, vars);
  } else {
    agg = aggregate_gain_params(scenario, reference_prx_);
  }

  const double noise = scenario.noise_w();
  sinr_ = Matrix<double>(users, carriers);
  density_ = Matrix<double>(users, carriers);
  unit_sinr_ = Matrix<double>(users, carriers);
  for (std::size_t n = 0; n < users; ++n) {
    for (std::size_t k = 0; k < carriers; ++k) {
      const SinrDistribution dist(scenario.direct_means()(n, k), agg, noise, scenario.total_power(),
                                  budget_[static_cast<std::size_t>(reference_prx_)], carriers_);
      unit_sinr_(n, k) = real.direct_power(n, k) / noise;
      sinr_(n, k) = unit_sinr_(n, k) * reference_power_;
      density_(n, k) = dist.pdf(sinr_(n, k));
    }
  }
}

template <typename Visit>
void StateProblem::solve_columns(double mu, std::span<const double> eta, Visit&& visit) const {
  const auto users = static_cast<std::size_t>(users_);
  const auto carriers = static_cast<std::size_t>(carriers_);
  const auto prx = static_cast<std::size_t>(primaries_);
  for (std::size_t k = 0; k < carriers; ++k) {
    double price = 0.0;
    for (std::size_t m = 0; m < prx; ++m) price += eta[m] * weight_(m, k);
    std::size_t best = 0;
    double best_metric = -1.0;
    double best_power = 0.0;
    double best_ratio = 0.0;
    for (std::size_t n = 0; n < users; ++n) {
      const double zg = zeta_ * unit_sinr_(n, k);
      double power = 0.0;
      if (zg > 0.0) power = std::max(0.0, water_level(density_(n, k), mu, price) - 1.0 / zg);
      const double ratio = zg * power;
      const double metric = std::isinf(power) ? kInf : metric_from_ratio(density_(n, k), ratio);
      if (metric > best_metric) {
        best = n;
        best_metric = metric;
        best_power = power;
        best_ratio = ratio;
      }
    }
    visit(k, best, best_power, best_ratio);
  }
}

void StateProblem::loads(double mu, std::span<const double> eta, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  solve_columns(mu, eta, [&](std::size_t k, std::size_t, double power, double) {
    if (power <= 0.0) return;
    for (std::size_t m = 0; m < out.size(); ++m) out[m] += weight_(m, k) * power;
  });
}

AllocationPolicy StateProblem::allocate(double mu, std::span<const double> eta) const {
  AllocationPolicy policy(static_cast<std::size_t>(users_), static_cast<std::size_t>(carriers_));
  solve_columns(mu, eta, [&](std::size_t k, std::size_t n, double power, double ratio) {
    policy.phi(n, k) = 1;
    policy.power(n, k) = power;
    policy.constellation(n, k) = 1.0 + ratio;
  });
  return policy;
}

StateProblem::Summary StateProblem::summarize(double mu, std::span<const double> eta) const {
  Summary s;
  solve_columns(mu, eta, [&](std::size_t, std::size_t, double power, double ratio) {
    const double bits = std::log2(1.0 + ratio);
    s.power += power;
    s.ase += bits;
    s.lagrangian += bits - mu * power;
  });
  return s;
}

std::vector<double> inner_interference_multiplier(const StateProblem& state, double mu, std::span<const double> warm) {
  const auto prx = static_cast<std::size_t>(state.primaries());
  std::vector<double> eta(prx, 0.0);
  if (!warm.empty()) {
    if (warm.size() != prx) throw ShapeError("warm start needs one multiplier per PRx");
    eta.assign(warm.begin(), warm.end());
  }
  std::vector<double> load(prx);

  if (prx == 1) {
    const double budget = state.budget(0);
    eta[0] = smallest_feasible(
        [&](double e) {
          const double trial[1] = {e};
          state.loads(mu, trial, load);
          return load[0];
        },
        budget, eta[0]);
    return eta;
  }

  auto feasible = [&] {
    state.loads(mu, eta, load);
    for (std::size_t m = 0; m < prx; ++m)
      if (load[m] > state.budget(static_cast<int>(m)) * (1.0 + 1e-9)) return false;
    return true;
  };

  // Cyclic coordinate search: each multiplier in turn becomes the smallest
  // value meeting its own budget with the others held fixed.
  std::vector<double> trial(prx);
  for (int round = 0; round < 200; ++round) {
    double largest_change = 0.0;
    for (std::size_t m = 0; m < prx; ++m) {
      const double before = eta[m];
      trial = eta;
      eta[m] = smallest_feasible(
          [&](double e) {
            trial[m] = e;
            state.loads(mu, trial, load);
            return load[m];
          },
          state.budget(static_cast<int>(m)), before);
      largest_change = std::max(largest_change, std::abs(eta[m] - before) / std::max({eta[m], before, 1e-300}));
    }
    if (largest_change <= 1e-9 || (largest_change <= 1e-6 && feasible())) break;
  }

  // Raise-only passes: lowering one multiplier can push another PRx over its
  // budget, so finish by increasing the violated ones.
  for (int pass = 0; pass < 50 && !feasible(); ++pass) {
    for (std::size_t m = 0; m < prx; ++m) {
      const double floor = eta[m];
      trial = eta;
      eta[m] = floor + smallest_feasible(
                           [&](double e) {
                             trial[m] = floor + e;
                             state.loads(mu, trial, load);
                             return load[m];
                           },
                           state.budget(static_cast<int>(m)), 0.0);
    }
  }
  if (!feasible()) throw InfeasibleError("coordinate multiplier search did not meet every PRx budget");
  return eta;
}

DualSolution solve_dual(const Scenario& scenario, std::span<const ChannelRealization> states,
                        const SolverOptions& options) {
  if (states.empty()) throw DomainError("solve_dual needs at least one state");
  const std::size_t count = states.size();
  const auto prx = static_cast<std::size_t>(scenario.primaries());
  const auto users = static_cast<std::size_t>(scenario.users());
  const auto carriers = static_cast<std::size_t>(scenario.subcarriers());
  const double total_power = scenario.total_power();
  const bool discrete = scenario.config().rate_mode == RateMode::discrete;

  DualSolution sol;
  sol.dual.eta.assign(count, std::vector<double>(prx, 0.0));
  sol.state_ase.assign(count, 0.0);
  sol.state_power.assign(count, 0.0);
  sol.state_load.assign(count, std::vector<double>(prx, 0.0));

  if (total_power == 0.0) {
    // Silent transmitter: everything stays at zero.
    sol.policies.assign(count, AllocationPolicy(users, carriers));
    for (auto& p : sol.policies)
      for (std::size_t k = 0; k < carriers; ++k) p.phi(0, k) = 1;
    sol.dual.converged = true;
    return sol;
  }

  std::vector<std::optional<StateProblem>> problems(count);
  parallel_for(count, options.threads, [&](std::size_t s) { problems[s].emplace(scenario, states[s]); });

  const double b = options.step_offset;
  const double mu0 = options.initial_mu.value_or(static_cast<double>(carriers) / (std::numbers::ln2 * total_power));
  const double a = options.step_scale.value_or(b * mu0 / total_power);
  double mu = mu0;

  std::vector<double> power(count), ase(count), lagrangian(count);
  for (int t = 0; t < options.max_iterations; ++t) {
    parallel_for(count, options.threads, [&](std::size_t s) {
      auto& eta = sol.dual.eta[s];
      eta = inner_interference_multiplier(*problems[s], mu, eta);
      const auto summary = problems[s]->summarize(mu, eta);
      power[s] = summary.power;
      ase[s] = summary.ase;
      lagrangian[s] = summary.lagrangian;
    });
    const double avg_power = mean_of(power);
    const double gap = avg_power - total_power;
    sol.dual.trace.push_back({t, mu, mean_of(ase), mean_of(lagrangian) + mu * total_power, gap});
    sol.dual.iterations = t + 1;
    sol.dual.mu = mu;
    sol.dual.converged = std::abs(gap) <= options.tolerance * total_power || (mu == 0.0 && gap <= 0.0);
    if (sol.dual.converged && !options.run_all_iterations) break;
    if (t + 1 == options.max_iterations) break;
    mu = std::max(0.0, mu + a / (b + t) * gap);
  }
  if (!sol.dual.converged) {
    throw ConvergenceError("average-power multiplier did not converge in " + std::to_string(options.max_iterations) +
                               " iterations",
                           sol.dual.trace);
  }

  sol.policies.resize(count);
  parallel_for(count, options.threads, [&](std::size_t s) {
    auto policy = problems[s]->allocate(mu, sol.dual.eta[s]);
    double bits_total = 0.0;
    for (std::size_t n = 0; n < users; ++n) {
      for (std::size_t k = 0; k < carriers; ++k) {
        if (!policy.phi(n, k)) continue;
        if (discrete) {
          const int bits = discretize_rate(policy.constellation(n, k));
          policy.constellation(n, k) = std::ldexp(1.0, bits);
          if (bits == 0) policy.power(n, k) = 0.0;
          bits_total += bits;
        } else {
          bits_total += std::log2(policy.constellation(n, k));
        }
      }
    }
    const auto per_carrier = policy.subcarrier_power();
    double p_sum = 0.0;
    for (std::size_t k = 0; k < carriers; ++k) {
      p_sum += per_carrier[k];
      for (std::size_t m = 0; m < prx; ++m) {
        sol.state_load[s][m] += problems[s]->cross_weight(static_cast<int>(m), static_cast<int>(k)) * per_carrier[k];
      }
    }
    sol.state_ase[s] = bits_total;
    sol.state_power[s] = p_sum;
    sol.policies[s] = std::move(policy);
  });

  sol.ase = mean_of(sol.state_ase);
  sol.avg_power = mean_of(sol.state_power);
  double ss = 0.0;
  for (double v : sol.state_ase) ss += (v - sol.ase) * (v - sol.ase);
  sol.ase_stderr = count > 1 ? std::sqrt(ss / static_cast<double>(count - 1) / static_cast<double>(count)) : 0.0;
  return sol;
}

void write_trace_csv(std::ostream& out, std::span<const TraceRow> trace) {
  out << "iter,mu,primal_ase,dual_value,power_gap\n";
  for (const auto& r : trace) {
    out << r.iter << ',' << format_number(r.mu) << ',' << format_number(r.primal_ase) << ','
        << format_number(r.dual_value) << ',' << format_number(r.power_gap) << '\n';
  }
}

QuadratureSolution single_link_quadrature(const SinrDistribution& dist, double zeta, double power_budget,
                                          double reference_power) {
  if (!(power_budget > 0.0) || !(reference_power > 0.0)) throw DomainError("quadrature needs positive budgets");
  // Upper end where the tail mass is negligible, lower end six decades below.
  double hi = 1.0;
  while (1.0 - dist.cdf(hi) > 1e-10 && hi < 1e12) hi *= 2.0;
  const double lo = hi * 1e-6;
  constexpr int kPoints = 200;
  std::vector<double> gamma(kPoints), weight(kPoints);
  const double step = std::log(hi / lo) / (kPoints - 1);
  for (int i = 0; i < kPoints; ++i) {
    gamma[i] = lo * std::exp(step * i);
    const double trapezoid = (i == 0 || i == kPoints - 1) ? 0.5 * step : step;
    weight[i] = trapezoid * gamma[i] * dist.pdf(gamma[i]);
  }
  auto power_at = [&](double mu) {
    double sum = 0.0;
    for (int i = 0; i < kPoints; ++i) {
      sum += weight[i] * std::max(0.0, 1.0 / (std::numbers::ln2 * mu) - reference_power / (zeta * gamma[i]));
    }
    return sum;
  };
  double mu_lo = 1e-12, mu_hi = 1e12;
  for (int it = 0; it < 200; ++it) {
    const double mid = std::sqrt(mu_lo * mu_hi);
    if (power_at(mid) > power_budget) mu_lo = mid;
    else mu_hi = mid;
  }
  QuadratureSolution out;
  out.mu = mu_hi;
  out.power = power_at(mu_hi);
  for (int i = 0; i < kPoints; ++i) {
    out.ase += weight[i] * std::log2(std::max(1.0, zeta * gamma[i] / (std::numbers::ln2 * out.mu * reference_power)));
  }
  return out;
}

}  // namespace crnalloc
