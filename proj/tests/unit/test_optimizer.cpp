#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "crnalloc/harness.hpp"
#include "crnalloc/modulation.hpp"
#include "crnalloc/optimizer.hpp"
#include "doctest.h"

using namespace crnalloc;

namespace {

std::vector<ChannelRealization> draw_states(const Scenario& sc, std::size_t count) {
  std::vector<ChannelRealization> out;
  out.reserve(count);
  for (std::size_t s = 0; s < count; ++s) out.push_back(sample_realization(sc, s));
  return out;
}

// Pointwise Lagrangian of one (n, k) entry.
double entry_lagrangian(double p, double gamma, double f, double mu, double eta, double w, double zeta, double pref) {
  return f * std::log2(1.0 + zeta * gamma * p / pref) - mu * f * p - eta * w * p;
}

double state_interference(const StateProblem& st, const AllocationPolicy& a) {
  const auto pk = a.subcarrier_power();
  double sum = 0.0;
  for (int k = 0; k < st.subcarriers(); ++k) sum += st.cross_weight(0, k) * pk[static_cast<std::size_t>(k)];
  return sum;
}

}  // namespace

TEST_CASE("water-filling power") {
  CHECK(waterfill_power(1e-300, 1.0, 1.0, 0.0, 1.0, 0.4, 1.0) == 0.0);
  CHECK(waterfill_power(0.0, 1.0, 1.0, 0.0, 1.0, 0.4, 1.0) == 0.0);
  CHECK(waterfill_power(2.0, 1.0, 1.0 / std::numbers::ln2, 0.0, 0.0, 1.0, 1.0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(waterfill_power(2.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0), DegenerateError);
}

TEST_CASE("water-filling maximizes the pointwise Lagrangian") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double gamma = 50.0 * u(rng);
    const double f = 0.01 + u(rng);
    const double mu = 0.05 + u(rng);
    const double eta = u(rng) < 0.5 ? 0.0 : u(rng);
    const double w = 0.01 + u(rng);
    const double zeta = 0.26 + 0.2 * u(rng);
    const double pref = 0.1 + u(rng);
    const double p = waterfill_power(gamma, f, mu, eta, w, zeta, pref);
    const double best = entry_lagrangian(p, gamma, f, mu, eta, w, zeta, pref);
    double grid_best = -1e300;
    for (int j = 0; j <= 10000; ++j) {
      const double q = (10.0 / mu) * j / 10000.0;
      grid_best = std::max(grid_best, entry_lagrangian(q, gamma, f, mu, eta, w, zeta, pref));
    }
    CHECK(best >= grid_best - 1e-9 * std::max(1.0, std::abs(grid_best)));
  }
}

TEST_CASE("selection metric") {
  CHECK(selection_metric(5.0, 1.0, 0.0, 0.4, 1.0) == 0.0);
  CHECK(selection_metric(1.0, 1.0, 1.0, 1.0, 1.0) == doctest::Approx(1.72135).epsilon(1e-5));
  double prev = 0.0;
  for (int i = 1; i <= 1000; ++i) {
    const double v = selection_metric(3.0, 0.7, i * 0.01, 0.44, 0.5);
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("subcarrier assignment") {
  SUBCASE("single user takes everything") {
    Matrix<double> m(1, 5, 0.3);
    const auto phi = assign_subcarriers(m);
    for (std::size_t k = 0; k < 5; ++k) CHECK(phi(0, k) == 1);
  }
  SUBCASE("ties go to the lowest index") {
    Matrix<double> m(3, 1);
    m(0, 0) = 0.2;
    m(1, 0) = 0.9;
    m(2, 0) = 0.9;
    const auto phi = assign_subcarriers(m);
    CHECK(phi(0, 0) == 0);
    CHECK(phi(1, 0) == 1);
    CHECK(phi(2, 0) == 0);
  }
  SUBCASE("random metrics") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Matrix<double> m(4, 32);
    for (auto& v : m.values()) v = u(rng);
    const auto phi = assign_subcarriers(m);
    for (std::size_t k = 0; k < 32; ++k) {
      int count = 0;
      double best = 0.0, chosen = 0.0;
      for (std::size_t n = 0; n < 4; ++n) {
        count += phi(n, k);
        best = std::max(best, m(n, k));
        if (phi(n, k)) chosen = m(n, k);
      }
      CHECK(count == 1);
      CHECK(chosen == best);
    }
  }
}

TEST_CASE("inner interference multiplier") {
  SUBCASE("inactive constraint") {
    auto cfg = reference_scenario();
    cfg.interference_limits_w = {1e9};
    const Scenario sc(cfg);
    for (std::uint64_t s = 0; s < 10; ++s) {
      const StateProblem st(sc, sample_realization(sc, s));
      CHECK(inner_interference_multiplier(st, 1.0)[0] == 0.0);
    }
  }
  SUBCASE("half the unconstrained interference is met exactly") {
    const Scenario loose(reference_scenario());
    for (std::uint64_t s = 0; s < 10; ++s) {
      const auto real = sample_realization(loose, s);
      const double mu = 1.0;
      const StateProblem free_state(loose, real);
      const std::vector<double> zero{0.0};
      std::vector<double> load(1);
      free_state.loads(mu, zero, load);

      auto cfg = reference_scenario();
      cfg.interference_limits_w = {0.5 * load[0]};
      const Scenario tight(cfg);
      const StateProblem st(tight, real);
      const auto eta = inner_interference_multiplier(st, mu);
      CHECK(eta[0] > 0.0);
      const auto alloc = st.allocate(mu, eta);
      const double interference = audit_deterministic(alloc, real, tight).interference_w[0];
      CHECK(std::abs(interference - st.budget(0)) <= 1e-6 * st.budget(0));
    }
  }
  SUBCASE("vanishing budget silences the state") {
    auto cfg = reference_scenario();
    cfg.interference_limits_w = {1e-9};
    const Scenario sc(cfg);
    const auto real = sample_realization(sc, 2);
    const StateProblem st(sc, real);
    const auto eta = inner_interference_multiplier(st, 1.0);
    CHECK(std::isfinite(eta[0]));
    CHECK(eta[0] > 0.0);
    const auto alloc = st.allocate(1.0, eta);
    CHECK(alloc.total_power() <= 1e-9 / 1e-3);
    CHECK(state_interference(st, alloc) <= 1e-9 * (1.0 + 1e-6));
  }
  SUBCASE("several primary receivers") {
    auto cfg = reference_scenario();
    cfg.num_primaries = 3;
    cfg.interference_limits_w = {2.0, 3.0, 4.0};
    cfg.cross_mean = {0.2, 0.0};
    const Scenario sc(cfg);
    int slack_misses = 0;
    for (std::uint64_t s = 0; s < 200; ++s) {
      const StateProblem st(sc, sample_realization(sc, s));
      for (double mu : {0.05, 1.0}) {
        const auto eta = inner_interference_multiplier(st, mu);
        std::vector<double> load(3);
        st.loads(mu, eta, load);
        for (int m = 0; m < 3; ++m) {
          CHECK(load[m] <= st.budget(m) * (1.0 + 1e-9));
          if (eta[m] > 0.0 && load[m] < st.budget(m) * (1.0 - 1e-3)) ++slack_misses;
        }
      }
    }
    MESSAGE("positive multipliers with a slack budget: " << slack_misses);
    CHECK(slack_misses <= 6);
  }
}

TEST_CASE("single link without interference limit matches a grid search") {
  auto cfg = reference_scenario();
  cfg.num_users = 1;
  cfg.num_subcarriers = 1;
  cfg.interference_limits_w = {1e12};
  cfg.direct_means.kind = DirectGainSource::Kind::constant;
  cfg.direct_means.value = 1.0;
  cfg.total_power_w = 1.0;
  const Scenario sc(cfg);
  const auto states = draw_states(sc, 20000);
  const auto sol = solve_dual(sc, states);

  // Grid over the water level 1/(ln2 mu); keep the largest level within budget.
  const double zeta = sc.zeta();
  std::vector<double> g(states.size());
  for (std::size_t s = 0; s < states.size(); ++s) g[s] = states[s].direct_power(0, 0) / sc.noise_w();
  auto power_at = [&](double level) {
    double sum = 0.0;
    for (double x : g) sum += std::max(0.0, level - 1.0 / (zeta * x));
    return sum / static_cast<double>(g.size());
  };
  double best_level = 0.0;
  const double top = 20.0;
  for (int i = 1; i <= 100000; ++i) {
    const double level = top * i / 100000.0;
    if (power_at(level) <= cfg.total_power_w) best_level = level;
  }
  double ase = 0.0;
  for (double x : g) ase += std::log2(std::max(1.0, zeta * x * best_level));
  ase /= static_cast<double>(g.size());
  CHECK(sol.ase == doctest::Approx(ase).epsilon(0.01));

  // The density-based expectation agrees with the sampled one.
  const StateProblem st(sc, states[0]);
  const SinrDistribution dist(1.0, aggregate_gain_params(sc, 0), sc.noise_w(), 1.0, 1e12, 1);
  const auto quad = single_link_quadrature(dist, zeta, 1.0, st.reference_power());
  CHECK(quad.power == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(quad.ase == doctest::Approx(sol.ase).epsilon(0.01));
}

TEST_CASE("huge power budget leaves only the interference constraint") {
  auto cfg = reference_scenario();
  cfg.total_power_w = 1e6;
  const Scenario sc(cfg);
  const auto states = draw_states(sc, 300);
  const auto sol = solve_dual(sc, states);
  CHECK(sol.dual.mu == doctest::Approx(0.0).epsilon(1e-9).scale(1.0));
  CHECK(sol.avg_power <= cfg.total_power_w);
  std::size_t transmitting = 0, tight = 0;
  for (std::size_t s = 0; s < states.size(); ++s) {
    if (sol.state_power[s] <= 0.0) continue;
    ++transmitting;
    const double i = audit_deterministic(sol.policies[s], states[s], sc).interference_w[0];
    if (std::abs(i - 10.0) <= 1e-6 * 10.0) ++tight;
  }
  CHECK(transmitting > 0);
  CHECK(static_cast<double>(tight) >= 0.99 * static_cast<double>(transmitting));
}

TEST_CASE("solution invariants on the reference scenario") {
  const Scenario sc(reference_scenario());
  const auto states = draw_states(sc, 1000);
  const auto sol = solve_dual(sc, states);
  REQUIRE(sol.dual.converged);
  CHECK(sol.avg_power <= 30.0 * (1.0 + 1e-3));
  CHECK(sol.dual.mu >= 0.0);

  std::mt19937_64 rng(77);
  int kkt_checked = 0;
  for (std::size_t s = 0; s < states.size(); ++s) {
    const auto& a = sol.policies[s];
    const StateProblem st(sc, states[s]);
    const auto& eta = sol.dual.eta[s];
    CHECK(eta[0] >= 0.0);
    CHECK(audit_deterministic(a, states[s], sc).interference_w[0] <= 10.0 * (1.0 + 1e-6));
    for (int k = 0; k < 64; ++k) {
      int count = 0;
      for (int n = 0; n < 3; ++n) {
        CHECK((a.phi(n, k) == 0 || a.phi(n, k) == 1));
        count += a.phi(n, k);
        CHECK(a.power(n, k) >= 0.0);
        if (a.power(n, k) > 0.0) CHECK(a.phi(n, k) == 1);

        // P* = 0 exactly when the unit-power SINR is at or below the cutoff.
        const double w = st.cross_weight(0, k);
        const double f = st.density(n, k);
        const double p = waterfill_power(st.sinr(n, k), f, sol.dual.mu, eta[0], w, st.zeta(), st.reference_power());
        const double cut = cutoff_threshold(sol.dual.mu, eta[0], f > 0.0 ? w / f : 0.0, st.zeta());
        const double g = st.unit_sinr(n, k);
        if (std::abs(g - cut) > 1e-9 * cut) CHECK((p == 0.0) == (g <= cut));
      }
      CHECK(count == 1);
    }
    // Perturbing an active power by 1% never raises the pointwise Lagrangian.
    if (kkt_checked < 100 && s % 7 == 0) {
      for (int k = 0; k < 64 && kkt_checked < 100; k += 13) {
        for (int n = 0; n < 3; ++n) {
          if (a.power(n, k) <= 0.0) continue;
          const double args[] = {st.sinr(n, k), st.density(n, k), sol.dual.mu, eta[0], st.cross_weight(0, k), st.zeta(),
                                 st.reference_power()};
          auto lag = [&](double p) { return entry_lagrangian(p, args[0], args[1], args[2], args[3], args[4], args[5], args[6]); };
          const double p = a.power(n, k);
          CHECK(lag(p) >= lag(1.01 * p));
          CHECK(lag(p) >= lag(0.99 * p));
          ++kkt_checked;
        }
      }
    }
  }
  CHECK(kkt_checked > 0);
}

TEST_CASE("best-so-far dual value never increases") {
  const Scenario sc(reference_scenario());
  const auto states = draw_states(sc, 300);
  SolverOptions opt;
  opt.run_all_iterations = true;
  opt.max_iterations = 60;
  const auto sol = solve_dual(sc, states, opt);
  REQUIRE(sol.dual.trace.size() == 60);
  double best = sol.dual.trace.front().dual_value;
  for (const auto& row : sol.dual.trace) {
    const double next = std::min(best, row.dual_value);
    CHECK(next <= best);
    best = next;
  }
  CHECK(best <= sol.dual.trace.front().dual_value);
  CHECK(sol.dual.trace.back().dual_value <= sol.dual.trace.front().dual_value);
  std::ostringstream csv;
  write_trace_csv(csv, sol.dual.trace);
  CHECK(csv.str().rfind("iter,mu,primal_ase,dual_value,power_gap\n", 0) == 0);
}

TEST_CASE("convergence failure carries the trace") {
  const Scenario sc(reference_scenario());
  const auto states = draw_states(sc, 100);
  SolverOptions opt;
  opt.max_iterations = 2;
  opt.initial_mu = 100.0;
  try {
    solve_dual(sc, states, opt);
    FAIL("expected a convergence error");
  } catch (const ConvergenceError& e) {
    CHECK(e.trace().size() == 2);
    CHECK(e.kind() == ErrorKind::convergence);
  }
}

TEST_CASE("results do not depend on the worker count") {
  const Scenario sc(reference_scenario());
  const auto states = draw_states(sc, 200);
  SolverOptions one, many;
  one.threads = 1;
  many.threads = 4;
  const auto a = solve_dual(sc, states, one);
  const auto b = solve_dual(sc, states, many);
  CHECK(a.ase == b.ase);
  CHECK(a.dual.mu == b.dual.mu);
  CHECK(a.state_power == b.state_power);
}

TEST_CASE("zero power budget") {
  auto cfg = reference_scenario();
  cfg.total_power_w = 0.0;
  const Scenario sc(cfg);
  const auto states = draw_states(sc, 100);
  const auto sol = solve_dual(sc, states);
  CHECK(sol.ase == 0.0);
  CHECK(sol.avg_power == 0.0);
}

TEST_CASE("ASE grows with the interference limit and the power budget") {
  HarnessOptions opt;
  opt.num_states = 1000;
  const std::vector<double> limits{0.5, 1.0, 2.0, 5.0, 10.0, 20.0};
  const auto by_limit = sweep(reference_scenario(), SweepAxis::ith, limits, opt);
  for (std::size_t i = 1; i < by_limit.points.size(); ++i) {
    const auto& prev = by_limit.points[i - 1].report;
    const auto& cur = by_limit.points[i].report;
    CHECK(cur.ase >= prev.ase - prev.ase_stderr);
  }
  const std::vector<double> budgets{5.0, 10.0, 20.0, 30.0, 40.0, 50.0};
  const auto by_power = sweep(reference_scenario(), SweepAxis::pt, budgets, opt);
  for (std::size_t i = 1; i < by_power.points.size(); ++i) {
    const auto& prev = by_power.points[i - 1].report;
    const auto& cur = by_power.points[i].report;
    CHECK(cur.ase >= prev.ase - prev.ase_stderr);
  }
}

TEST_CASE("probabilistic mode keeps the surrogate load within budget") {
  const Scenario sc(reference_probabilistic_scenario());
  const auto states = draw_states(sc, 300);
  const auto sol = solve_dual(sc, states);
  for (std::size_t s = 0; s < states.size(); ++s) {
    const StateProblem st(sc, states[s]);
    CHECK(sol.state_load[s][0] <= st.budget(0) * (1.0 + 1e-6));
    CHECK(st.budget(0) == doctest::Approx(surrogate_budget(sc, 0)));
  }
}

TEST_CASE("discrete rates never beat continuous rates") {
  auto cfg = reference_scenario();
  const Scenario cont(cfg);
  cfg.rate_mode = RateMode::discrete;
  const Scenario disc(cfg);
  const auto states = draw_states(cont, 300);
  const auto a = solve_dual(cont, states);
  const auto b = solve_dual(disc, states);
  CHECK(b.ase <= a.ase);
  for (const auto& p : b.policies) {
    for (int n = 0; n < 3; ++n) {
      for (int k = 0; k < 64; ++k) {
        const double bits = std::log2(p.constellation(n, k));
        CHECK(bits == std::round(bits));
        if (p.power(n, k) > 0.0) CHECK(bits >= 2.0);
      }
    }
  }
}
