#include "crnalloc/selftest.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <functional>
#include <numbers>
#include <ostream>
#include <string>

#include "crnalloc/harness.hpp"
#include "crnalloc/interference.hpp"
#include "crnalloc/modulation.hpp"
#include "crnalloc/optimizer.hpp"
#include "crnalloc/sinr.hpp"

namespace crnalloc {
namespace {

struct Runner {
  std::ostream& out;
  int failed = 0;

  void check(const std::string& name, const std::function<bool()>& fn) {
    bool ok = false;
    std::string detail;
    try {
      ok = fn();
    } catch (const std::exception& e) {
      detail = std::string(" (") + e.what() + ")";
    }
    out << (ok ? "PASS " : "FAIL ") << name << detail << '\n';
    if (!ok) ++failed;
  }
};

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

}  // namespace

bool run_selftest(std::ostream& out, unsigned threads) {
  Runner r{out};

  r.check("zeta for xi=1e-2 and 1e-3", [] {
    return near(zeta_for_target(1e-2), 0.44102, 5e-6) && near(zeta_for_target(1e-3), 0.26298, 5e-6);
  });
  r.check("constellation sizing round trip", [] {
    const double zeta = zeta_for_target(1e-2);
    const double m = max_constellation(zeta, 10.0, 1.0, 1.0);
    return near(m, 5.4102, 1e-4) && near(ber_bound(m, 10.0), 1e-2, 1e-9) && discretize_rate(m) == 2 &&
           discretize_rate(1024.0) == 10;
  });
  r.check("Q function against quadrature", [] {
    boost::math::quadrature::gauss_kronrod<double, 61> gk;
    const double x = std::sqrt(3.0 * 10.0 / 3.0);
    const double tail = gk.integrate([](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi); },
                                     x, std::numeric_limits<double>::infinity(), 15, 1e-14);
    return near(q_function(x), tail, 1e-12) && near(ber_exact(4.0, 10.0), 2.0 * 0.5 * tail, 1e-9);
  });
  r.check("aggregate cross-gain moments", [] {
    const std::vector<Complex> means(64, Complex{0.05, 0.0});
    const std::vector<double> vars(64, 0.1);
    const auto p = aggregate_gain_params(means, vars);
    return near(p.mean, 12.96, 1e-9) && near(p.variance, 2.624, 1e-9);
  });
  r.check("reference SINR cdf against Monte Carlo", [threads] {
    ScenarioConfig cfg = reference_scenario();
    cfg.direct_means.kind = DirectGainSource::Kind::constant;
    cfg.direct_means.value = 1.0;
    cfg.interference_limits_w = {5.0};
    const Scenario sc(cfg);
    const auto dist = sinr_distribution(sc, 0, 0, 0);
    const auto mc = sample_sinr_mc(sc, 0, 0, 0, 20000, threads);
    return ks_distance(mc.samples(), [&](double g) { return dist.cdf(g); }) <= 0.02;
  });
  r.check("pdf matches cdf derivative", [] {
    ScenarioConfig cfg = reference_scenario();
    cfg.direct_means.kind = DirectGainSource::Kind::constant;
    const Scenario sc(cfg);
    const auto dist = sinr_distribution(sc, 0, 0, 0);
    for (double g : {1.0, 5.0, 20.0, 80.0}) {
      const double h = 1e-4 * g;
      const double fd = (dist.cdf(g + h) - dist.cdf(g - h)) / (2.0 * h);
      if (std::abs(fd - dist.pdf(g)) > 1e-2 * dist.pdf(g)) return false;
    }
    return true;
  });
  r.check("composite chi-square weight and exponential tail", [] {
    const std::vector<double> beta{1.0, 3.0};
    const std::vector<double> mu{0.0, 2.0};
    const auto c = composite_chisq(beta, mu);
    const CompositeChiSquare expo{0.0, 2, 1.0};
    return near(c.weight, 14.0 / 6.0, 1e-12) && c.dof == 4 && near(c.noncentrality, 2.0, 1e-12) &&
           near(central_tail_approx(expo, 2.0 * std::log(10.0)), 0.1, 1e-12);
  });
  r.check("surrogate interference budget", [] { return near(surrogate_budget(10.0, 0.1, 64), 4.047, 1e-3); });
  r.check("water-filling and selection metric", [] {
    const double p = waterfill_power(2.0, 1.0, 1.0 / std::numbers::ln2, 0.0, 0.0, 1.0, 1.0);
    const double lambda = selection_metric(1.0, 1.0, 1.0, 1.0, 1.0);
    Matrix<double> metric(3, 1);
    metric(0, 0) = 0.2;
    metric(1, 0) = 0.9;
    metric(2, 0) = 0.9;
    const auto phi = assign_subcarriers(metric);
    return near(p, 0.5, 1e-12) && near(lambda, 1.0 / (2.0 * std::numbers::ln2) + 1.0, 1e-12) && phi(1, 0) == 1 &&
           phi(0, 0) == 0 && phi(2, 0) == 0;
  });
  r.check("dual solver feasibility on the reference scenario", [threads] {
    HarnessOptions opt;
    opt.num_states = 200;
    opt.solver.threads = threads;
    const auto rep = run_experiment(reference_scenario(), opt);
    return rep.converged && rep.avg_power_used <= 30.0 * 1.001 && rep.interference[0].max <= 10.0 * (1.0 + 1e-6) &&
           rep.ase > 0.0;
  });
  r.check("probabilistic collision audit", [threads] {
    HarnessOptions opt;
    opt.num_states = 100;
    opt.audit_states = 5;
    opt.solver.threads = threads;
    const auto rep = run_experiment(reference_probabilistic_scenario(), opt);
    return rep.collision[0].probability <= 0.1 + 3.0 * rep.collision[0].standard_error;
  });

  out << (r.failed == 0 ? "selftest passed" : "selftest failed: " + std::to_string(r.failed) + " check(s)") << '\n';
  return r.failed == 0;
}

}  // namespace crnalloc
