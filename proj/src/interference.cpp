#include "crnalloc/interference.hpp"

#include <boost/math/distributions/non_central_chi_squared.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <ostream>

#include "crnalloc/csv.hpp"
#include "crnalloc/parallel.hpp"

namespace crnalloc {
namespace {

constexpr std::size_t kAuditChunk = 4096;

void check_shape(const AllocationPolicy& alloc, const Scenario& scenario) {
  if (alloc.users() != static_cast<std::size_t>(scenario.users()) ||
      alloc.subcarriers() != static_cast<std::size_t>(scenario.subcarriers()) ||
      alloc.power.rows() != alloc.users() || alloc.power.cols() != alloc.subcarriers()) {
    throw ShapeError("allocation dimensions do not match the scenario");
  }
}

}  // namespace

InterferenceAudit audit_deterministic(const AllocationPolicy& alloc, const ChannelRealization& real,
                                      const Scenario& scenario) {
  check_shape(alloc, scenario);
  const auto prx = static_cast<std::size_t>(scenario.primaries());
  if (real.cross_true.rows() != prx || real.cross_true.cols() != alloc.subcarriers()) {
    throw ShapeError("realization dimensions do not match the scenario");
  }
  InterferenceAudit audit;
  audit.interference_w.assign(prx, 0.0);
  audit.limit_w = scenario.interference_limits();
  audit.violated.assign(prx, false);
  for (std::size_t m = 0; m < prx; ++m) {
    double sum = 0.0;
    for (std::size_t n = 0; n < alloc.users(); ++n) {
      for (std::size_t k = 0; k < alloc.subcarriers(); ++k) {
        if (alloc.phi(n, k)) sum += alloc.power(n, k) * std::norm(real.cross_true(m, k));
      }
    }
    audit.interference_w[m] = sum;
    audit.violated[m] = sum > audit.limit_w[m];
  }
  return audit;
}

double xi_mean(const PosteriorCrossStats& post, int m, int k) {
  if (!(post.variance > 0.0)) {
    throw DegenerateError("posterior variance is 0 (rho = 1); the probabilistic constraint does not apply");
  }
  return std::norm(post.mean(static_cast<std::size_t>(m), static_cast<std::size_t>(k))) / post.variance;
}

CompositeChiSquare composite_chisq(std::span<const double> weights, std::span<const double> xi_means) {
  if (weights.empty() || weights.size() != xi_means.size()) {
    throw ShapeError("composite_chisq needs one weight and one mean per subcarrier");
  }
  const double k = static_cast<double>(weights.size());
  double noncentrality = 0.0;
  double weighted = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    noncentrality += xi_means[i];
    weighted += weights[i] * (2.0 + xi_means[i]);
  }
  CompositeChiSquare out;
  out.noncentrality = noncentrality;
  out.dof = static_cast<int>(2 * weights.size());
  out.weight = weighted / (2.0 * k + noncentrality);
  return out;
}

double central_tail_approx(const CompositeChiSquare& composite, double threshold) {
  if (!(composite.weight > 0.0)) throw DomainError("composite weight must be > 0");
  if (composite.dof < 1 || composite.noncentrality < 0.0) throw DomainError("need D >= 1 and delta' >= 0");
  if (threshold <= 0.0) return 1.0;
  const double d = composite.dof;
  const double x = (threshold / composite.weight) / (1.0 + composite.noncentrality / d);
  if (!std::isfinite(x)) return 0.0;
  return boost::math::gamma_q(0.5 * d, 0.5 * x);
}

double noncentral_tail(const CompositeChiSquare& composite, double threshold) {
  if (!(composite.weight > 0.0)) throw DomainError("composite weight must be > 0");
  if (threshold <= 0.0) return 1.0;
  const double x = threshold / composite.weight;
  if (!std::isfinite(x)) return 0.0;
  const boost::math::non_central_chi_squared dist(composite.dof, composite.noncentrality);
  return boost::math::cdf(boost::math::complement(dist, x));
}

double surrogate_budget(double interference_limit, double epsilon, int subcarriers) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("collision probability must lie in (0, 1)");
  if (subcarriers < 1) throw DomainError("subcarrier count must be >= 1");
  const double k = subcarriers;
  const double root_factorial = std::exp(std::lgamma(k + 1.0) / k);
  // 1 - (1 - eps)^{1/K}, computed without cancellation for small eps.
  const double inner = -std::expm1(std::log1p(-epsilon) / k);
  return k * interference_limit / (root_factorial * std::abs(std::log(inner)));
}

double surrogate_budget(const Scenario& scenario, int m) {
  return surrogate_budget(scenario.interference_limit(m), scenario.collision_limit(m), scenario.subcarriers());
}

SurrogateBudget surrogate_for(const Scenario& scenario, const PosteriorCrossStats& post, int m,
                              std::span<const double> subcarrier_power) {
  const auto carriers = static_cast<std::size_t>(scenario.subcarriers());
  SurrogateBudget out;
  out.alpha.resize(carriers);
  std::vector<double> means(carriers);
  for (std::size_t k = 0; k < carriers; ++k) {
    means[k] = xi_mean(post, m, static_cast<int>(k));
    out.alpha[k] = post.variance * (2.0 + means[k]);
  }
  out.budget = surrogate_budget(scenario, m);
  std::vector<double> beta(carriers, 0.0);
  if (!subcarrier_power.empty()) {
    if (subcarrier_power.size() != carriers) throw ShapeError("one power per subcarrier expected");
    for (std::size_t k = 0; k < carriers; ++k) beta[k] = post.variance * subcarrier_power[k];
  }
  const auto composite = composite_chisq(beta, means);
  out.dof = composite.dof;
  out.noncentrality = composite.noncentrality;
  out.weight = composite.weight;
  return out;
}

double surrogate_load(const SurrogateBudget& surrogate, std::span<const double> subcarrier_power) {
  if (subcarrier_power.size() != surrogate.alpha.size()) throw ShapeError("one power per subcarrier expected");
  double sum = 0.0;
  for (std::size_t k = 0; k < subcarrier_power.size(); ++k) sum += surrogate.alpha[k] * subcarrier_power[k];
  return sum;
}

std::vector<CollisionEstimate> audit_probabilistic(const AllocationPolicy& alloc, const PosteriorCrossStats& post,
                                                   const Scenario& scenario, std::size_t samples,
                                                   std::uint64_t stream, unsigned threads) {
  check_shape(alloc, scenario);
  if (samples < 10000) throw DomainError("audit_probabilistic needs at least 10^4 samples");
  const auto prx = static_cast<std::size_t>(scenario.primaries());
  const auto power = alloc.subcarrier_power();
  std::vector<std::size_t> active;
  for (std::size_t k = 0; k < power.size(); ++k)
    if (power[k] > 0.0) active.push_back(k);

  const double sd = std::sqrt(post.variance);
  const std::size_t chunks = (samples + kAuditChunk - 1) / kAuditChunk;
  std::vector<CollisionEstimate> out(prx);
  for (std::size_t m = 0; m < prx; ++m) {
    const double limit = scenario.interference_limit(static_cast<int>(m));
    std::vector<std::size_t> exceed(chunks, 0);
    parallel_for(chunks, threads, [&](std::size_t c) {
      auto rng = make_stream(scenario.config().rng_seed, stream, (static_cast<std::uint64_t>(m + 1) << 32) | c);
      std::normal_distribution<double> normal(0.0, 1.0);
      const std::size_t begin = c * kAuditChunk;
      const std::size_t end = std::min(samples, begin + kAuditChunk);
      std::size_t count = 0;
      for (std::size_t s = begin; s < end; ++s) {
        double total = 0.0;
        for (std::size_t k : active) {
          const Complex mean = post.mean(m, k);
          const double re = mean.real() + sd * normal(rng);
          const double im = mean.imag() + sd * normal(rng);
          total += power[k] * (re * re + im * im);
        }
        if (total > limit) ++count;
      }
      exceed[c] = count;
    });
    std::size_t hits = 0;
    for (std::size_t v : exceed) hits += v;
    const double p = static_cast<double>(hits) / static_cast<double>(samples);
    out[m] = {p, std::sqrt(p * (1.0 - p) / static_cast<double>(samples))};
  }
  return out;
}

void write_interference_csv(std::ostream& out, const InterferenceAudit& audit) {
  out << "prx,interference_w,limit_w,violated\n";
  for (std::size_t m = 0; m < audit.interference_w.size(); ++m) {
    out << m << ',' << format_number(audit.interference_w[m]) << ',' << format_number(audit.limit_w[m]) << ','
        << (audit.violated[m] ? 1 : 0) << '\n';
  }
}

void write_collision_csv(std::ostream& out, std::span<const CollisionEstimate> estimates,
                         std::span<const double> epsilons) {
  out << "prx,collision_prob,stderr,epsilon\n";
  for (std::size_t m = 0; m < estimates.size(); ++m) {
    out << m << ',' << format_number(estimates[m].probability) << ',' << format_number(estimates[m].standard_error)
        << ',' << format_number(m < epsilons.size() ? epsilons[m] : 0.0) << '\n';
  }
}

}  // namespace crnalloc
