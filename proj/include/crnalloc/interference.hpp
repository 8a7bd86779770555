#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "crnalloc/allocation.hpp"
#include "crnalloc/scenario.hpp"

namespace crnalloc {

/// Instantaneous aggregate interference at each PRx.
struct InterferenceAudit {
  std::vector<double> interference_w;  // sum_{n,k} phi P |Hsp[m,k]|^2
  std::vector<double> limit_w;
  std::vector<bool> violated;          // interference > limit
};

/// Audits against the true cross links of the realization.
/// Throws ShapeError if the allocation does not match the scenario.
InterferenceAudit audit_deterministic(const AllocationPolicy& alloc, const ChannelRealization& real,
                                      const Scenario& scenario);

/// |mean[m,k]|^2 / variance: non-centrality of the unit-variance Xi[k].
/// Throws DegenerateError when the posterior variance is 0.
double xi_mean(const PosteriorCrossStats& post, int m, int k);

/// Single scaled chi-square w * chi2_D(delta') matched to sum_k beta_k |Xi_k|^2.
struct CompositeChiSquare {
  double noncentrality = 0.0;  // delta' = sum_k mu_Xi[k]
  int dof = 0;                 // D = 2K
  double weight = 0.0;         // w = sum beta (2 + mu_Xi) / (2K + delta')
};

CompositeChiSquare composite_chisq(std::span<const double> weights, std::span<const double> xi_means);

/// P(chi2_D(0) > (threshold / w) / (1 + delta'/D)).
double central_tail_approx(const CompositeChiSquare& composite, double threshold);

/// P(w chi2_D(delta') > threshold) from the non-central distribution itself.
double noncentral_tail(const CompositeChiSquare& composite, double threshold);

/// K I_th / ((K!)^{1/K} |ln(1 - (1 - eps)^{1/K})|).
///
/// The logarithm is negative for every eps in (0, 1), which would make the
/// budget negative; its magnitude is used. (K!)^{1/K} = exp(lgamma(K+1)/K).
double surrogate_budget(double interference_limit, double epsilon, int subcarriers);
double surrogate_budget(const Scenario& scenario, int m);

/// Deterministic stand-in for the collision-probability constraint at one PRx:
/// sum_k alpha_k p_k <= budget.
struct SurrogateBudget {
  std::vector<double> alpha;   // var (2 + mu_Xi[k])
  double budget = 0.0;         // I-bar
  int dof = 0;
  double noncentrality = 0.0;
  double weight = 0.0;         // only when subcarrier powers were supplied
};

SurrogateBudget surrogate_for(const Scenario& scenario, const PosteriorCrossStats& post, int m,
                              std::span<const double> subcarrier_power = {});

/// Left side of the surrogate: sum_k alpha_k p_k.
double surrogate_load(const SurrogateBudget& surrogate, std::span<const double> subcarrier_power);

struct CollisionEstimate {
  double probability = 0.0;
  double standard_error = 0.0;
};

/// Resamples the true cross links from the posterior and returns, per PRx,
/// the fraction of draws whose aggregate interference exceeds I_th[m].
/// Requires samples >= 10^4. Deterministic in (scenario seed, stream).
std::vector<CollisionEstimate> audit_probabilistic(const AllocationPolicy& alloc, const PosteriorCrossStats& post,
                                                   const Scenario& scenario, std::size_t samples,
                                                   std::uint64_t stream, unsigned threads = 1);

/// prx,interference_w,limit_w,violated
void write_interference_csv(std::ostream& out, const InterferenceAudit& audit);
/// prx,collision_prob,stderr,epsilon
void write_collision_csv(std::ostream& out, std::span<const CollisionEstimate> estimates,
                         std::span<const double> epsilons);

}  // namespace crnalloc
