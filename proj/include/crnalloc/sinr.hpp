#pragma once

#include <algorithm>
#include <cmath>
#include <iosfwd>
#include <span>
#include <vector>

#include "crnalloc/scenario.hpp"

namespace crnalloc {

/// Normal approximation of the aggregate cross gain N = sum_k |Hsp[m,k]|^2.
struct AggregateGainParams {
  double mean = 0.0;
  double variance = 0.0;
};

/// Aggregate gain moments for subcarrier means and per-dimension variances.
/// mu' = sum_k |mean_k|^2 / var, mean = var (2K + mu'), variance = var^2 (4K + 4 mu').
/// Throws UnsupportedConfigError when the variances are not all equal.
AggregateGainParams aggregate_gain_params(std::span<const Complex> means, std::span<const double> variances);

/// The same for PRx m of a scenario, using the configured cross-link statistics.
AggregateGainParams aggregate_gain_params(const Scenario& scenario, int m);

/// Closed-form distribution of the reference SINR
///   gamma = |Hss|^2 min(P_t/K, I_th/N) / sigma^2
/// with exponential |Hss|^2 and N approximated by a Normal truncated at 0.
/// Immutable after construction.
class SinrDistribution {
 public:
  SinrDistribution(double direct_mean, AggregateGainParams aggregate, double noise_w, double total_power_w,
                   double interference_limit_w, int subcarriers);

  /// F(G) = 1 - A - B. A is closed form; B is integrated numerically.
  double cdf(double gamma) const;
  /// Three-term closed-form density (the derivative of cdf()).
  double pdf(double gamma) const;

  /// Truncated-normal cdf of the aggregate cross gain.
  double aggregate_cdf(double x) const;
  /// I_th K / P_t: above it the interference limit sets the reference power.
  double switch_point() const noexcept { return switch_point_; }

  double direct_mean() const noexcept { return direct_mean_; }
  const AggregateGainParams& aggregate() const noexcept { return aggregate_; }
  double noise() const noexcept { return noise_; }
  double total_power() const noexcept { return total_power_; }
  double interference_limit() const noexcept { return limit_; }
  int subcarriers() const noexcept { return subcarriers_; }

 private:
  double direct_mean_;
  AggregateGainParams aggregate_;
  double noise_;
  double total_power_;
  double limit_;
  int subcarriers_;
  double sd_;
  double switch_point_;
  double mass_below_zero_;  // Phi(-mean/sd), removed by the truncation
  double norm_;             // 1 - mass_below_zero_
};

double sinr_cdf(const SinrDistribution& dist, double gamma);
double sinr_pdf(const SinrDistribution& dist, double gamma);

/// exp(x^2) erfc(x) for x >= 0 without overflow.
double erfcx(double x);

/// N^sp_m = sum_k |Hsp[m,k]|^2 of the true cross links.
double aggregate_cross_gain(const ChannelRealization& real, int m);

/// min(P_t/K, I_th[m] / N^sp_m).
double reference_power(const Scenario& scenario, const ChannelRealization& real, int m);

/// |Hss[n,k]|^2 * reference_power / sigma^2.
double reference_sinr(const Scenario& scenario, const ChannelRealization& real, int n, int k, int m);

/// SinrDistribution of user n on subcarrier k against PRx m.
SinrDistribution sinr_distribution(const Scenario& scenario, int n, int k, int m);

/// Sorted Monte Carlo samples of the reference SINR.
class EmpiricalCdf {
 public:
  explicit EmpiricalCdf(std::vector<double> samples);
  double operator()(double x) const;
  const std::vector<double>& samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }

 private:
  std::vector<double> samples_;
};

/// Draws `count` realizations (streams 0..count-1 of the scenario seed) and
/// evaluates reference_sinr on each. Requires count >= 1000.
EmpiricalCdf sample_sinr_mc(const Scenario& scenario, int m, int n, int k, std::size_t count, unsigned threads = 0);

/// Kolmogorov-Smirnov distance between sorted samples and a cdf.
template <typename Cdf>
double ks_distance(std::span<const double> sorted, Cdf&& cdf) {
  double d = 0.0;
  const double count = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    d = std::max({d, std::abs(f - static_cast<double>(i) / count), std::abs(static_cast<double>(i + 1) / count - f)});
  }
  return d;
}

/// CSV with header gamma,cdf_closed,pdf_closed,cdf_mc.
void write_distribution_table(std::ostream& out, const SinrDistribution& dist, const EmpiricalCdf& empirical,
                              std::span<const double> gammas);

}  // namespace crnalloc
