#include "crnalloc/sinr.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <ostream>

#include "crnalloc/csv.hpp"
#include "crnalloc/parallel.hpp"

namespace crnalloc {
namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Per-dimension variance and mean of the true cross link Hsp = est + err.
struct CrossLinkStats {
  Complex mean;
  double variance;
};

CrossLinkStats true_cross_stats(const ScenarioConfig& cfg) {
  if (cfg.csi_mode == CsiMode::perfect) return {cfg.cross_mean, cfg.cross_var};
  const double cov = cfg.correlation * std::sqrt(cfg.cross_var * cfg.error_var);
  return {cfg.cross_mean, cfg.cross_var + cfg.error_var + 2.0 * cov};
}

}  // namespace

double erfcx(double x) {
  if (x < 26.0) return std::exp(x * x) * std::erfc(x);
  // Asymptotic series; four terms are exact to double precision here.
  const double inv2 = 1.0 / (x * x);
  return (1.0 - 0.5 * inv2 + 0.75 * inv2 * inv2 - 1.875 * inv2 * inv2 * inv2) / (x * std::sqrt(std::numbers::pi));
}

AggregateGainParams aggregate_gain_params(std::span<const Complex> means, std::span<const double> variances) {
  if (means.empty() || means.size() != variances.size()) {
    throw ShapeError("aggregate_gain_params needs one mean and one variance per subcarrier");
  }
  const double var = variances.front();
  if (!(var > 0.0)) throw DomainError("cross-link variance must be > 0");
  for (double v : variances) {
    if (v != var) throw UnsupportedConfigError("Normal approximation of the aggregate gain needs equal per-subcarrier variances");
  }
  double noncentrality = 0.0;
  for (const Complex& mu : means) noncentrality += std::norm(mu) / var;
  const double k = static_cast<double>(means.size());
  return {var * (2.0 * k + noncentrality), var * var * (4.0 * k + 4.0 * noncentrality)};
}

AggregateGainParams aggregate_gain_params(const Scenario& scenario, int m) {
  if (m < 0 || m >= scenario.primaries()) throw ShapeError("PRx index out of range");
  const auto stats = true_cross_stats(scenario.config());
  const auto k = static_cast<std::size_t>(scenario.subcarriers());
  const std::vector<Complex> means(k, stats.mean);
  const std::vector<double> vars(k, stats.variance);
  return aggregate_gain_params(means, vars);
}

SinrDistribution::SinrDistribution(double direct_mean, AggregateGainParams aggregate, double noise_w,
                                   double total_power_w, double interference_limit_w, int subcarriers)
    : direct_mean_(direct_mean),
      aggregate_(aggregate),
      noise_(noise_w),
      total_power_(total_power_w),
      limit_(interference_limit_w),
      subcarriers_(subcarriers) {
  if (!(direct_mean > 0.0)) throw DomainError("direct-link mean gain must be > 0");
  if (!(aggregate.mean > 0.0) || !(aggregate.variance > 0.0)) throw DomainError("aggregate gain moments must be > 0");
  if (!(noise_w > 0.0)) throw DomainError("noise power must be > 0");
  if (!(total_power_w > 0.0)) throw DomainError("total power must be > 0");
  if (!(interference_limit_w > 0.0)) throw DomainError("interference limit must be > 0");
  if (subcarriers <= 0) throw DomainError("subcarrier count must be > 0");
  sd_ = std::sqrt(aggregate.variance);
  switch_point_ = interference_limit_w * subcarriers / total_power_w;
  mass_below_zero_ = normal_cdf(-aggregate.mean / sd_);
  norm_ = 1.0 - mass_below_zero_;
}

double SinrDistribution::aggregate_cdf(double x) const {
  if (x <= 0.0) return 0.0;
  return std::clamp((normal_cdf((x - aggregate_.mean) / sd_) - mass_below_zero_) / norm_, 0.0, 1.0);
}

double SinrDistribution::cdf(double gamma) const {
  if (gamma < 0.0 || std::isnan(gamma)) throw DomainError("SINR cdf needs gamma >= 0");
  if (std::isinf(gamma)) return 1.0;
  const double k = subcarriers_;
  const double mu = aggregate_.mean;
  const double c = switch_point_;

  // A: power-limited branch, N <= I_th K / P_t.
  const double a = std::exp(-k * gamma * noise_ / (total_power_ * direct_mean_)) * aggregate_cdf(c);

  // B: interference-limited branch, integrated over the Normal body.
  double b = 0.0;
  const double upper = mu + 10.0 * sd_;
  if (c < upper) {
    const double t = gamma * noise_ / (limit_ * direct_mean_);
    auto integrand = [&](double n) {
      const double z = (n - mu) / sd_;
      return std::exp(-t * n - 0.5 * z * z) * kInvSqrt2Pi / sd_;
    };
    b = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, std::max(c, 0.0), upper, 15, 1e-12) /
        norm_;
  }
  return std::clamp(1.0 - a - b, 0.0, 1.0);
}

double SinrDistribution::pdf(double gamma) const {
  if (gamma < 0.0 || std::isnan(gamma)) throw DomainError("SINR pdf needs gamma >= 0");
  if (std::isinf(gamma)) return 0.0;
  const double k = subcarriers_;
  const double s = noise_;
  const double mu_h = direct_mean_;
  const double mu = aggregate_.mean;
  const double sd = sd_;
  const double var = aggregate_.variance;
  const double c = switch_point_;
  const double lim = limit_;

  // Exponential tail weighted by the Gaussian mass below the switch point.
  const double term1 = k * s * std::exp(-k * gamma * s / (total_power_ * mu_h)) / (total_power_ * mu_h) * aggregate_cdf(c);

  // Gaussian-boundary term and error-function product term. Both carry the
  // factor exp(-t c - (c - mu)^2 / (2 var)); for z > 0 the erfc is scaled so
  // the product never overflows, for z <= 0 the raw exponent is already <= 0.
  const double t = gamma * s / (lim * mu_h);
  const double z = (c - mu + t * var) / sd;
  const double boundary_exp = std::exp(-t * c - (c - mu) * (c - mu) / (2.0 * var));
  const double term2 = s * sd * boundary_exp * kInvSqrt2Pi / (lim * mu_h);
  double tail;  // exp(-t mu + t^2 var / 2) Q(z)
  if (z > 0.0) {
    tail = boundary_exp * 0.5 * erfcx(z / std::numbers::sqrt2);
  } else {
    tail = std::exp(-t * mu + 0.5 * t * t * var) * 0.5 * std::erfc(z / std::numbers::sqrt2);
  }
  const double term3 = s * (mu - t * var) * tail / (lim * mu_h);

  const double density = term1 + (term2 + term3) / norm_;
  if (density < 0.0 && density > -1e-9) return 0.0;
  return density;
}

double sinr_cdf(const SinrDistribution& dist, double gamma) { return dist.cdf(gamma); }
double sinr_pdf(const SinrDistribution& dist, double gamma) { return dist.pdf(gamma); }

double aggregate_cross_gain(const ChannelRealization& real, int m) {
  double sum = 0.0;
  for (const Complex& h : real.cross_true.row(static_cast<std::size_t>(m))) sum += std::norm(h);
  return sum;
}

double reference_power(const Scenario& scenario, const ChannelRealization& real, int m) {
  const double cap = scenario.total_power() / scenario.subcarriers();
  const double n_sp = aggregate_cross_gain(real, m);
  if (n_sp <= 0.0) return cap;
  return std::min(cap, scenario.interference_limit(m) / n_sp);
}

double reference_sinr(const Scenario& scenario, const ChannelRealization& real, int n, int k, int m) {
  if (n < 0 || n >= scenario.users() || k < 0 || k >= scenario.subcarriers() || m < 0 || m >= scenario.primaries()) {
    throw ShapeError("reference_sinr index out of range");
  }
  return real.direct_power(static_cast<std::size_t>(n), static_cast<std::size_t>(k)) *
         reference_power(scenario, real, m) / scenario.noise_w();
}

SinrDistribution sinr_distribution(const Scenario& scenario, int n, int k, int m) {
  return SinrDistribution(scenario.direct_means()(static_cast<std::size_t>(n), static_cast<std::size_t>(k)),
                          aggregate_gain_params(scenario, m), scenario.noise_w(), scenario.total_power(),
                          scenario.interference_limit(m), scenario.subcarriers());
}

EmpiricalCdf::EmpiricalCdf(std::vector<double> samples) : samples_(std::move(samples)) {
  std::sort(samples_.begin(), samples_.end());
}

double EmpiricalCdf::operator()(double x) const {
  if (samples_.empty()) return 0.0;
  const auto it = std::upper_bound(samples_.begin(), samples_.end(), x);
  return static_cast<double>(it - samples_.begin()) / static_cast<double>(samples_.size());
}

EmpiricalCdf sample_sinr_mc(const Scenario& scenario, int m, int n, int k, std::size_t count, unsigned threads) {
  if (count < 1000) throw DomainError("sample_sinr_mc needs at least 1000 draws");
  std::vector<double> samples(count);
  parallel_for(count, threads, [&](std::size_t i) {
    const auto real = sample_realization(scenario, i);
    samples[i] = reference_sinr(scenario, real, n, k, m);
  });
  return EmpiricalCdf(std::move(samples));
}

void write_distribution_table(std::ostream& out, const SinrDistribution& dist, const EmpiricalCdf& empirical,
                              std::span<const double> gammas) {
  out << "gamma,cdf_closed,pdf_closed,cdf_mc\n";
  for (double g : gammas) {
    out << format_number(g) << ',' << format_number(dist.cdf(g)) << ',' << format_number(dist.pdf(g)) << ','
        << format_number(empirical(g)) << '\n';
  }
}

}  // namespace crnalloc
