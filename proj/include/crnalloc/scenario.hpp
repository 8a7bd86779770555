#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "crnalloc/common.hpp"

namespace crnalloc {

enum class RateMode { continuous, discrete };
enum class CsiMode { perfect, imperfect };
enum class ConstraintMode { deterministic, probabilistic };

/// Where the per-(user, subcarrier) mean direct-link power gains come from.
struct DirectGainSource {
  enum class Kind { uniform, constant, list };
  Kind kind = Kind::uniform;
  std::uint64_t seed = 1;      // uniform: draw seed
  double value = 1.0;          // constant: common mean
  std::vector<double> values;  // list: row-major users x subcarriers

  friend bool operator==(const DirectGainSource&, const DirectGainSource&) = default;
};

/// Static description of a spectrum-sharing scenario.
///
/// Complex Gaussian variances (cross_var, error_var) are per real dimension:
/// a link with cross_var = v has E|H - mean|^2 = 2v. This is the convention
/// under which the aggregate cross gain is a scaled chi-square with 2K
/// degrees of freedom.
struct ScenarioConfig {
  int num_users = 3;
  int num_primaries = 1;
  int num_subcarriers = 64;
  double total_power_w = 30.0;
  std::vector<double> interference_limits_w{10.0};  // one per PRx, or one shared value
  std::vector<double> collision_limits{0.1};        // one per PRx, or one shared value
  double ber_target = 1e-2;
  double bandwidth_hz = 10e6;
  double noise_psd_dbm_hz = -174.0;
  std::optional<double> primary_interference_w;  // unset: equal to the thermal noise power
  DirectGainSource direct_means;
  Complex cross_mean{0.05, 0.0};
  double cross_var = 0.1;
  double error_var = 0.0;
  double correlation = 0.0;
  RateMode rate_mode = RateMode::continuous;
  CsiMode csi_mode = CsiMode::perfect;
  ConstraintMode constraint_mode = ConstraintMode::deterministic;
  std::uint64_t rng_seed = 1;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Calibrated three-user, single-PRx, 64-subcarrier scenario used by the
/// shipped configs and the acceptance suite.
ScenarioConfig reference_scenario();

/// Imperfect-CSI, probabilistic-constraint variant of reference_scenario().
ScenarioConfig reference_probabilistic_scenario();

/// A validated ScenarioConfig with derived quantities resolved.
class Scenario {
 public:
  /// Throws ConfigError naming the first violated invariant.
  explicit Scenario(ScenarioConfig config);

  const ScenarioConfig& config() const noexcept { return config_; }
  int users() const noexcept { return config_.num_users; }
  int primaries() const noexcept { return config_.num_primaries; }
  int subcarriers() const noexcept { return config_.num_subcarriers; }
  double total_power() const noexcept { return config_.total_power_w; }
  double interference_limit(int m) const { return limits_.at(static_cast<std::size_t>(m)); }
  double collision_limit(int m) const { return collisions_.at(static_cast<std::size_t>(m)); }
  const std::vector<double>& interference_limits() const noexcept { return limits_; }

  double thermal_noise_w() const noexcept { return thermal_noise_w_; }
  double primary_interference_w() const noexcept { return primary_w_; }
  /// sigma_n^2 + sigma_ps^2, the denominator of every SINR.
  double noise_w() const noexcept { return thermal_noise_w_ + primary_w_; }

  const Matrix<double>& direct_means() const noexcept { return direct_means_; }
  double zeta() const noexcept { return zeta_; }

 private:
  ScenarioConfig config_;
  std::vector<double> limits_;
  std::vector<double> collisions_;
  Matrix<double> direct_means_;
  double thermal_noise_w_ = 0.0;
  double primary_w_ = 0.0;
  double zeta_ = 0.0;
};

/// One joint draw of every link in the scenario.
struct ChannelRealization {
  Matrix<double> direct_power;  // |Hss|^2, users x subcarriers
  Matrix<Complex> cross_true;   // Hsp, primaries x subcarriers
  Matrix<Complex> cross_est;    // estimate known at the transmitter
  Matrix<Complex> cross_err;    // cross_true - cross_est

  friend bool operator==(const ChannelRealization&, const ChannelRealization&) = default;
};

/// Posterior of the true cross link given its estimate.
struct PosteriorCrossStats {
  Matrix<Complex> mean;
  double variance = 0.0;  // per real dimension, shared by all (m, k)
};

/// Independent generator for (seed, stream, domain). Domains separate the
/// channel draws from audit resampling so they never share a sequence.
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream, std::uint64_t domain = 0);

/// Pure in (scenario, stream_index): equal inputs give bit-identical draws.
ChannelRealization sample_realization(const Scenario& scenario, std::uint64_t stream_index);

/// mean = (1 + rho^2) * estimate, variance = (1 - rho^2) * error_var.
/// Throws ModeError for perfect-CSI scenarios.
PosteriorCrossStats posterior_stats(const Scenario& scenario, const Matrix<Complex>& cross_est);

/// Uniform means on (0, 2], floored at 1e-6.
Matrix<double> sample_direct_means(int users, int subcarriers, std::uint64_t seed);

}  // namespace crnalloc
