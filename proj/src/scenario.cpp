#include "crnalloc/scenario.hpp"

#include <cmath>
#include <string>

#include "crnalloc/modulation.hpp"

namespace crnalloc {
namespace {

constexpr double kDirectMeanFloor = 1e-6;

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

std::vector<double> per_primary(const std::vector<double>& values, int primaries, const char* name) {
  require(!values.empty(), std::string(name) + " must not be empty");
  if (values.size() == 1) return std::vector<double>(static_cast<std::size_t>(primaries), values[0]);
  require(values.size() == static_cast<std::size_t>(primaries),
          std::string(name) + " needs one value per primary receiver or a single shared value");
  return values;
}

Complex standard_complex(std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double re = normal(rng);
  const double im = normal(rng);
  return {re, im};
}

}  // namespace

ScenarioConfig reference_scenario() {
  ScenarioConfig cfg;
  cfg.num_users = 3;
  cfg.num_primaries = 1;
  cfg.num_subcarriers = 64;
  cfg.total_power_w = 30.0;
  cfg.interference_limits_w = {10.0};
  cfg.collision_limits = {0.1};
  cfg.ber_target = 1e-2;
  cfg.primary_interference_w = 0.09;
  cfg.direct_means.kind = DirectGainSource::Kind::uniform;
  cfg.direct_means.seed = 2024;
  cfg.cross_mean = {0.05, 0.0};
  cfg.cross_var = 0.1;
  cfg.rng_seed = 20240601;
  return cfg;
}

ScenarioConfig reference_probabilistic_scenario() {
  ScenarioConfig cfg = reference_scenario();
  cfg.total_power_w = 40.0;
  cfg.ber_target = 1e-3;
  cfg.csi_mode = CsiMode::imperfect;
  cfg.constraint_mode = ConstraintMode::probabilistic;
  cfg.cross_mean = {0.0, 0.0};
  cfg.cross_var = 1.0;
  cfg.correlation = 0.5;
  // rho^2 = err / (err + var) with var = 1 and rho = 0.5.
  cfg.error_var = 1.0 / 3.0;
  cfg.interference_limits_w = {20.0};
  return cfg;
}

Scenario::Scenario(ScenarioConfig config) : config_(std::move(config)) {
  const auto& c = config_;
  require(c.num_users > 0, "users must be a positive integer");
  require(c.num_primaries > 0, "primaries must be a positive integer");
  require(c.num_subcarriers > 0, "subcarriers must be a positive integer");
  require(std::isfinite(c.total_power_w) && c.total_power_w >= 0.0, "power.total_w must be >= 0");

  limits_ = per_primary(c.interference_limits_w, c.num_primaries, "interference.limit_w");
  for (double v : limits_) require(std::isfinite(v) && v > 0.0, "interference.limit_w must be > 0");
  collisions_ = per_primary(c.collision_limits, c.num_primaries, "interference.collision_prob");
  for (double v : collisions_) require(v > 0.0 && v < 1.0, "interference.collision_prob must lie in (0, 1)");

  require(c.ber_target > 0.0 && c.ber_target < 0.3,
          "ber.target must satisfy 0 < xi < 0.3 (the 0.3 bound coefficient needs xi/0.3 < 1)");
  require(std::isfinite(c.bandwidth_hz) && c.bandwidth_hz > 0.0, "noise.bandwidth_hz must be > 0");
  require(std::isfinite(c.noise_psd_dbm_hz), "noise.psd_dbm_hz must be finite");
  require(std::isfinite(c.cross_var) && c.cross_var > 0.0, "cross.var must be > 0");
  require(std::isfinite(c.error_var) && c.error_var >= 0.0, "csi.error_var must be >= 0");
  require(c.correlation >= 0.0 && c.correlation <= 1.0, "csi.rho must lie in [0, 1]");
  require(std::isfinite(c.cross_mean.real()) && std::isfinite(c.cross_mean.imag()), "cross mean must be finite");

  if (c.constraint_mode == ConstraintMode::probabilistic) {
    require(c.csi_mode == CsiMode::imperfect, "interference.mode = probabilistic requires csi.mode = imperfect");
    require(c.error_var > 0.0 && c.correlation < 1.0,
            "probabilistic mode needs a non-degenerate posterior (csi.error_var > 0 and csi.rho < 1)");
  }

  const double psd_w_per_hz = std::pow(10.0, (c.noise_psd_dbm_hz - 30.0) / 10.0);
  thermal_noise_w_ = psd_w_per_hz * c.bandwidth_hz / c.num_subcarriers;
  if (c.primary_interference_w) {
    require(std::isfinite(*c.primary_interference_w) && *c.primary_interference_w >= 0.0,
            "noise.primary_w must be >= 0");
    primary_w_ = *c.primary_interference_w;
  } else {
    primary_w_ = thermal_noise_w_;
  }
  require(noise_w() > 0.0, "total noise power must be > 0");

  switch (c.direct_means.kind) {
    case DirectGainSource::Kind::uniform:
      direct_means_ = sample_direct_means(c.num_users, c.num_subcarriers, c.direct_means.seed);
      break;
    case DirectGainSource::Kind::constant:
      require(std::isfinite(c.direct_means.value) && c.direct_means.value > 0.0, "direct.mean must be > 0");
      direct_means_ = Matrix<double>(static_cast<std::size_t>(c.num_users),
                                     static_cast<std::size_t>(c.num_subcarriers), c.direct_means.value);
      break;
    case DirectGainSource::Kind::list: {
      const auto& v = c.direct_means.values;
      require(v.size() == static_cast<std::size_t>(c.num_users) * static_cast<std::size_t>(c.num_subcarriers),
              "direct.means needs users * subcarriers values");
      direct_means_ = Matrix<double>(static_cast<std::size_t>(c.num_users), static_cast<std::size_t>(c.num_subcarriers));
      for (std::size_t i = 0; i < v.size(); ++i) {
        require(std::isfinite(v[i]) && v[i] > 0.0, "direct.means entries must be > 0");
        direct_means_.values()[i] = v[i];
      }
      break;
    }
  }
  zeta_ = zeta_for_target(c.ber_target);
}

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream, std::uint64_t domain) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    static_cast<std::uint32_t>(domain), static_cast<std::uint32_t>(domain >> 32)};
  return std::mt19937_64(seq);
}

ChannelRealization sample_realization(const Scenario& scenario, std::uint64_t stream_index) {
  const auto& cfg = scenario.config();
  const auto users = static_cast<std::size_t>(scenario.users());
  const auto prx = static_cast<std::size_t>(scenario.primaries());
  const auto carriers = static_cast<std::size_t>(scenario.subcarriers());
  auto rng = make_stream(cfg.rng_seed, stream_index);

  ChannelRealization r;
  r.direct_power = Matrix<double>(users, carriers);
  for (std::size_t n = 0; n < users; ++n) {
    for (std::size_t k = 0; k < carriers; ++k) {
      std::exponential_distribution<double> exp_dist(1.0 / scenario.direct_means()(n, k));
      r.direct_power(n, k) = exp_dist(rng);
    }
  }

  r.cross_true = Matrix<Complex>(prx, carriers);
  r.cross_est = Matrix<Complex>(prx, carriers);
  r.cross_err = Matrix<Complex>(prx, carriers);
  const double est_sd = std::sqrt(cfg.cross_var);
  const double err_sd = std::sqrt(cfg.error_var);
  const double rho = cfg.correlation;
  const double rho_c = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  for (std::size_t m = 0; m < prx; ++m) {
    for (std::size_t k = 0; k < carriers; ++k) {
      const Complex z1 = standard_complex(rng);
      const Complex z2 = standard_complex(rng);
      const Complex est = cfg.cross_mean + est_sd * z1;
      if (cfg.csi_mode == CsiMode::perfect) {
        r.cross_est(m, k) = est;
        r.cross_err(m, k) = Complex{};
        r.cross_true(m, k) = est;
      } else {
        const Complex err = err_sd * (rho * z1 + rho_c * z2);
        r.cross_est(m, k) = est;
        r.cross_err(m, k) = err;
        r.cross_true(m, k) = est + err;
      }
    }
  }
  return r;
}

PosteriorCrossStats posterior_stats(const Scenario& scenario, const Matrix<Complex>& cross_est) {
  const auto& cfg = scenario.config();
  if (cfg.csi_mode != CsiMode::imperfect) {
    throw ModeError("posterior cross-link statistics need csi.mode = imperfect");
  }
  const double rho2 = cfg.correlation * cfg.correlation;
  PosteriorCrossStats post;
  post.mean = Matrix<Complex>(cross_est.rows(), cross_est.cols());
  for (std::size_t i = 0; i < cross_est.size(); ++i) {
    post.mean.values()[i] = (1.0 + rho2) * cross_est.values()[i];
  }
  post.variance = (1.0 - rho2) * cfg.error_var;
  return post;
}

Matrix<double> sample_direct_means(int users, int subcarriers, std::uint64_t seed) {
  Matrix<double> means(static_cast<std::size_t>(users), static_cast<std::size_t>(subcarriers));
  auto rng = make_stream(seed, 0, /*domain=*/7);
  std::uniform_real_distribution<double> uniform(0.0, 2.0);
  for (double& v : means.values()) {
    // uniform gives [0, 2); reflecting maps it onto (0, 2].
    v = std::max(kDirectMeanFloor, 2.0 - uniform(rng));
  }
  return means;
}

}  // namespace crnalloc
