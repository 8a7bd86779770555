#include "crnalloc/modulation.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace crnalloc {

double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double zeta_for_target(double ber_target) {
  if (!(ber_target > 0.0 && ber_target < 0.3)) {
    throw DomainError("BER target must satisfy 0 < xi < 0.3, got " + std::to_string(ber_target));
  }
  return -1.5 / std::log(ber_target / 0.3);
}

double ber_exact(double constellation, double sinr) {
  if (!(constellation >= 2.0)) throw DomainError("ber_exact needs a constellation size M >= 2");
  if (sinr < 0.0) throw DomainError("ber_exact needs a nonnegative SINR");
  const double m = constellation;
  const double ber = 4.0 / std::log2(m) * (1.0 - 1.0 / std::sqrt(m)) * q_function(std::sqrt(3.0 * sinr / (m - 1.0)));
  return std::clamp(ber, 0.0, 1.0);
}

double ber_bound(double constellation, double effective_sinr) {
  if (constellation <= 1.0) return 0.0;
  return 0.3 * std::exp(-1.5 * effective_sinr / (constellation - 1.0));
}

double max_constellation(double zeta, double sinr, double power, double reference_power) {
  if (!(reference_power > 0.0)) throw DomainError("max_constellation needs a positive reference power");
  return 1.0 + zeta * sinr * power / reference_power;
}

int discretize_rate(double constellation) {
  int bits = 0;
  for (int b : kAllowedBits) {
    if (std::ldexp(1.0, b) <= constellation) bits = b;
  }
  return bits;
}

double cutoff_threshold(double mu, double eta, double cross_weight, double zeta) {
  if (mu == 0.0 && eta == 0.0) throw DegenerateError("cutoff threshold undefined for mu = eta = 0");
  return std::numbers::ln2 * (mu + eta * cross_weight) / zeta;
}

}  // namespace crnalloc
