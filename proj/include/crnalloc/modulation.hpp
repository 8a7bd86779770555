#pragma once

#include <array>

#include "crnalloc/scenario.hpp"

namespace crnalloc {

/// Discrete-rate alphabet in bits per symbol.
inline constexpr std::array<int, 5> kAllowedBits{2, 4, 6, 8, 10};

/// Gaussian tail probability Q(x).
double q_function(double x);

/// zeta = -1.5 / ln(xi / 0.3). Throws DomainError unless 0 < xi < 0.3.
double zeta_for_target(double ber_target);

struct RatePolicy {
  double zeta = 0.0;
  RateMode rate_mode = RateMode::continuous;

  static RatePolicy from_target(double ber_target, RateMode mode) {
    return {zeta_for_target(ber_target), mode};
  }
};

/// Square-MQAM BER approximation
///   (4 / log2 M) (1 - 1/sqrt(M)) Q(sqrt(3 gamma / (M - 1))),
/// clamped to [0, 1].
double ber_exact(double constellation, double sinr);

/// Exponential bound 0.3 exp(-1.5 gamma_eff / (M - 1)); 0 when M = 1.
double ber_bound(double constellation, double effective_sinr);

/// Largest real constellation meeting the target under the bound:
/// 1 + zeta * gamma * power / reference_power.
double max_constellation(double zeta, double sinr, double power, double reference_power);

/// Largest allowed b with 2^b <= M, or 0 below 4-QAM.
int discretize_rate(double constellation);

/// ln2 (mu + eta * cross_weight) / zeta. Compared against the unit-power
/// SINR |Hss|^2 / sigma^2; transmission happens strictly above it.
double cutoff_threshold(double mu, double eta, double cross_weight, double zeta);

}  // namespace crnalloc
