#pragma once

#include <cstdint>
#include <vector>

#include "crnalloc/common.hpp"

namespace crnalloc {

/// Per-realization subcarrier assignment, transmit power and constellation.
/// Invariants: each column of phi has exactly one 1; power >= 0; power > 0
/// only where phi = 1.
struct AllocationPolicy {
  Matrix<std::uint8_t> phi;      // users x subcarriers
  Matrix<double> power;          // watts
  Matrix<double> constellation;  // real M >= 1 (2^bits in discrete mode)

  AllocationPolicy() = default;
  AllocationPolicy(std::size_t users, std::size_t subcarriers)
      : phi(users, subcarriers), power(users, subcarriers), constellation(users, subcarriers, 1.0) {}

  std::size_t users() const noexcept { return phi.rows(); }
  std::size_t subcarriers() const noexcept { return phi.cols(); }

  /// sum_n phi[n,k] P[n,k] for each k.
  std::vector<double> subcarrier_power() const {
    std::vector<double> out(subcarriers(), 0.0);
    for (std::size_t n = 0; n < users(); ++n)
      for (std::size_t k = 0; k < subcarriers(); ++k)
        if (phi(n, k)) out[k] += power(n, k);
    return out;
  }

  double total_power() const {
    double sum = 0.0;
    for (double p : subcarrier_power()) sum += p;
    return sum;
  }
};

}  // namespace crnalloc
