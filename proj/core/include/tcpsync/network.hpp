#pragma once

#include <array>
#include <string_view>

namespace tcpsync {

enum class Regime { SmallBuffer, Intermediate };

std::string_view to_string(Regime r);
Regime parse_regime(std::string_view name);

// Fluid-model network description for two sets of flows sharing one core
// router. Windows are in packets, time in seconds, rates in packets/second.
struct NetworkParams {
  std::array<double, 2> c_prime{25.0, 25.0};  // per-flow edge capacity
  double C_tilde = 50.0;                      // 2 x per-flow core capacity
  std::array<double, 2> tau{1.0, 1.0};        // round-trip time per set
  std::array<double, 2> b{15.0, 15.0};        // edge buffers (packets)
  double B = 15.0;                            // core buffer (packets)
  std::array<double, 2> n_e{1.0, 1.0};        // edge burstiness (packets/batch)
  double n_c = 1.0;                           // core burstiness

  // Per-flow bandwidth-delay product of set m, c'_m tau_m (packets).
  double bdp(int m) const { return c_prime[m] * tau[m]; }

  // Throws DomainError on non-positive capacities, delays, buffers or burstiness < 1.
  void validate() const;

  // Equal buffers, capacities and burstiness on both edges.
  bool equally_coupled() const;

  // Both sets described by set `m`'s parameters (used for single-edge analysis of set m).
  static NetworkParams single(double c_prime, double tau, double b, double n_e = 1.0);
};

}  // namespace tcpsync
