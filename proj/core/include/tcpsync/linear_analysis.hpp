#pragma once

#include <optional>

#include "tcpsync/equilibrium.hpp"
#include "tcpsync/network.hpp"
#include "tcpsync/protocols.hpp"

namespace tcpsync {

// Outcome of a harmonic-balance evaluation. `omega` is empty when the
// radicand is negative, i.e. the linearisation has no purely imaginary root.
struct FrequencySummary {
  Regime regime = Regime::SmallBuffer;
  double radicand = 0.0;  // omega^2 before the square root
  std::optional<double> omega;  // rad/s

  bool feasible() const { return omega.has_value(); }
};

struct CouplingSummary {
  Regime regime = Regime::SmallBuffer;
  double K = 0.0;    // 1/s
  double tau = 0.0;  // common round-trip time used in the reduction
};

/// Intrinsic frequency of set `m` about the equilibrium `eq`:
///   small buffers:        (i/tau) sqrt((b/n)^2 - g^2)
///   intermediate buffers: sqrt(((i+d) c'^n tau^(n-1) / w^n)^2 - (i g / tau)^2)
FrequencySummary intrinsic_frequency(const ProtocolSpec& spec, Regime regime,
                                     const NetworkParams& net, const EquilibriumState& eq,
                                     int m = 0);

/// Per-protocol closed forms for smooth traffic. Throws UnsupportedConfiguration when n != 1.
FrequencySummary closed_form_frequency(const ProtocolSpec& spec, Regime regime, double w_star,
                                       double p_star, double tau, double b, double n = 1.0);

/// Coupling strength of the equally coupled reduction, evaluated at the
/// single-edge equilibrium `eq` (weak coupling: the coupled equilibrium is
/// close to it).
///   small:        K_s = i(w*) / (tau (1 + p(w*)/p_c(w*, w*)))
///   intermediate: K_i = (i + d) C~^n_c / (2^(n_c+1) w*^n_c tau^(1 - n_c))
/// tau is the mean of the two round-trip times. Throws UnsupportedConfiguration
/// for unequal edge buffers, capacities or burstiness, or round-trip times that
/// differ by more than 25%.
CouplingSummary coupling_strength(const ProtocolSpec& spec, Regime regime,
                                  const NetworkParams& net, const EquilibriumState& eq);

/// Small-buffer coupling strength in per-protocol closed form with smooth
/// traffic. `c_rtt` and `C_rtt` are the per-flow edge and core capacities
/// expressed in packets per round trip (c' tau and C~ tau).
double coupling_closed_form_small(const ProtocolSpec& spec, double w_star, double tau,
                                  double c_rtt, double C_rtt, double b, double B);

/// Intermediate-buffer coupling strength in per-protocol closed form, n_c = 1.
double coupling_closed_form_intermediate(const ProtocolSpec& spec, double w_star, double C_tilde);

}  // namespace tcpsync
