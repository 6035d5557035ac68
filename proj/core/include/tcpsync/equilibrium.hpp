#pragma once

#include <utility>

#include "tcpsync/loss_models.hpp"
#include "tcpsync/network.hpp"
#include "tcpsync/protocols.hpp"

namespace tcpsync {

struct EquilibriumState {
  double w_star = 0.0;       // packets
  double p_edge_star = 0.0;  // edge loss at w*
  double p_core_star = 0.0;  // core loss at the coupled equilibrium, 0 for a single edge
  double residual = 0.0;     // i(w*)(1 - p) - d(w*) p, p = p_edge + p_core

  double p_total() const { return p_edge_star + p_core_star; }
};

// Edge loss of set m at window w in the given regime.
LossValue edge_loss(Regime regime, const NetworkParams& net, int m, double w);

// Core loss at windows (w1, w2) in the given regime.
LossValue core_loss(Regime regime, const NetworkParams& net, double w1, double w2);

// Balance of the fluid-model bracket: i(w)(1 - p) - d(w) p.
double balance_residual(const ProtocolSpec& spec, double w, double p);

/// Equilibrium window of set `m` behind its own edge router, no core loss.
/// Bracketed bisection on the monotone balance residual over (1e-6, 10 c' tau).
/// Throws NoRoot when the residual keeps one sign over the bracket.
EquilibriumState solve_single(const ProtocolSpec& spec, Regime regime, const NetworkParams& net,
                              int m = 0);

/// Same, at a fixed additional core loss p_core (used by the coupled solver).
EquilibriumState solve_single_with_core_loss(const ProtocolSpec& spec, Regime regime,
                                             const NetworkParams& net, int m, double p_core);

/// Coupled equilibrium of both sets through the shared core router, using
/// the round-trip times in `net.tau`. Each returned state carries its own
/// edge loss and the common core loss.
///
/// The core loss is found by bisection on F(p) = p - P_core(w1(p), w2(p)),
/// which is strictly increasing because each w_m(p) decreases in p.
/// Throws NoConvergence if the iteration cap is reached.
std::pair<EquilibriumState, EquilibriumState> solve_coupled(const ProtocolSpec& spec, Regime regime,
                                                            const NetworkParams& net);

}  // namespace tcpsync
