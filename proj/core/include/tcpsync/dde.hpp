#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "tcpsync/equilibrium.hpp"
#include "tcpsync/network.hpp"
#include "tcpsync/protocols.hpp"
#include "tcpsync/sync_solver.hpp"
#include "tcpsync/trace.hpp"

namespace tcpsync {

using HistoryFn = std::function<double(double)>;

struct DdeConfig {
  double dt = 0.0;        // s; 0 selects min(tau) / 500
  double horizon = 10.0;  // s
  // Per-state history on [-tau_max, 0]. Empty entries fall back to the model default:
  // kick * equilibrium for fluid models, omega * t for phase models.
  std::vector<HistoryFn> history;
  std::array<double, 2> kick{1.05, 1.05};
  double transient_fraction = 0.3;  // recorded in the trace metadata for the estimators
  int sample_every = 1;             // keep every n-th integration step
  double w_floor = 1e-9;            // packets; reaching it aborts the run
};

/// Single set of flows behind its own edge router.
Trace simulate_fluid_single(const ProtocolSpec& spec, Regime regime, const NetworkParams& net,
                            const DdeConfig& cfg, int m = 0);

/// Two sets sharing the core router, round-trip times taken from `net.tau`.
/// Columns: w1, w2, p1, p2, pc.
Trace simulate_fluid_coupled(const ProtocolSpec& spec, Regime regime, const NetworkParams& net,
                             const DdeConfig& cfg);

/// Linearisation of the single-set model about `eq`; the state is the deviation dw.
Trace simulate_linearized(const ProtocolSpec& spec, Regime regime, const NetworkParams& net,
                          const EquilibriumState& eq, const DdeConfig& cfg, int m = 0);

enum class PhaseModelKind { SmallEqual, IntermediateEqual, SmallGeneral, IntermediateGeneral };

std::string_view to_string(PhaseModelKind k);
PhaseModelKind parse_phase_model(std::string_view name);

// dθ_m/dt = ω_m - Σ_i coupling[m][i] sin(θ_i(t - τ_i) - θ_m(t))
struct PhaseModel {
  PhaseModelKind kind = PhaseModelKind::IntermediateEqual;
  std::array<double, 2> omega{};
  std::array<double, 2> tau{};
  std::array<std::array<double, 2>, 2> coupling{};

  /// Equally coupled reduction with the coefficients of `p`.
  static PhaseModel equally_coupled(const SyncProblem& p);

  /// Reduction for arbitrary edges: coefficients from the single-edge
  /// equilibria of both sets and their intrinsic frequencies, unless
  /// `omega` overrides them. Throws DomainError when a set has no
  /// intrinsic frequency and no override is given.
  static PhaseModel general(const ProtocolSpec& spec, Regime regime, const NetworkParams& net,
                            std::optional<std::array<double, 2>> omega = std::nullopt);
};

/// Columns: theta1, theta2 (unwrapped), r, psi (NaN where r vanishes).
Trace simulate_phase_oscillators(const PhaseModel& model, const DdeConfig& cfg);

}  // namespace tcpsync
