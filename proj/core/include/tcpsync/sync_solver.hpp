#pragma once

#include <optional>
#include <vector>

#include "tcpsync/network.hpp"

namespace tcpsync {

// Two equally coupled delayed phase oscillators.
//   intermediate: dθ_m/dt = ω_m - K Σ_j sin(θ_j(t-τ) - θ_m(t))
//   small:        dθ_m/dt = ω_m - (B/2n_c) K Σ_j sin(θ_j(t-τ) - θ_m(t))
//                                + (b/n_e) K sin(θ_m(t-τ) - θ_m(t))
struct SyncProblem {
  Regime regime = Regime::Intermediate;
  double omega1 = 0.0;  // rad/s
  double omega2 = 0.0;  // rad/s
  double K = 0.0;       // 1/s
  double tau = 0.1;     // s
  // Small-buffer extras.
  double B = 1.0;
  double b = 1.0;
  double n_c = 1.0;
  double n_e = 1.0;

  // Coefficient of sin(θ_other(t-τ) - θ_m(t)) with the sign convention dθ/dt = ω - coeff*sin(...).
  double cross_coupling() const;
  // Net coefficient of sin(θ_m(t-τ) - θ_m(t)), same convention.
  double self_coupling() const;
};

enum class Stability { Stable, Marginal, Unstable };

enum class Branch { InPhase, AntiPhase };  // |φ0| <= π/2 or > π/2

// Phase-locked state θ1 = Ωt, θ2 = Ωt - φ0.
struct SyncState {
  double Omega = 0.0;  // rad/s
  double phi0 = 0.0;   // rad, in (-π, π]
  Stability stability = Stability::Unstable;
  double stability_value = 0.0;  // (self + cross) cos(Ωτ); negative means stable
  double residual_freq = 0.0;    // scaled back-substitution residuals
  double residual_phase = 0.0;
  double order_r = 1.0;  // cos(φ0/2)
  Branch branch = Branch::InPhase;

  bool stable() const { return stability == Stability::Stable; }
};

struct SyncOptions {
  int grid_points = 10000;
  std::optional<double> omega_max;  // default max(4 ω̄, 4π/τ)
};

// Scale used to make the back-substitution residuals dimensionless.
double residual_scale(const SyncProblem& p, double Omega);

// Ω - ω1 - self sin(Ωτ) - cross sin(Ωτ + φ0), divided by residual_scale.
double frequency_residual(const SyncProblem& p, double Omega, double phi0);

// 2 cross sin(φ0) cos(Ωτ) - (ω2 - ω1), divided by residual_scale.
double phase_residual(const SyncProblem& p, double Omega, double phi0);

// Stability predicate value (self + cross) cos(Ωτ).
double stability_value(const SyncProblem& p, double Omega);

/// All phase-locked states with Ω in (0, Ω_max], sorted by Ω. φ0 is
/// eliminated in closed form from the phase relation (both arcsine
/// branches), the remaining scalar equation in Ω is sign-scanned on a
/// uniform grid and each bracket is bisected to full precision. Feasibility
/// boundaries |sin φ0| = 1 are located explicitly so roots close to critical
/// coupling are not missed. An empty list means no synchronised state.
std::vector<SyncState> solve_sync(const SyncProblem& p, const SyncOptions& opt = {});

std::vector<SyncState> solve_sync_small(const SyncProblem& p, const SyncOptions& opt = {});
std::vector<SyncState> solve_sync_intermediate(const SyncProblem& p, const SyncOptions& opt = {});

// Smallest-Ω stable state on the in-phase branch, if any. The stability
// inequality is the small-φ0 criterion; anti-phase roots that satisfy it are
// reported by solve_sync but are not attracting in the oscillator model.
std::optional<SyncState> primary_state(const std::vector<SyncState>& roots);

// Stable in-phase state with the most negative stability value; ties keep the smaller Ω.
std::optional<SyncState> dominant_state(const std::vector<SyncState>& roots);

struct KSweep {
  double K_from = 0.0;
  double K_to = 1.0;
  int steps = 100;
  int refine_iterations = 40;  // bisection between bracketing sweep points; 0 disables
};

struct CouplingRange {
  std::optional<double> K_c;  // smallest K with a synchronised state
  std::optional<double> K_u;  // smallest K > K_c with roots but no primary_state
};

/// Sweeps K over `sweep` with the remaining fields of `problem` fixed.
CouplingRange coupling_range(const SyncProblem& problem, const KSweep& sweep,
                             const SyncOptions& opt = {});

struct OrderParameter {
  double r = 0.0;
  std::optional<double> psi;  // undefined when r = 0
};

/// r e^{jψ} = (e^{jθ1} + e^{jθ2}) / 2.
OrderParameter order_parameter(double theta1, double theta2);

}  // namespace tcpsync
