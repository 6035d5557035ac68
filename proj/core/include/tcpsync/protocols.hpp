#pragma once

#include <string>
#include <string_view>

namespace tcpsync {

enum class Variant { Compound, Reno, Illinois };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view name);

// Congestion-control variant and its parameters. Fields that do not apply to
// the selected variant are ignored.
struct ProtocolSpec {
  Variant variant = Variant::Compound;

  // Compound
  double alpha = 0.125;
  double beta = 0.5;
  double k = 0.75;
  double gamma = 30.0;  // packets; packet simulator only
  double zeta = 0.5;    // packet simulator only

  // Illinois, negligible-queueing-delay regime
  double alpha_max = 10.0;
  double beta_min = 0.125;

  static ProtocolSpec compound() { return {}; }
  static ProtocolSpec reno() { return ProtocolSpec{.variant = Variant::Reno}; }
  static ProtocolSpec illinois() { return ProtocolSpec{.variant = Variant::Illinois}; }

  // Throws DomainError when the invariants of the selected variant are violated.
  void validate() const;
};

/// Window increment per positive acknowledgement, i(w).
double increase_fn(const ProtocolSpec& spec, double w);

/// Window decrement per detected loss, d(w).
double decrease_fn(const ProtocolSpec& spec, double w);

// Analytic derivatives i'(w) and d'(w).
double increase_derivative(const ProtocolSpec& spec, double w);
double decrease_derivative(const ProtocolSpec& spec, double w);

/// Linearisation factor g(w*) = (w d'/d - w i'/i) * d/(i+d), with d/(i+d)
/// replaced by 1 - p* through the equilibrium balance. Taking p* as input
/// lets both buffer regimes share the routine.
double g_factor(const ProtocolSpec& spec, double w_star, double p_star);

/// Right-hand side of the many-flows fluid model:
/// (w_lag/tau) * [ i(w_now)(1 - p_lag) - d(w_now) p_lag ].
double window_derivative(const ProtocolSpec& spec, double w_now, double w_lag, double p_lag,
                         double tau);

}  // namespace tcpsync
