#include "tcpsync/linear_analysis.hpp"

#include <cmath>

#include "tcpsync/errors.hpp"
#include "tcpsync/loss_models.hpp"

namespace tcpsync {

namespace {

FrequencySummary from_radicand(Regime regime, double radicand) {
  FrequencySummary out;
  out.regime = regime;
  out.radicand = radicand;
  if (radicand >= 0.0) out.omega = std::sqrt(radicand);
  return out;
}

double sq(double x) { return x * x; }

}  // namespace

FrequencySummary intrinsic_frequency(const ProtocolSpec& spec, Regime regime,
                                     const NetworkParams& net, const EquilibriumState& eq,
                                     int m) {
  const double w = eq.w_star;
  const double tau = net.tau[m];
  const double n = net.n_e[m];
  const double i = increase_fn(spec, w);
  const double g = g_factor(spec, w, eq.p_total());
  if (regime == Regime::SmallBuffer) {
    const double radicand = sq(net.b[m] / n) - sq(g);
    return from_radicand(regime, sq(i / tau) * radicand);
  }
  const double d = decrease_fn(spec, w);
  const double delayed_gain = (i + d) * std::pow(net.c_prime[m], n) * std::pow(tau, n - 1.0) /
                              std::pow(w, n);
  return from_radicand(regime, sq(delayed_gain) - sq(i * g / tau));
}

FrequencySummary closed_form_frequency(const ProtocolSpec& spec, Regime regime, double w_star,
                                       double p_star, double tau, double b, double n) {
  if (n != 1.0) {
    throw UnsupportedConfiguration("closed-form frequencies cover smooth traffic (n = 1) only");
  }
  if (!(w_star > 0.0 && tau > 0.0)) throw DomainError("closed_form_frequency: w*, tau must be > 0");
  const double w = w_star;
  const double p = p_star;
  if (regime == Regime::SmallBuffer) {
    switch (spec.variant) {
      case Variant::Compound:
        return from_radicand(regime, sq(spec.alpha * std::pow(w, spec.k - 1.0) / tau) *
                                         (sq(b) - sq(spec.k - 2.0) * sq(1.0 - p)));
      case Variant::Reno:
        return from_radicand(regime, sq(1.0 / (w * tau)) * (sq(b) - 4.0 * sq(1.0 - p)));
      case Variant::Illinois:
        return from_radicand(regime,
                             sq(spec.alpha_max / (w * tau)) * (sq(b) - 4.0 * sq(1.0 - p)));
    }
  }
  switch (spec.variant) {
    case Variant::Compound:
      return from_radicand(regime, sq(spec.beta * w / tau) * (1.0 - sq(spec.k - 2.0) * sq(p)));
    case Variant::Reno:
      return from_radicand(regime, sq(w / (2.0 * tau)) * (1.0 - 4.0 * sq(p)));
    case Variant::Illinois:
      return from_radicand(regime, sq(spec.beta_min * w / tau) * (1.0 - 4.0 * sq(p)));
  }
  return {};
}

CouplingSummary coupling_strength(const ProtocolSpec& spec, Regime regime,
                                  const NetworkParams& net, const EquilibriumState& eq) {
  if (!net.equally_coupled()) {
    throw UnsupportedConfiguration(
        "coupling strength is defined for equally coupled sets (equal b, c', n_e)");
  }
  const double tau = 0.5 * (net.tau[0] + net.tau[1]);
  if (std::abs(net.tau[0] - net.tau[1]) > 0.25 * tau) {
    throw UnsupportedConfiguration("coupling strength assumes nearly equal round-trip times");
  }
  const double w = eq.w_star;
  const double i = increase_fn(spec, w);
  CouplingSummary out;
  out.regime = regime;
  out.tau = tau;
  if (regime == Regime::SmallBuffer) {
    const double p = edge_loss_small(w, net.c_prime[0], tau, net.b[0], net.n_e[0]).p;
    const double pc = core_loss_small(w, w, tau, tau, net.C_tilde, net.B, net.n_c).p;
    out.K = pc > 0.0 ? i / (tau * (1.0 + p / pc)) : 0.0;
    return out;
  }
  const double d = decrease_fn(spec, w);
  out.K = (i + d) * std::pow(net.C_tilde, net.n_c) /
          (std::pow(2.0, net.n_c + 1.0) * std::pow(w, net.n_c) * std::pow(tau, 1.0 - net.n_c));
  return out;
}

double coupling_closed_form_small(const ProtocolSpec& spec, double w_star, double tau,
                                  double c_rtt, double C_rtt, double b, double B) {
  const double w = w_star;
  const double ratio = std::pow(w / c_rtt, b) / std::pow(2.0 * w / C_rtt, B);
  switch (spec.variant) {
    case Variant::Compound:
      return spec.alpha * std::pow(w, spec.k - 1.0) / (tau * (1.0 + ratio));
    case Variant::Reno: return 1.0 / (w * tau * (1.0 + ratio));
    case Variant::Illinois: return spec.alpha_max / (w * tau * (1.0 + ratio));
  }
  return 0.0;
}

double coupling_closed_form_intermediate(const ProtocolSpec& spec, double w_star, double C_tilde) {
  const double w = w_star;
  switch (spec.variant) {
    case Variant::Compound:
      return (spec.alpha * std::pow(w, spec.k - 2.0) + spec.beta) * C_tilde / 4.0;
    case Variant::Reno: return (2.0 / (w * w) + 1.0) * C_tilde / 8.0;
    case Variant::Illinois: return (spec.alpha_max / (w * w) + spec.beta_min) * C_tilde / 4.0;
  }
  return 0.0;
}

}  // namespace tcpsync
