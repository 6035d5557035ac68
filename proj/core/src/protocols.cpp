#include "tcpsync/protocols.hpp"

#include <cmath>
#include <string>

#include "tcpsync/errors.hpp"

namespace tcpsync {

namespace {

void require_positive_window(double w, const char* fn) {
  if (!(w > 0.0) || !std::isfinite(w)) {
    throw DomainError(std::string(fn) + ": window must be positive and finite, got " +
                      std::to_string(w));
  }
}

}  // namespace

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::Compound: return "compound";
    case Variant::Reno: return "reno";
    case Variant::Illinois: return "illinois";
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  if (name == "compound") return Variant::Compound;
  if (name == "reno") return Variant::Reno;
  if (name == "illinois") return Variant::Illinois;
  throw DomainError("unknown protocol variant '" + std::string(name) + "'");
}

void ProtocolSpec::validate() const {
  switch (variant) {
    case Variant::Compound:
      if (!(alpha > 0.0)) throw DomainError("compound: alpha must be > 0");
      if (!(beta > 0.0 && beta < 1.0)) throw DomainError("compound: beta must lie in (0,1)");
      if (!(k >= 0.0 && k <= 1.0)) throw DomainError("compound: k must lie in [0,1]");
      if (!(gamma > 0.0)) throw DomainError("compound: gamma must be > 0");
      if (!(zeta > 0.0)) throw DomainError("compound: zeta must be > 0");
      break;
    case Variant::Reno:
      break;
    case Variant::Illinois:
      if (!(alpha_max > 0.0)) throw DomainError("illinois: alpha_max must be > 0");
      if (!(beta_min > 0.0 && beta_min < 1.0)) {
        throw DomainError("illinois: beta_min must lie in (0,1)");
      }
      break;
  }
}

double increase_fn(const ProtocolSpec& spec, double w) {
  require_positive_window(w, "increase_fn");
  switch (spec.variant) {
    case Variant::Compound: return spec.alpha * std::pow(w, spec.k - 1.0);
    case Variant::Reno: return 1.0 / w;
    case Variant::Illinois: return spec.alpha_max / w;
  }
  return 0.0;
}

double decrease_fn(const ProtocolSpec& spec, double w) {
  require_positive_window(w, "decrease_fn");
  switch (spec.variant) {
    case Variant::Compound: return spec.beta * w;
    case Variant::Reno: return w / 2.0;
    case Variant::Illinois: return spec.beta_min * w;
  }
  return 0.0;
}

double increase_derivative(const ProtocolSpec& spec, double w) {
  require_positive_window(w, "increase_derivative");
  switch (spec.variant) {
    case Variant::Compound: return spec.alpha * (spec.k - 1.0) * std::pow(w, spec.k - 2.0);
    case Variant::Reno: return -1.0 / (w * w);
    case Variant::Illinois: return -spec.alpha_max / (w * w);
  }
  return 0.0;
}

double decrease_derivative(const ProtocolSpec& spec, double w) {
  require_positive_window(w, "decrease_derivative");
  switch (spec.variant) {
    case Variant::Compound: return spec.beta;
    case Variant::Reno: return 0.5;
    case Variant::Illinois: return spec.beta_min;
  }
  return 0.0;
}

double g_factor(const ProtocolSpec& spec, double w_star, double p_star) {
  if (!(p_star > 0.0 && p_star < 1.0)) {
    throw DomainError("g_factor: p* must lie in (0,1), got " + std::to_string(p_star));
  }
  const double d_elasticity = w_star * decrease_derivative(spec, w_star) / decrease_fn(spec, w_star);
  const double i_elasticity = w_star * increase_derivative(spec, w_star) / increase_fn(spec, w_star);
  return (d_elasticity - i_elasticity) * (1.0 - p_star);
}

double window_derivative(const ProtocolSpec& spec, double w_now, double w_lag, double p_lag,
                         double tau) {
  if (!(w_lag >= 0.0)) throw DomainError("window_derivative: lagged window must be >= 0");
  if (!(p_lag >= 0.0 && p_lag <= 1.0)) {
    throw DomainError("window_derivative: lagged loss probability must lie in [0,1]");
  }
  if (!(tau > 0.0)) throw DomainError("window_derivative: tau must be > 0");
  const double i = increase_fn(spec, w_now);
  const double d = decrease_fn(spec, w_now);
  return (w_lag / tau) * (i * (1.0 - p_lag) - d * p_lag);
}

}  // namespace tcpsync
