#include "tcpsync/loss_models.hpp"

#include <cmath>
#include <string>

#include "tcpsync/errors.hpp"
#include "tcpsync/network.hpp"

namespace tcpsync {

namespace {

LossValue clamp_probability(double raw) {
  if (raw > 1.0) return {1.0, true};
  if (raw < 0.0) return {0.0, true};
  return {raw, false};
}

void require_nonnegative(double w, const char* fn) {
  if (!(w >= 0.0)) throw DomainError(std::string(fn) + ": window must be >= 0");
}

// (1/n)(load)^(buffer/n)
LossValue blocking(double load, double buffer, double n) {
  if (load <= 0.0) return {0.0, false};
  return clamp_probability(std::pow(load, buffer / n) / n);
}

// (1/n)((rate^n - capacity^n) / rate^n)^+; smooth traffic is evaluated as (rate - capacity)/rate.
LossValue excess(double rate, double capacity, double n) {
  if (rate <= capacity) return {0.0, false};
  if (n == 1.0) return clamp_probability((rate - capacity) / rate);
  return clamp_probability((1.0 - std::pow(capacity / rate, n)) / n);
}

}  // namespace

std::string_view to_string(Regime r) {
  return r == Regime::SmallBuffer ? "small" : "intermediate";
}

Regime parse_regime(std::string_view name) {
  if (name == "small" || name == "small-buffer") return Regime::SmallBuffer;
  if (name == "intermediate") return Regime::Intermediate;
  throw DomainError("unknown buffer regime '" + std::string(name) + "'");
}

void NetworkParams::validate() const {
  for (int m = 0; m < 2; ++m) {
    if (!(c_prime[m] > 0.0)) throw DomainError("network: edge capacity must be > 0");
    if (!(tau[m] > 0.0)) throw DomainError("network: round-trip time must be > 0");
    if (!(b[m] > 0.0)) throw DomainError("network: edge buffer must be > 0");
    if (!(n_e[m] >= 1.0)) throw DomainError("network: edge burstiness must be >= 1");
  }
  if (!(C_tilde > 0.0)) throw DomainError("network: core capacity must be > 0");
  if (!(B > 0.0)) throw DomainError("network: core buffer must be > 0");
  if (!(n_c >= 1.0)) throw DomainError("network: core burstiness must be >= 1");
}

bool NetworkParams::equally_coupled() const {
  return b[0] == b[1] && c_prime[0] == c_prime[1] && n_e[0] == n_e[1];
}

NetworkParams NetworkParams::single(double c_prime, double tau, double b, double n_e) {
  NetworkParams net;
  net.c_prime = {c_prime, c_prime};
  net.tau = {tau, tau};
  net.b = {b, b};
  net.n_e = {n_e, n_e};
  net.C_tilde = 2.0 * c_prime;
  return net;
}

LossValue edge_loss_small(double w, double c_prime, double tau, double b, double n) {
  require_nonnegative(w, "edge_loss_small");
  return blocking(w / (c_prime * tau), b, n);
}

LossValue edge_loss_intermediate(double w, double c_prime, double tau, double n) {
  require_nonnegative(w, "edge_loss_intermediate");
  return excess(w, c_prime * tau, n);
}

LossValue core_loss_small(double w1, double w2, double tau1, double tau2, double C_tilde, double B,
                          double n_c) {
  require_nonnegative(w1, "core_loss_small");
  require_nonnegative(w2, "core_loss_small");
  return blocking((w1 / tau1 + w2 / tau2) / C_tilde, B, n_c);
}

LossValue core_loss_intermediate(double w1, double w2, double tau1, double tau2, double C_tilde,
                                 double n_c) {
  require_nonnegative(w1, "core_loss_intermediate");
  require_nonnegative(w2, "core_loss_intermediate");
  return excess(w1 / tau1 + w2 / tau2, C_tilde, n_c);
}

}  // namespace tcpsync
