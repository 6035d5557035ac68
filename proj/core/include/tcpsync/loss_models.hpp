#pragma once

namespace tcpsync {

// Loss probability with a flag marking that the raw model value left [0,1]
// and was clamped (load beyond the model's operating range).
struct LossValue {
  double p = 0.0;
  bool clamped = false;
};

/// Small Drop-Tail buffer at an edge router with constant batch size n:
/// (1/n) (w / (c' tau))^(b/n). n = 1 is the smooth-traffic blocking probability.
LossValue edge_loss_small(double w, double c_prime, double tau, double b, double n = 1.0);

/// Intermediate Drop-Tail buffer at an edge router: (1/n)(1 - (c' tau / w)^n) above capacity, 0 below.
LossValue edge_loss_intermediate(double w, double c_prime, double tau, double n = 1.0);

/// Small Drop-Tail buffer at the core router fed by both sets.
LossValue core_loss_small(double w1, double w2, double tau1, double tau2, double C_tilde, double B,
                          double n_c = 1.0);

/// Intermediate Drop-Tail buffer at the core router fed by both sets.
LossValue core_loss_intermediate(double w1, double w2, double tau1, double tau2, double C_tilde,
                                 double n_c = 1.0);

}  // namespace tcpsync
