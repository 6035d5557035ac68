#pragma once

// Locked states of two delay-coupled oscillators found by brute force: a
// dense (Omega, phi0) grid seeds a damped Newton iteration on the two
// locking relations, written out directly from the locking conditions.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace oracle {

struct Locking {
  bool small = false;
  double omega1 = 0, omega2 = 0, K = 0, tau = 0.1;
  double B = 1, b = 1, nc = 1, ne = 1;

  // Coefficient multiplying sin(phi0) cos(Omega tau) in the phase relation.
  double phase_gain() const { return small ? K * B / nc : 2.0 * K; }

  // Frequency relation, residual form.
  double f(double W, double phi) const {
    if (small) {
      return W - omega1 - K * (B / (2 * nc) - b / ne) * std::sin(W * tau) -
             K * B / (2 * nc) * std::sin(W * tau + phi);
    }
    return W - omega1 - K * std::sin(W * tau) - K * std::sin(W * tau + phi);
  }

  // Phase relation, residual form.
  double g(double W, double phi) const {
    return phase_gain() * std::sin(phi) * std::cos(W * tau) - (omega2 - omega1);
  }

  double scale(double W) const {
    const double k = small ? K * (B / nc + b / ne) : 2.0 * K;
    return std::max({1.0, std::abs(W), std::abs(omega1), std::abs(omega2), k});
  }
};

struct LockRoot {
  double Omega = 0, phi0 = 0;
};

inline double wrap(double x) {
  const double two_pi = 2.0 * std::numbers::pi;
  x = std::fmod(x + std::numbers::pi, two_pi);
  if (x < 0) x += two_pi;
  return x - std::numbers::pi;
}

inline bool newton(const Locking& L, double& W, double& phi) {
  for (int it = 0; it < 200; ++it) {
    const double f = L.f(W, phi), g = L.g(W, phi);
    const double s = L.scale(W);
    if (std::hypot(f, g) <= 1e-13 * s) return true;
    const double h = 1e-7 * std::max(1.0, std::abs(W));
    const double hp = 1e-7;
    const double fW = (L.f(W + h, phi) - L.f(W - h, phi)) / (2 * h);
    const double gW = (L.g(W + h, phi) - L.g(W - h, phi)) / (2 * h);
    const double fp = (L.f(W, phi + hp) - L.f(W, phi - hp)) / (2 * hp);
    const double gp = (L.g(W, phi + hp) - L.g(W, phi - hp)) / (2 * hp);
    const double det = fW * gp - fp * gW;
    if (det == 0.0) return false;
    double dW = (f * gp - fp * g) / det;
    double dp = (fW * g - f * gW) / det;
    double lam = 1.0;
    const double r0 = std::hypot(f, g);
    while (lam > 1e-6) {
      const double W1 = W - lam * dW, p1 = phi - lam * dp;
      if (std::hypot(L.f(W1, p1), L.g(W1, p1)) < r0) {
        W = W1;
        phi = p1;
        break;
      }
      lam *= 0.5;
    }
    if (lam <= 1e-6) return false;
  }
  return std::hypot(L.f(W, phi), L.g(W, phi)) <= 1e-10 * L.scale(W);
}

// All roots with Omega in (0, Omega_max], deduplicated.
inline std::vector<LockRoot> brute_force_roots(const Locking& L, double Omega_max, int nW = 800,
                                               int nP = 240) {
  std::vector<LockRoot> roots;
  for (int i = 1; i <= nW; ++i) {
    for (int j = 0; j < nP; ++j) {
      double W = Omega_max * i / nW;
      double phi = -std::numbers::pi + 2.0 * std::numbers::pi * (j + 0.5) / nP;
      // Only cells where both residuals are already small are worth polishing.
      const double s = L.scale(W);
      if (std::abs(L.f(W, phi)) > 0.05 * s || std::abs(L.g(W, phi)) > 0.05 * s) continue;
      if (!newton(L, W, phi)) continue;
      if (!(W > 0.0 && W <= Omega_max)) continue;
      phi = wrap(phi);
      bool seen = false;
      for (const auto& r : roots) {
        if (std::abs(r.Omega - W) <= 1e-7 * std::max(1.0, W) && std::abs(wrap(r.phi0 - phi)) <= 1e-6) {
          seen = true;
          break;
        }
      }
      if (!seen) roots.push_back({W, phi});
    }
  }
  std::sort(roots.begin(), roots.end(),
            [](const LockRoot& a, const LockRoot& b) { return a.Omega < b.Omega; });
  return roots;
}

}  // namespace oracle
