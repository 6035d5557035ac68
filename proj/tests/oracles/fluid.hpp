#pragma once

// Test-side fluid model: window laws, loss models, equilibria by damped
// fixed-point iteration, and finite-difference linearisation of the coupled
// delayed system. Written from the model definitions, independent of the library.

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "characteristic.hpp"

namespace oracle {

enum class Law { Compound, Reno, Illinois };
enum class Buffers { Small, Intermediate };

struct LawParams {
  Law law = Law::Compound;
  double alpha = 0.125, beta = 0.5, k = 0.75;
  double alpha_max = 10.0, beta_min = 0.125;
};

inline double inc(const LawParams& P, double w) {
  switch (P.law) {
    case Law::Compound: return P.alpha * std::pow(w, P.k - 1.0);
    case Law::Reno: return 1.0 / w;
    case Law::Illinois: return P.alpha_max / w;
  }
  return 0.0;
}

inline double dec(const LawParams& P, double w) {
  switch (P.law) {
    case Law::Compound: return P.beta * w;
    case Law::Reno: return 0.5 * w;
    case Law::Illinois: return P.beta_min * w;
  }
  return 0.0;
}

struct Net {
  Buffers buffers = Buffers::Small;
  std::array<double, 2> c{25, 25};  // per-flow edge capacity, pkts/s
  double C = 50;                    // 2 x per-flow core capacity
  std::array<double, 2> tau{0.1, 0.1};
  std::array<double, 2> b{15, 15};
  double B = 15;
  std::array<double, 2> ne{1, 1};
  double nc = 1;
};

inline double clamp01(double p) { return std::min(1.0, std::max(0.0, p)); }

inline double edge_p(const Net& N, int m, double w) {
  const double load = w / (N.c[m] * N.tau[m]);
  if (N.buffers == Buffers::Small) return clamp01(std::pow(load, N.b[m] / N.ne[m]) / N.ne[m]);
  if (load <= 1.0) return 0.0;
  return clamp01((1.0 - std::pow(1.0 / load, N.ne[m])) / N.ne[m]);
}

inline double core_p(const Net& N, double w1, double w2) {
  const double load = (w1 / N.tau[0] + w2 / N.tau[1]) / N.C;
  if (N.buffers == Buffers::Small) return clamp01(std::pow(load, N.B / N.nc) / N.nc);
  if (load <= 1.0) return 0.0;
  return clamp01((1.0 - std::pow(1.0 / load, N.nc)) / N.nc);
}

// dw_m/dt given the current window and both delayed windows.
inline double rhs(const LawParams& P, const Net& N, int m, double w_now, double wl1, double wl2) {
  const double wl = m == 0 ? wl1 : wl2;
  const double p = std::min(1.0, edge_p(N, m, wl) + core_p(N, wl1, wl2));
  return wl / N.tau[m] * (inc(P, w_now) * (1.0 - p) - dec(P, w_now) * p);
}

// Window of set m balancing i(1 - p) = d p at a fixed core loss, by bisection.
inline double balance_window(const LawParams& P, const Net& N, int m, double pc) {
  auto f = [&](double w) {
    const double p = std::min(1.0, edge_p(N, m, w) + pc);
    return inc(P, w) * (1.0 - p) - dec(P, w) * p;
  };
  double lo = 1e-6, hi = 10.0 * N.c[m] * N.tau[m];
  if (f(lo) <= 0.0 || f(hi) >= 0.0) throw std::runtime_error("oracle: balance not bracketed");
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
    if (hi - lo <= 4e-16 * hi) break;
  }
  return 0.5 * (lo + hi);
}

struct CoupledEq {
  double w1 = 0, w2 = 0, pc = 0;
};

// Damped fixed-point iteration on the core loss; the step shrinks whenever
// the update overshoots.
inline CoupledEq coupled_equilibrium(const LawParams& P, const Net& N) {
  double pc = 0.0;
  double theta = 0.5;
  double prev_gap = 1e300;
  CoupledEq e;
  for (int it = 0; it < 100000; ++it) {
    e.w1 = balance_window(P, N, 0, pc);
    e.w2 = balance_window(P, N, 1, pc);
    const double target = core_p(N, e.w1, e.w2);
    const double gap = std::abs(target - pc);
    if (gap <= 1e-15) break;
    if (gap > prev_gap) theta *= 0.5;
    prev_gap = gap;
    pc += theta * (target - pc);
  }
  e.pc = pc;
  return e;
}

// Linearisation of the coupled system about (w1*, w2*) by central differences.
inline LinearDelaySystem linearise(const LawParams& P, const Net& N, const CoupledEq& e) {
  const double w[2] = {e.w1, e.w2};
  LinearDelaySystem sys;
  sys.A.assign(2, std::vector<double>(2, 0.0));
  DelayTerm d1{std::vector<std::vector<double>>(2, std::vector<double>(2, 0.0)), N.tau[0]};
  DelayTerm d2{std::vector<std::vector<double>>(2, std::vector<double>(2, 0.0)), N.tau[1]};
  for (int m = 0; m < 2; ++m) {
    auto F = [&](double now, double l1, double l2) { return rhs(P, N, m, now, l1, l2); };
    const double hn = 1e-6 * w[m];
    sys.A[m][m] = (F(w[m] + hn, w[0], w[1]) - F(w[m] - hn, w[0], w[1])) / (2 * hn);
    const double h1 = 1e-6 * w[0];
    const double h2 = 1e-6 * w[1];
    d1.B[m][0] = (F(w[m], w[0] + h1, w[1]) - F(w[m], w[0] - h1, w[1])) / (2 * h1);
    d2.B[m][1] = (F(w[m], w[0], w[1] + h2) - F(w[m], w[0], w[1] - h2)) / (2 * h2);
  }
  sys.delayed = {d1, d2};
  return sys;
}

}  // namespace oracle
