#include "tcpsync/equilibrium.hpp"

#include <cmath>
#include <sstream>

#include "tcpsync/errors.hpp"

namespace tcpsync {

namespace {

constexpr double kLowerBracket = 1e-6;
constexpr double kUpperBracketFactor = 10.0;
constexpr int kMaxBisections = 400;
constexpr int kMaxCoreIterations = 10000;

template <class F>
double bisect_decreasing(F&& residual, double lo, double hi) {
  // residual(lo) > 0 > residual(hi); runs to full double resolution, well past 1e-12 relative width.
  for (int it = 0; it < kMaxBisections; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double r = residual(mid);
    if (r == 0.0) return mid;
    (r > 0.0 ? lo : hi) = mid;
  }
  // Pick the endpoint with the smaller residual.
  return std::abs(residual(lo)) <= std::abs(residual(hi)) ? lo : hi;
}

}  // namespace

LossValue edge_loss(Regime regime, const NetworkParams& net, int m, double w) {
  return regime == Regime::SmallBuffer
             ? edge_loss_small(w, net.c_prime[m], net.tau[m], net.b[m], net.n_e[m])
             : edge_loss_intermediate(w, net.c_prime[m], net.tau[m], net.n_e[m]);
}

LossValue core_loss(Regime regime, const NetworkParams& net, double w1, double w2) {
  return regime == Regime::SmallBuffer
             ? core_loss_small(w1, w2, net.tau[0], net.tau[1], net.C_tilde, net.B, net.n_c)
             : core_loss_intermediate(w1, w2, net.tau[0], net.tau[1], net.C_tilde, net.n_c);
}

double balance_residual(const ProtocolSpec& spec, double w, double p) {
  return increase_fn(spec, w) * (1.0 - p) - decrease_fn(spec, w) * p;
}

EquilibriumState solve_single_with_core_loss(const ProtocolSpec& spec, Regime regime,
                                             const NetworkParams& net, int m, double p_core) {
  auto residual = [&](double w) {
    return balance_residual(spec, w, edge_loss(regime, net, m, w).p + p_core);
  };
  // Below capacity the intermediate edge loses nothing, so without core loss
  // the root must lie above c' tau.
  double lo = kLowerBracket;
  if (regime == Regime::Intermediate && p_core == 0.0) lo = net.bdp(m) * (1.0 + 1e-9);
  const double hi = kUpperBracketFactor * net.bdp(m);
  if (!(residual(lo) > 0.0 && residual(hi) < 0.0)) {
    std::ostringstream os;
    os << "equilibrium: balance residual does not change sign on (" << lo << ", " << hi << ")";
    throw NoRoot(os.str(), lo, hi);
  }
  EquilibriumState st;
  st.w_star = bisect_decreasing(residual, lo, hi);
  st.p_edge_star = edge_loss(regime, net, m, st.w_star).p;
  st.p_core_star = p_core;
  st.residual = balance_residual(spec, st.w_star, st.p_total());
  return st;
}

EquilibriumState solve_single(const ProtocolSpec& spec, Regime regime, const NetworkParams& net,
                              int m) {
  spec.validate();
  net.validate();
  return solve_single_with_core_loss(spec, regime, net, m, 0.0);
}

std::pair<EquilibriumState, EquilibriumState> solve_coupled(const ProtocolSpec& spec, Regime regime,
                                                            const NetworkParams& net) {
  spec.validate();
  net.validate();
  auto at_core = [&](double pc) {
    return std::pair{solve_single_with_core_loss(spec, regime, net, 0, pc),
                     solve_single_with_core_loss(spec, regime, net, 1, pc)};
  };
  auto mismatch = [&](const std::pair<EquilibriumState, EquilibriumState>& s, double pc) {
    return pc - core_loss(regime, net, s.first.w_star, s.second.w_star).p;
  };

  auto finish = [&](std::pair<EquilibriumState, EquilibriumState> s) {
    const double pc = core_loss(regime, net, s.first.w_star, s.second.w_star).p;
    for (auto* st : {&s.first, &s.second}) {
      st->p_core_star = pc;
      st->residual = balance_residual(spec, st->w_star, st->p_total());
    }
    return s;
  };

  auto s0 = at_core(0.0);
  if (mismatch(s0, 0.0) >= 0.0) return finish(s0);  // core idle at the uncoupled equilibria

  // Largest core loss that still admits a positive window for both sets.
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double trial = 0.5 * (lo + hi);
    try {
      auto s = at_core(trial);
      if (mismatch(s, trial) >= 0.0) {
        hi = trial;
        break;
      }
      lo = trial;
    } catch (const NoRoot&) {
      hi = trial;
    }
  }

  std::pair<EquilibriumState, EquilibriumState> best = s0;
  double best_mismatch = mismatch(s0, 0.0);
  for (int it = 0; it < kMaxCoreIterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) return finish(best);
    std::pair<EquilibriumState, EquilibriumState> s;
    try {
      s = at_core(mid);
    } catch (const NoRoot&) {
      hi = mid;
      continue;
    }
    const double f = mismatch(s, mid);
    if (std::abs(f) < std::abs(best_mismatch)) {
      best = s;
      best_mismatch = f;
    }
    if (f == 0.0) return finish(s);
    (f < 0.0 ? lo : hi) = mid;
  }
  throw NoConvergence("coupled equilibrium: core-loss iteration cap reached", 0.5 * (lo + hi),
                      best_mismatch);
}

}  // namespace tcpsync
