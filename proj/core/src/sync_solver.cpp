#include "tcpsync/sync_solver.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "tcpsync/errors.hpp"

namespace tcpsync {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kBackSubstitutionTol = 1e-8;

// Phase relation solved for sin φ0 at a given Ω; the sign of zero is kept
// positive so that swapping ω1 and ω2 mirrors φ0 exactly.
struct PhaseSolution {
  double s = 0.0;
  bool feasible = false;
};

class ReducedSystem {
 public:
  explicit ReducedSystem(const SyncProblem& p)
      : p_(p),
        cross_(p.cross_coupling()),
        self_(p.self_coupling()),
        detuning_(p.omega2 - p.omega1),
        omega_bar_(0.5 * (p.omega1 + p.omega2)) {}

  PhaseSolution phase(double Omega) const {
    if (detuning_ == 0.0) return {0.0, true};
    const double c = std::cos(Omega * p_.tau);
    if (c == 0.0) return {0.0, false};
    const double s = detuning_ / (2.0 * cross_ * c);
    return {s, std::abs(s) <= 1.0};
  }

  double excess(double Omega) const {
    const double c = std::cos(Omega * p_.tau);
    if (c == 0.0) return detuning_ == 0.0 ? -1.0 : 1.0;
    return std::abs(detuning_ / (2.0 * cross_ * c)) - 1.0;
  }

  static double phi0(double s, Branch br) {
    s = std::clamp(s, -1.0, 1.0);
    const double a = std::asin(s);
    if (br == Branch::InPhase) return a;
    return std::copysign(kPi, s) - a;
  }

  static double cos_phi0(double s, Branch br) {
    s = std::clamp(s, -1.0, 1.0);
    const double c = std::sqrt(1.0 - s * s);
    return br == Branch::InPhase ? c : -c;
  }

  // Ω - ω̄ - sin(Ωτ)(self + cross cos φ0), valid where the phase relation is feasible.
  double f(double Omega, Branch br) const {
    const auto ph = phase(Omega);
    return Omega - omega_bar_ - std::sin(Omega * p_.tau) * (self_ + cross_ * cos_phi0(ph.s, br));
  }

  SyncState make_state(double Omega, Branch br) const {
    const auto ph = phase(Omega);
    SyncState st;
    st.Omega = Omega;
    st.phi0 = phi0(ph.s, br);
    st.branch = br;
    st.stability_value = stability_value(p_, Omega);
    const double tol = 1e-14 * (std::abs(self_) + std::abs(cross_));
    st.stability = st.stability_value < -tol  ? Stability::Stable
                   : st.stability_value > tol ? Stability::Unstable
                                              : Stability::Marginal;
    st.residual_freq = frequency_residual(p_, Omega, st.phi0);
    st.residual_phase = phase_residual(p_, Omega, st.phi0);
    st.order_r = std::cos(0.5 * st.phi0);
    return st;
  }

 private:
  const SyncProblem& p_;
  double cross_;
  double self_;
  double detuning_;
  double omega_bar_;
};

// Bisection to full resolution on a sign-changing bracket.
template <class F>
double bisect(F&& f, double lo, double hi, double f_lo) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = fm;
    } else {
      hi = mid;
    }
  }
  return std::abs(f(lo)) <= std::abs(f(hi)) ? lo : hi;
}

double wrap_pi(double x) {
  x = std::remainder(x, 2.0 * kPi);
  return x <= -kPi ? x + 2.0 * kPi : x;
}

}  // namespace

double SyncProblem::cross_coupling() const {
  return regime == Regime::Intermediate ? K : K * B / (2.0 * n_c);
}

double SyncProblem::self_coupling() const {
  return regime == Regime::Intermediate ? K : K * (B / (2.0 * n_c) - b / n_e);
}

double residual_scale(const SyncProblem& p, double Omega) {
  return std::max({1.0, std::abs(Omega), std::abs(p.omega1), std::abs(p.omega2),
                   std::abs(p.cross_coupling()) + std::abs(p.self_coupling())});
}

double frequency_residual(const SyncProblem& p, double Omega, double phi0) {
  const double x = Omega * p.tau;
  const double r = Omega - p.omega1 - p.self_coupling() * std::sin(x) -
                   p.cross_coupling() * std::sin(x + phi0);
  return r / residual_scale(p, Omega);
}

double phase_residual(const SyncProblem& p, double Omega, double phi0) {
  const double r = 2.0 * p.cross_coupling() * std::sin(phi0) * std::cos(Omega * p.tau) -
                   (p.omega2 - p.omega1);
  return r / residual_scale(p, Omega);
}

double stability_value(const SyncProblem& p, double Omega) {
  return (p.self_coupling() + p.cross_coupling()) * std::cos(Omega * p.tau);
}

std::vector<SyncState> solve_sync(const SyncProblem& p, const SyncOptions& opt) {
  if (!(p.tau > 0.0)) throw DomainError("solve_sync: tau must be > 0");
  if (!(p.K >= 0.0)) throw DomainError("solve_sync: coupling strength must be >= 0");
  if (opt.grid_points < 2) throw DomainError("solve_sync: grid needs at least two points");
  if (p.regime == Regime::SmallBuffer && !(p.B > 0.0 && p.b > 0.0 && p.n_c >= 1.0 && p.n_e >= 1.0)) {
    throw DomainError("solve_sync: small-buffer parameters B, b > 0 and n_c, n_e >= 1 required");
  }

  const ReducedSystem sys(p);
  std::vector<SyncState> roots;

  if (p.cross_coupling() == 0.0) {
    // Uncoupled: a lock exists only without detuning, at Ω = ω.
    if (p.omega1 == p.omega2 && p.omega1 > 0.0) roots.push_back(sys.make_state(p.omega1, Branch::InPhase));
    return roots;
  }

  const double omega_bar = 0.5 * (p.omega1 + p.omega2);
  const double omega_max =
      opt.omega_max.value_or(std::max(4.0 * std::abs(omega_bar), 4.0 * kPi / p.tau));
  const int n = opt.grid_points;

  // Sample points: the uniform grid plus refined feasibility boundaries.
  std::vector<double> pts;
  std::vector<bool> feas;
  pts.reserve(n + 16);
  double prev = omega_max / n;
  bool prev_feasible = sys.phase(prev).feasible;
  pts.push_back(prev);
  feas.push_back(prev_feasible);
  for (int j = 2; j <= n; ++j) {
    const double cur = omega_max * j / n;
    const bool cur_feasible = sys.phase(cur).feasible;
    if (cur_feasible != prev_feasible) {
      // Locate |s| = 1 between prev and cur; the feasible side is kept.
      double lo = prev;
      double hi = cur;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (sys.phase(mid).feasible == prev_feasible ? lo : hi) = mid;
      }
      const double edge = prev_feasible ? lo : hi;
      pts.push_back(edge);
      feas.push_back(true);
    }
    pts.push_back(cur);
    feas.push_back(cur_feasible);
    prev = cur;
    prev_feasible = cur_feasible;
  }

  // A bracket can straddle an infeasible gap narrower than the grid spacing;
  // such candidates fail back-substitution and are discarded.
  auto accept = [&](double Om, Branch br) {
    if (!sys.phase(Om).feasible && std::abs(sys.excess(Om)) > 1e-12) return;
    auto st = sys.make_state(Om, br);
    if (std::abs(st.residual_freq) <= kBackSubstitutionTol &&
        std::abs(st.residual_phase) <= kBackSubstitutionTol) {
      roots.push_back(st);
    }
  };
  for (Branch br : {Branch::InPhase, Branch::AntiPhase}) {
    auto f = [&](double Om) { return sys.f(Om, br); };
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (!feas[j]) continue;
      const double fj = f(pts[j]);
      if (fj == 0.0) {
        accept(pts[j], br);
        continue;
      }
      if (j + 1 < pts.size() && feas[j + 1]) {
        const double fk = f(pts[j + 1]);
        if (fk != 0.0 && (fj < 0.0) != (fk < 0.0)) accept(bisect(f, pts[j], pts[j + 1], fj), br);
      }
    }
  }

  std::sort(roots.begin(), roots.end(), [](const SyncState& a, const SyncState& b) {
    return a.Omega < b.Omega || (a.Omega == b.Omega && a.phi0 < b.phi0);
  });
  // Both branches meet where |sin φ0| = 1; drop duplicates there.
  std::vector<SyncState> unique;
  for (const auto& r : roots) {
    if (!unique.empty()) {
      const auto& u = unique.back();
      if (std::abs(u.Omega - r.Omega) <= 1e-10 * std::max(1.0, r.Omega) &&
          std::abs(wrap_pi(u.phi0 - r.phi0)) <= 1e-6) {
        continue;
      }
    }
    unique.push_back(r);
  }
  return unique;
}

std::vector<SyncState> solve_sync_small(const SyncProblem& p, const SyncOptions& opt) {
  if (p.regime != Regime::SmallBuffer) {
    throw UnsupportedConfiguration("solve_sync_small: problem is not in the small-buffer regime");
  }
  return solve_sync(p, opt);
}

std::vector<SyncState> solve_sync_intermediate(const SyncProblem& p, const SyncOptions& opt) {
  if (p.regime != Regime::Intermediate) {
    throw UnsupportedConfiguration(
        "solve_sync_intermediate: problem is not in the intermediate-buffer regime");
  }
  return solve_sync(p, opt);
}

std::optional<SyncState> primary_state(const std::vector<SyncState>& roots) {
  for (const auto& r : roots) {
    if (r.stable() && r.branch == Branch::InPhase) return r;
  }
  return std::nullopt;
}

std::optional<SyncState> dominant_state(const std::vector<SyncState>& roots) {
  std::optional<SyncState> best;
  for (const auto& r : roots) {
    if (!r.stable() || r.branch != Branch::InPhase) continue;
    if (!best || r.stability_value < best->stability_value) best = r;
  }
  return best;
}

CouplingRange coupling_range(const SyncProblem& problem, const KSweep& sweep,
                             const SyncOptions& opt) {
  if (sweep.steps < 1 || !(sweep.K_to >= sweep.K_from)) {
    throw DomainError("coupling_range: sweep needs K_to >= K_from and at least one step");
  }
  auto roots_at = [&](double K) {
    SyncProblem p = problem;
    p.K = K;
    return solve_sync(p, opt);
  };
  auto has_root = [&](double K) { return !roots_at(K).empty(); };
  auto all_unstable = [&](double K) {
    const auto r = roots_at(K);
    return !r.empty() && !primary_state(r).has_value();
  };
  // Bisection for the switching point of pred on (lo, hi], pred(hi) true.
  auto refine = [&](auto&& pred, double lo, double hi) {
    for (int it = 0; it < sweep.refine_iterations; ++it) {
      const double mid = 0.5 * (lo + hi);
      (pred(mid) ? hi : lo) = mid;
    }
    return hi;
  };

  CouplingRange out;
  const double dK = (sweep.K_to - sweep.K_from) / sweep.steps;
  for (int j = 0; j <= sweep.steps; ++j) {
    const double K = sweep.K_from + dK * j;
    const double K_prev = K - dK;
    if (!out.K_c) {
      if (!has_root(K)) continue;
      out.K_c = j > 0 ? refine(has_root, K_prev, K) : K;
      if (K > *out.K_c && all_unstable(K)) {
        out.K_u = refine(all_unstable, *out.K_c, K);
        return out;
      }
      continue;
    }
    if (all_unstable(K)) {
      out.K_u = refine(all_unstable, std::max(K_prev, *out.K_c), K);
      return out;
    }
  }
  return out;
}

OrderParameter order_parameter(double theta1, double theta2) {
  const std::complex<double> z = 0.5 * (std::polar(1.0, theta1) + std::polar(1.0, theta2));
  OrderParameter out;
  out.r = std::abs(z);
  if (out.r > 1e-12) out.psi = std::arg(z);
  return out;
}

}  // namespace tcpsync
