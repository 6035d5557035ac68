#include "tcpsync/dde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "tcpsync/errors.hpp"
#include "tcpsync/linear_analysis.hpp"
#include "tcpsync/serialization.hpp"

namespace tcpsync {

namespace {

// Delay expressed in integration steps. Integer lags read stored samples
// directly; fractional lags interpolate between the two neighbours.
struct Lag {
  double steps = 0.0;
  long whole = 0;       // ceil(steps)
  double frac = 0.0;    // whole - steps, weight of the newer sample
  bool integral = false;
};

Lag make_lag(double tau, double dt) {
  Lag lag;
  lag.steps = tau / dt;
  const double r = std::round(lag.steps);
  if (std::abs(lag.steps - r) <= 1e-9 * std::max(1.0, r)) {
    lag.whole = static_cast<long>(r);
    lag.integral = true;
  } else {
    lag.whole = static_cast<long>(std::ceil(lag.steps));
    lag.frac = static_cast<double>(lag.whole) - lag.steps;
  }
  return lag;
}

// Fixed-step Heun integrator for systems whose right-hand side reads
// state variable v delayed by lag k.
class DelayIntegrator {
 public:
  DelayIntegrator(std::size_t dim, double dt, std::vector<double> delays,
                  std::vector<HistoryFn> history)
      : dim_(dim), dt_(dt), history_(std::move(history)) {
    long longest = 0;
    for (double tau : delays) {
      if (!(tau >= dt)) {
        throw DomainError("delay " + format_double(tau) + " s is shorter than the step " +
                          format_double(dt) + " s");
      }
      lags_.push_back(make_lag(tau, dt));
      longest = std::max(longest, lags_.back().whole);
    }
    capacity_ = static_cast<std::size_t>(longest) + 3;
    ring_.assign(capacity_ * dim_, 0.0);
    y_.resize(dim_);
    k1_.resize(dim_);
    pred_.resize(dim_);
    k2_.resize(dim_);
    for (std::size_t v = 0; v < dim_; ++v) store(0, v, history_[v](0.0));
  }

  double time(long step) const { return static_cast<double>(step) * dt_; }

  // State v delayed by lag k, seen from step position `at` (n or n + 1).
  double delayed(std::size_t v, std::size_t k, long at) const {
    const Lag& lag = lags_[k];
    const long idx = at - lag.whole;
    if (lag.integral) {
      return idx >= 0 ? load(idx, v) : history_[v](time(at) - lag.steps * dt_);
    }
    if (idx < 0) return history_[v](time(at) - lag.steps * dt_);
    const double older = load(idx, v);
    const double newer = load(idx + 1, v);
    return older + lag.frac * (newer - older);
  }

  double current(std::size_t v) const { return load(step_, v); }
  long step() const { return step_; }

  // rhs(at, y, dy): derivative at step position `at` with state y.
  template <class Rhs>
  void advance(Rhs&& rhs) {
    auto& y = y_;
    auto& k1 = k1_;
    auto& pred = pred_;
    auto& k2 = k2_;
    for (std::size_t v = 0; v < dim_; ++v) y[v] = current(v);
    rhs(step_, y, k1);
    for (std::size_t v = 0; v < dim_; ++v) pred[v] = y[v] + dt_ * k1[v];
    // Every lag is at least one step, so the corrector only reads stored samples.
    rhs(step_ + 1, pred, k2);
    for (std::size_t v = 0; v < dim_; ++v) store(step_ + 1, v, y[v] + 0.5 * dt_ * (k1[v] + k2[v]));
    ++step_;
  }

 private:
  double load(long idx, std::size_t v) const {
    return ring_[(static_cast<std::size_t>(idx) % capacity_) * dim_ + v];
  }
  void store(long idx, std::size_t v, double value) {
    ring_[(static_cast<std::size_t>(idx) % capacity_) * dim_ + v] = value;
  }

  std::size_t dim_;
  double dt_;
  std::vector<HistoryFn> history_;
  std::vector<Lag> lags_;
  std::size_t capacity_ = 0;
  std::vector<double> ring_;
  std::vector<double> y_, k1_, pred_, k2_;
  long step_ = 0;
};

double resolve_dt(const DdeConfig& cfg, double min_tau) {
  const double dt = cfg.dt > 0.0 ? cfg.dt : min_tau / 500.0;
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("step size must be positive");
  return dt;
}

long step_count(const DdeConfig& cfg, double dt) {
  if (!(cfg.horizon > 0.0)) throw DomainError("horizon must be positive");
  if (cfg.sample_every < 1) throw DomainError("sample_every must be at least 1");
  return static_cast<long>(std::llround(cfg.horizon / dt));
}

std::vector<HistoryFn> histories(const DdeConfig& cfg, std::vector<HistoryFn> defaults) {
  for (std::size_t v = 0; v < defaults.size() && v < cfg.history.size(); ++v) {
    if (cfg.history[v]) defaults[v] = cfg.history[v];
  }
  return defaults;
}

HistoryFn constant(double value) {
  return [value](double) { return value; };
}

nlohmann::json cfg_json(const DdeConfig& cfg, double dt) {
  return {{"dt", dt},
          {"horizon", cfg.horizon},
          {"kick", cfg.kick},
          {"transient_fraction", cfg.transient_fraction},
          {"sample_every", cfg.sample_every},
          {"custom_history", !cfg.history.empty()}};
}

void check_floor(double w, double floor, double t) {
  if (!(w > floor)) {
    throw IntegrationAborted("window reached the positivity floor at t = " + format_double(t) +
                                 " s; reduce the step size",
                             t);
  }
}

}  // namespace

Trace simulate_fluid_single(const ProtocolSpec& spec, Regime regime, const NetworkParams& net,
                            const DdeConfig& cfg, int m) {
  spec.validate();
  net.validate();
  const auto eq = solve_single(spec, regime, net, m);
  const double tau = net.tau[m];
  const double dt = resolve_dt(cfg, tau);
  const long steps = step_count(cfg, dt);

  DelayIntegrator integ(1, dt, {tau}, histories(cfg, {constant(cfg.kick[0] * eq.w_star)}));
  std::size_t clamped = 0;
  auto rhs = [&](long at, const std::vector<double>& y, std::vector<double>& dy) {
    check_floor(y[0], cfg.w_floor, integ.time(at));
    const double lagged = integ.delayed(0, 0, at);
    const auto p = edge_loss(regime, net, m, lagged);
    clamped += p.clamped ? 1 : 0;
    dy[0] = window_derivative(spec, y[0], lagged, p.p, tau);
  };

  std::vector<double> w, p;
  auto record = [&] {
    const double now = integ.current(0);
    w.push_back(now);
    p.push_back(edge_loss(regime, net, m, now).p);
  };
  record();
  for (long n = 0; n < steps; ++n) {
    integ.advance(rhs);
    check_floor(integ.current(0), cfg.w_floor, integ.time(integ.step()));
    if (integ.step() % cfg.sample_every == 0) record();
  }

  Trace tr;
  tr.model = "fluid-single";
  tr.dt = dt * cfg.sample_every;
  tr.add_column("w", std::move(w));
  tr.add_column("p", std::move(p));
  tr.metadata = {{"protocol", to_json(spec)},
                 {"regime", std::string(to_string(regime))},
                 {"network", to_json(net)},
                 {"set", m},
                 {"w_star", eq.w_star},
                 {"p_star", eq.p_total()},
                 {"clamped_evaluations", clamped},
                 {"config", cfg_json(cfg, dt)}};
  return tr;
}

Trace simulate_fluid_coupled(const ProtocolSpec& spec, Regime regime, const NetworkParams& net,
                             const DdeConfig& cfg) {
  spec.validate();
  net.validate();
  const auto [eq1, eq2] = solve_coupled(spec, regime, net);
  const double dt = resolve_dt(cfg, std::min(net.tau[0], net.tau[1]));
  const long steps = step_count(cfg, dt);

  DelayIntegrator integ(2, dt, {net.tau[0], net.tau[1]},
                        histories(cfg, {constant(cfg.kick[0] * eq1.w_star),
                                        constant(cfg.kick[1] * eq2.w_star)}));
  std::size_t clamped = 0;
  auto rhs = [&](long at, const std::vector<double>& y, std::vector<double>& dy) {
    check_floor(y[0], cfg.w_floor, integ.time(at));
    check_floor(y[1], cfg.w_floor, integ.time(at));
    const double l1 = integ.delayed(0, 0, at);
    const double l2 = integ.delayed(1, 1, at);
    const auto pc = core_loss(regime, net, l1, l2);
    const auto p1 = edge_loss(regime, net, 0, l1);
    const auto p2 = edge_loss(regime, net, 1, l2);
    clamped += (pc.clamped ? 1 : 0) + (p1.clamped ? 1 : 0) + (p2.clamped ? 1 : 0);
    dy[0] = window_derivative(spec, y[0], l1, std::min(1.0, p1.p + pc.p), net.tau[0]);
    dy[1] = window_derivative(spec, y[1], l2, std::min(1.0, p2.p + pc.p), net.tau[1]);
  };

  std::vector<double> w1, w2, p1, p2, pc;
  auto record = [&] {
    const long at = integ.step();
    w1.push_back(integ.current(0));
    w2.push_back(integ.current(1));
    p1.push_back(edge_loss(regime, net, 0, integ.current(0)).p);
    p2.push_back(edge_loss(regime, net, 1, integ.current(1)).p);
    pc.push_back(core_loss(regime, net, integ.delayed(0, 0, at), integ.delayed(1, 1, at)).p);
  };
  record();
  for (long n = 0; n < steps; ++n) {
    integ.advance(rhs);
    const double t = integ.time(integ.step());
    check_floor(integ.current(0), cfg.w_floor, t);
    check_floor(integ.current(1), cfg.w_floor, t);
    if (integ.step() % cfg.sample_every == 0) record();
  }

  Trace tr;
  tr.model = "fluid-coupled";
  tr.dt = dt * cfg.sample_every;
  tr.add_column("w1", std::move(w1));
  tr.add_column("w2", std::move(w2));
  tr.add_column("p1", std::move(p1));
  tr.add_column("p2", std::move(p2));
  tr.add_column("pc", std::move(pc));
  tr.metadata = {{"protocol", to_json(spec)},
                 {"regime", std::string(to_string(regime))},
                 {"network", to_json(net)},
                 {"w_star", {eq1.w_star, eq2.w_star}},
                 {"p_edge_star", {eq1.p_edge_star, eq2.p_edge_star}},
                 {"p_core_star", eq1.p_core_star},
                 {"clamped_evaluations", clamped},
                 {"config", cfg_json(cfg, dt)}};
  return tr;
}

Trace simulate_linearized(const ProtocolSpec& spec, Regime regime, const NetworkParams& net,
                          const EquilibriumState& eq, const DdeConfig& cfg, int m) {
  spec.validate();
  net.validate();
  const double tau = net.tau[m];
  const double w = eq.w_star;
  const double i = increase_fn(spec, w);
  const double g = g_factor(spec, w, eq.p_total());
  const double self = i * g / tau;
  double delayed_coef = 0.0;
  if (regime == Regime::SmallBuffer) {
    delayed_coef = i * net.b[m] / (net.n_e[m] * tau);
  } else {
    const double n = net.n_e[m];
    delayed_coef =
        (i + decrease_fn(spec, w)) * std::pow(net.c_prime[m], n) * std::pow(tau, n - 1.0) /
        std::pow(w, n);
  }

  const double dt = resolve_dt(cfg, tau);
  const long steps = step_count(cfg, dt);
  DelayIntegrator integ(1, dt, {tau}, histories(cfg, {constant((cfg.kick[0] - 1.0) * w)}));
  auto rhs = [&](long at, const std::vector<double>& y, std::vector<double>& dy) {
    dy[0] = -self * y[0] - delayed_coef * integ.delayed(0, 0, at);
  };
  std::vector<double> dw{integ.current(0)};
  for (long n = 0; n < steps; ++n) {
    integ.advance(rhs);
    if (integ.step() % cfg.sample_every == 0) dw.push_back(integ.current(0));
  }

  Trace tr;
  tr.model = "linearized";
  tr.dt = dt * cfg.sample_every;
  tr.add_column("dw", std::move(dw));
  tr.metadata = {{"protocol", to_json(spec)},
                 {"regime", std::string(to_string(regime))},
                 {"network", to_json(net)},
                 {"set", m},
                 {"w_star", w},
                 {"p_star", eq.p_total()},
                 {"undelayed_coefficient", self},
                 {"delayed_coefficient", delayed_coef},
                 {"config", cfg_json(cfg, dt)}};
  return tr;
}

std::string_view to_string(PhaseModelKind k) {
  switch (k) {
    case PhaseModelKind::SmallEqual: return "small-equal";
    case PhaseModelKind::IntermediateEqual: return "intermediate-equal";
    case PhaseModelKind::SmallGeneral: return "small-general";
    case PhaseModelKind::IntermediateGeneral: return "intermediate-general";
  }
  return "unknown";
}

PhaseModelKind parse_phase_model(std::string_view name) {
  for (auto k : {PhaseModelKind::SmallEqual, PhaseModelKind::IntermediateEqual,
                 PhaseModelKind::SmallGeneral, PhaseModelKind::IntermediateGeneral}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown phase model '" + std::string(name) + "'");
}

PhaseModel PhaseModel::equally_coupled(const SyncProblem& p) {
  PhaseModel model;
  model.kind = p.regime == Regime::SmallBuffer ? PhaseModelKind::SmallEqual
                                               : PhaseModelKind::IntermediateEqual;
  model.omega = {p.omega1, p.omega2};
  model.tau = {p.tau, p.tau};
  const double cross = p.cross_coupling();
  const double self = p.self_coupling();
  model.coupling = {{{self, cross}, {cross, self}}};
  return model;
}

PhaseModel PhaseModel::general(const ProtocolSpec& spec, Regime regime, const NetworkParams& net,
                               std::optional<std::array<double, 2>> omega) {
  net.validate();
  const EquilibriumState eq[2] = {solve_single(spec, regime, net, 0),
                                  solve_single(spec, regime, net, 1)};
  PhaseModel model;
  model.kind = regime == Regime::SmallBuffer ? PhaseModelKind::SmallGeneral
                                             : PhaseModelKind::IntermediateGeneral;
  model.tau = net.tau;
  for (int m = 0; m < 2; ++m) {
    if (omega) {
      model.omega[m] = (*omega)[m];
      continue;
    }
    const auto f = intrinsic_frequency(spec, regime, net, eq[m], m);
    if (!f.feasible()) {
      throw DomainError("set " + std::to_string(m + 1) +
                        " has no intrinsic frequency at its equilibrium");
    }
    model.omega[m] = *f.omega;
  }

  const double rate[2] = {eq[0].w_star / net.tau[0], eq[1].w_star / net.tau[1]};
  const double total = rate[0] + rate[1];
  if (regime == Regime::SmallBuffer) {
    const double pc = core_loss(regime, net, eq[0].w_star, eq[1].w_star).p;
    for (int m = 0; m < 2; ++m) {
      const double gain = pc > 0.0 ? increase_fn(spec, eq[m].w_star) /
                                         (1.0 + eq[m].p_edge_star / pc)
                                   : 0.0;
      for (int i = 0; i < 2; ++i) {
        model.coupling[m][i] = net.B * rate[m] / (net.n_c * total) / net.tau[i] * gain;
      }
      model.coupling[m][m] -= net.b[m] / net.n_e[m] / net.tau[m] * gain;
    }
  } else {
    for (int m = 0; m < 2; ++m) {
      const double w = eq[m].w_star;
      const double gain = (increase_fn(spec, w) + decrease_fn(spec, w)) *
                          std::pow(net.C_tilde, net.n_c) * rate[m] /
                          std::pow(total, net.n_c + 1.0);
      for (int i = 0; i < 2; ++i) model.coupling[m][i] = gain / net.tau[i];
    }
  }
  return model;
}

Trace simulate_phase_oscillators(const PhaseModel& model, const DdeConfig& cfg) {
  const double dt = resolve_dt(cfg, std::min(model.tau[0], model.tau[1]));
  const long steps = step_count(cfg, dt);
  const double w1 = model.omega[0];
  const double w2 = model.omega[1];
  DelayIntegrator integ(2, dt, {model.tau[0], model.tau[1]},
                        histories(cfg, {[w1](double t) { return w1 * t; },
                                        [w2](double t) { return w2 * t; }}));
  auto rhs = [&](long at, const std::vector<double>& y, std::vector<double>& dy) {
    const double lagged[2] = {integ.delayed(0, 0, at), integ.delayed(1, 1, at)};
    for (int m = 0; m < 2; ++m) {
      double sum = 0.0;
      for (int i = 0; i < 2; ++i) sum += model.coupling[m][i] * std::sin(lagged[i] - y[m]);
      dy[m] = model.omega[m] - sum;
    }
  };

  std::vector<double> th1, th2, r, psi;
  auto record = [&] {
    const auto op = order_parameter(integ.current(0), integ.current(1));
    th1.push_back(integ.current(0));
    th2.push_back(integ.current(1));
    r.push_back(op.r);
    psi.push_back(op.psi ? *op.psi : std::numeric_limits<double>::quiet_NaN());
  };
  record();
  for (long n = 0; n < steps; ++n) {
    integ.advance(rhs);
    if (integ.step() % cfg.sample_every == 0) record();
  }

  Trace tr;
  tr.model = "phase-" + std::string(to_string(model.kind));
  tr.dt = dt * cfg.sample_every;
  tr.add_column("theta1", std::move(th1));
  tr.add_column("theta2", std::move(th2));
  tr.add_column("r", std::move(r));
  tr.add_column("psi", std::move(psi));
  tr.metadata = {{"omega", model.omega},
                 {"tau", model.tau},
                 {"coupling", model.coupling},
                 {"config", cfg_json(cfg, dt)}};
  return tr;
}

}  // namespace tcpsync
