#include "tcpsync_cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "tcpsync/equilibrium.hpp"
#include "tcpsync/errors.hpp"
#include "tcpsync/linear_analysis.hpp"
#include "tcpsync/serialization.hpp"
#include "tcpsync/spectral.hpp"
#include "tcpsync/sync_solver.hpp"
#include "tcpsync/trace.hpp"

namespace tcpsync::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json number_or_null(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::invalid_argument("cannot write '" + path.string() + "'");
  os << text;
  if (!os) throw std::invalid_argument("failed writing '" + path.string() + "'");
}

void write_report(const RunOptions& opt, const std::string& file, const json& j) {
  if (!opt.out_dir) return;
  write_text(*opt.out_dir / file, j.dump(2) + "\n");
}

// Returns the file name that was written, or an empty string when no output directory is set.
std::string write_trace(const RunOptions& opt, const std::string& stem, const Trace& trace) {
  if (!opt.out_dir) return {};
  const std::string file = stem + (opt.format == TraceFormat::Csv ? ".csv" : ".json");
  if (opt.format == TraceFormat::Csv) {
    write_csv(trace, *opt.out_dir / file);
  } else {
    write_json(trace, *opt.out_dir / file);
  }
  return file;
}

void prepare_output(const RunOptions& opt) {
  if (!opt.out_dir) return;
  std::error_code ec;
  fs::create_directories(*opt.out_dir, ec);
  if (ec) {
    throw std::invalid_argument("cannot create output directory '" + opt.out_dir->string() +
                                "': " + ec.message());
  }
}

const char* stability_name(Stability s) {
  switch (s) {
    case Stability::Stable: return "stable";
    case Stability::Marginal: return "marginal";
    case Stability::Unstable: return "unstable";
  }
  return "unstable";
}

json sync_state_json(const SyncState& s) {
  return {{"Omega_rad_s", s.Omega},
          {"phi0_rad", s.phi0},
          {"r", s.order_r},
          {"stability", stability_name(s.stability)},
          {"stability_value", s.stability_value},
          {"branch", s.branch == Branch::InPhase ? "in-phase" : "anti-phase"},
          {"residual_frequency", s.residual_freq},
          {"residual_phase", s.residual_phase}};
}

json estimate_json(const LimitCycleEstimate& e) {
  return {{"amplitude", e.amplitude}, {"frequency_rad_s", e.frequency}, {"mean", e.mean}};
}

json lock_json(const LockEstimate& l) {
  return {{"Omega_rad_s", l.Omega}, {"phi0_rad", l.phi0}, {"r_mean", l.r_mean},
          {"r_min", l.r_min},       {"locked", l.locked}};
}

EstimatorOptions estimator_options(double transient_fraction) {
  EstimatorOptions e;
  e.transient_fraction = transient_fraction;
  return e;
}

struct Analysis {
  NetworkParams net;
  std::array<EquilibriumState, 2> single;
  std::array<FrequencySummary, 2> frequency;
  std::optional<CouplingSummary> coupling;
  std::optional<EquilibriumState> coupling_eq;
  std::string coupling_note;
  std::optional<SyncProblem> problem;
  std::string problem_note;
};

Analysis analyse(const ExperimentConfig& cfg) {
  Analysis a;
  a.net = fluid_network(cfg);
  for (int m = 0; m < 2; ++m) {
    a.single[m] = solve_single(cfg.protocol, cfg.regime, a.net, m);
    a.frequency[m] = intrinsic_frequency(cfg.protocol, cfg.regime, a.net, a.single[m], m);
  }
  // K is evaluated at the single-edge equilibrium for the mean round-trip time.
  const double tau_mean = 0.5 * (a.net.tau[0] + a.net.tau[1]);
  try {
    NetworkParams mean = a.net;
    mean.tau = {tau_mean, tau_mean};
    a.coupling_eq = solve_single(cfg.protocol, cfg.regime, mean, 0);
    a.coupling = coupling_strength(cfg.protocol, cfg.regime, a.net, *a.coupling_eq);
  } catch (const UnsupportedConfiguration& e) {
    a.coupling_eq.reset();
    a.coupling_note = e.what();
  }

  std::array<std::optional<double>, 2> omega{a.frequency[0].omega, a.frequency[1].omega};
  if (cfg.phase.omega_rad_s) omega = {(*cfg.phase.omega_rad_s)[0], (*cfg.phase.omega_rad_s)[1]};
  std::optional<double> K;
  if (a.coupling) K = a.coupling->K;
  if (cfg.phase.coupling_per_s) K = *cfg.phase.coupling_per_s;

  if (!omega[0] || !omega[1]) {
    a.problem_note = "a set has no intrinsic frequency at its equilibrium";
  } else if (!K) {
    a.problem_note = a.coupling_note;
  } else {
    SyncProblem p;
    p.regime = cfg.regime;
    p.omega1 = *omega[0];
    p.omega2 = *omega[1];
    p.K = *K;
    p.tau = cfg.phase.tau_s ? *cfg.phase.tau_s : tau_mean;
    p.B = a.net.B;
    p.b = a.net.b[0];
    p.n_c = a.net.n_c;
    p.n_e = a.net.n_e[0];
    a.problem = p;
  }
  return a;
}

json problem_json(const SyncProblem& p) {
  json j{{"regime", std::string(to_string(p.regime))},
         {"omega_rad_s", {p.omega1, p.omega2}},
         {"K_per_s", p.K},
         {"tau_s", p.tau},
         {"cross_coupling_per_s", p.cross_coupling()},
         {"self_coupling_per_s", p.self_coupling()}};
  if (p.regime == Regime::SmallBuffer) {
    j["B_pkts"] = p.B;
    j["b_pkts"] = p.b;
    j["n_c"] = p.n_c;
    j["n_e"] = p.n_e;
  }
  return j;
}

using Command = std::function<json(const ExperimentConfig&, const RunOptions&)>;

Command command_by_name(const std::string& name) {
  if (name == "analyze") return cmd_analyze;
  if (name == "simulate-fluid") return cmd_simulate_fluid;
  if (name == "simulate-packets") return cmd_simulate_packets;
  if (name == "simulate-phase") return cmd_simulate_phase;
  throw std::invalid_argument("command '" + name + "' cannot be swept");
}

struct Column {
  const char* name;
  const char* pointer;
};

std::vector<Column> sweep_columns(const std::string& command) {
  if (command == "analyze") {
    return {{"omega1_rad_s", "/sets/0/omega_rad_s"},
            {"omega2_rad_s", "/sets/1/omega_rad_s"},
            {"K_per_s", "/sync/problem/K_per_s"},
            {"Omega_rad_s", "/sync/primary/Omega_rad_s"},
            {"phi0_rad", "/sync/primary/phi0_rad"},
            {"r", "/sync/primary/r"},
            {"Omega_dominant_rad_s", "/sync/dominant/Omega_rad_s"},
            {"r_dominant", "/sync/dominant/r"},
            {"roots", "/sync/root_count"}};
  }
  if (command == "simulate-fluid") {
    return {{"amplitude", "/variables/0/amplitude"},
            {"frequency_rad_s", "/variables/0/frequency_rad_s"},
            {"locked", "/lock/locked"}};
  }
  return {{"core_amplitude_pkts", "/oscillation/core/amplitude_pkts"},
          {"core_period_s", "/oscillation/core/period_s"},
          {"core_sustained", "/oscillation/core/sustained"},
          {"core_utilization", "/core_utilization"}};
}

std::string csv_field(const json& j) {
  if (j.is_null()) return "";
  if (j.is_boolean()) return j.get<bool>() ? "1" : "0";
  if (j.is_number_float()) return format_double(j.get<double>());
  if (j.is_number()) return j.dump();
  if (j.is_string()) return j.get<std::string>();
  return "";
}

int worker_count(const ExperimentConfig& cfg, const RunOptions& opt, std::size_t tasks) {
  int jobs = opt.jobs ? *opt.jobs : cfg.sweep->jobs;
  if (jobs <= 0) {
    jobs = static_cast<int>(std::min(8u, std::max(1u, std::thread::hardware_concurrency())));
  }
  return std::max(1, std::min<int>(jobs, static_cast<int>(tasks)));
}

}  // namespace

TraceFormat parse_trace_format(const std::string& name) {
  if (name == "csv") return TraceFormat::Csv;
  if (name == "json") return TraceFormat::Json;
  throw std::invalid_argument("unknown trace format '" + name + "' (csv or json)");
}

json cmd_analyze(const ExperimentConfig& cfg, const RunOptions& opt) {
  prepare_output(opt);
  const Analysis a = analyse(cfg);
  json report;
  report["config"] = to_json(cfg);
  report["network"] = tcpsync::to_json(a.net);

  json sets = json::array();
  for (int m = 0; m < 2; ++m) {
    sets.push_back({{"set", m + 1},
                    {"rtt_s", a.net.tau[m]},
                    {"w_star_pkts", a.single[m].w_star},
                    {"p_star", a.single[m].p_edge_star},
                    {"residual", a.single[m].residual},
                    {"omega_rad_s", number_or_null(a.frequency[m].omega)},
                    {"radicand", a.frequency[m].radicand}});
  }
  report["sets"] = sets;

  const auto [c1, c2] = solve_coupled(cfg.protocol, cfg.regime, a.net);
  report["coupled"] = {{"w_star_pkts", {c1.w_star, c2.w_star}},
                       {"p_edge", {c1.p_edge_star, c2.p_edge_star}},
                       {"p_core", c1.p_core_star},
                       {"residual", {c1.residual, c2.residual}}};

  if (a.coupling) {
    report["coupling"] = {{"K_per_s", a.coupling->K},
                          {"tau_s", a.coupling->tau},
                          {"w_star_pkts", a.coupling_eq->w_star}};
  } else {
    report["coupling"] = {{"K_per_s", nullptr}, {"note", a.coupling_note}};
  }

  if (a.problem) {
    const auto roots = solve_sync(*a.problem);
    json list = json::array();
    for (const auto& r : roots) list.push_back(sync_state_json(r));
    const auto primary = primary_state(roots);
    const auto dominant = dominant_state(roots);
    json sync{{"problem", problem_json(*a.problem)},
              {"root_count", roots.size()},
              {"roots", list},
              {"primary", primary ? sync_state_json(*primary) : json(nullptr)},
              {"dominant", dominant ? sync_state_json(*dominant) : json(nullptr)},
              {"synchronised", primary.has_value()}};
    if (cfg.coupling_sweep) {
      KSweep sweep;
      sweep.K_from = cfg.coupling_sweep->K_from;
      sweep.K_to = cfg.coupling_sweep->K_to;
      sweep.steps = cfg.coupling_sweep->steps;
      const auto range = coupling_range(*a.problem, sweep);
      sync["coupling_range"] = {{"K_c_per_s", number_or_null(range.K_c)},
                                {"K_u_per_s", number_or_null(range.K_u)}};
    }
    report["sync"] = sync;
  } else {
    report["sync"] = {{"problem", nullptr}, {"note", a.problem_note}, {"root_count", 0}};
  }
  write_report(opt, "report.json", report);
  return report;
}

json cmd_simulate_fluid(const ExperimentConfig& cfg, const RunOptions& opt) {
  prepare_output(opt);
  const NetworkParams net = fluid_network(cfg);
  const DdeConfig dde = fluid_dde_config(cfg);
  const int m = cfg.fluid.set - 1;
  Trace trace;
  std::vector<std::string> vars;
  if (cfg.fluid.model == "coupled") {
    trace = simulate_fluid_coupled(cfg.protocol, cfg.regime, net, dde);
    vars = {"w1", "w2"};
  } else if (cfg.fluid.model == "single") {
    trace = simulate_fluid_single(cfg.protocol, cfg.regime, net, dde, m);
    vars = {"w"};
  } else {
    const auto eq = solve_single(cfg.protocol, cfg.regime, net, m);
    trace = simulate_linearized(cfg.protocol, cfg.regime, net, eq, dde, m);
    vars = {"dw"};
  }
  json summary;
  summary["config"] = to_json(cfg);
  summary["model"] = trace.model;
  summary["samples"] = trace.size();
  summary["dt_s"] = trace.dt;
  const std::string file = write_trace(opt, "trace", trace);
  summary["files"] = file.empty() ? json::array() : json::array({file, "summary.json"});

  const auto est = estimator_options(cfg.fluid.transient_fraction);
  json variables = json::array();
  for (const auto& v : vars) {
    json e = estimate_json(estimate_limit_cycle(trace, v, est));
    e["name"] = v;
    variables.push_back(e);
  }
  summary["variables"] = variables;
  if (vars.size() == 2 && variables[0]["amplitude"].get<double>() > 0.0 &&
      variables[1]["amplitude"].get<double>() > 0.0) {
    summary["lock"] = lock_json(estimate_lock(trace, vars[0], vars[1], est));
  } else {
    summary["lock"] = nullptr;
  }
  write_report(opt, "summary.json", summary);
  return summary;
}

json cmd_simulate_phase(const ExperimentConfig& cfg, const RunOptions& opt) {
  prepare_output(opt);
  PhaseModel model;
  json prediction = nullptr;
  std::vector<SyncState> roots;
  if (cfg.phase.model == "equal") {
    const Analysis a = analyse(cfg);
    if (!a.problem) throw std::invalid_argument("phase model unavailable: " + a.problem_note);
    model = PhaseModel::equally_coupled(*a.problem);
    roots = solve_sync(*a.problem);
    const auto primary = primary_state(roots);
    const auto dominant = dominant_state(roots);
    prediction = {{"problem", problem_json(*a.problem)},
                  {"primary", primary ? sync_state_json(*primary) : json(nullptr)},
                  {"dominant", dominant ? sync_state_json(*dominant) : json(nullptr)}};
  } else {
    if (cfg.phase.coupling_per_s || cfg.phase.tau_s) {
      throw std::invalid_argument(
          "phase.coupling_per_s and phase.tau_s apply to the equal model only");
    }
    model = PhaseModel::general(cfg.protocol, cfg.regime, fluid_network(cfg), cfg.phase.omega_rad_s);
  }
  const Trace trace = simulate_phase_oscillators(model, phase_dde_config(cfg));

  json summary;
  summary["config"] = to_json(cfg);
  summary["model"] = trace.model;
  summary["phase_model"] = {{"kind", std::string(to_string(model.kind))},
                            {"omega_rad_s", model.omega},
                            {"tau_s", model.tau},
                            {"coupling_per_s", model.coupling}};
  summary["samples"] = trace.size();
  summary["dt_s"] = trace.dt;
  const std::string file = write_trace(opt, "trace", trace);
  summary["files"] = file.empty() ? json::array() : json::array({file, "summary.json"});
  const auto lock =
      measure_phase_lock(trace, "theta1", "theta2", estimator_options(cfg.phase.transient_fraction));
  summary["lock"] = lock_json(lock);
  if (!prediction.is_null()) {
    // Several stable states can coexist; the one the run settled on is the nearest in Ω.
    const SyncState* nearest = nullptr;
    for (const auto& r : roots) {
      if (!r.stable() || r.branch != Branch::InPhase) continue;
      if (!nearest || std::abs(r.Omega - lock.Omega) < std::abs(nearest->Omega - lock.Omega)) {
        nearest = &r;
      }
    }
    prediction["nearest"] = nearest ? sync_state_json(*nearest) : json(nullptr);
  }
  summary["prediction"] = prediction;
  write_report(opt, "summary.json", summary);
  return summary;
}

json cmd_simulate_packets(const ExperimentConfig& cfg, const RunOptions& opt) {
  prepare_output(opt);
  const ScenarioConfig scenario = packet_scenario(cfg);
  const ScenarioResult result = run_scenario(scenario);

  json summary;
  summary["config"] = to_json(cfg);
  summary["scenario"] = to_json(scenario);
  json files = json::array();
  for (const auto& f : {write_trace(opt, "queues", result.queues),
                        write_trace(opt, "windows1", result.windows[0]),
                        write_trace(opt, "windows2", result.windows[1])}) {
    if (!f.empty()) files.push_back(f);
  }
  if (!files.empty()) files.push_back("summary.json");
  summary["files"] = files;

  const auto& c = result.counters;
  summary["counters"] = {{"sent", c.sent},
                         {"delivered", c.delivered},
                         {"dropped_edge", {c.dropped_edge[0], c.dropped_edge[1]}},
                         {"dropped_core", c.dropped_core},
                         {"loss_events", c.loss_events}};
  summary["core_utilization"] = result.core_utilization;
  summary["edge_utilization"] = result.edge_utilization;
  summary["conservation_held"] = result.conservation_held;
  summary["warnings"] = result.warnings;

  const auto& topo = scenario.topology;
  const double rtt_mean = 0.5 * (cfg.network.rtt_ms[0] + cfg.network.rtt_ms[1]) / 1000.0;
  auto osc_json = [](const QueueOscillation& q) {
    return json{{"mean_pkts", q.mean},     {"amplitude_pkts", q.amplitude},
                {"swing", q.swing},        {"delay_swing", q.delay_swing},
                {"period_s", q.period},    {"cycles", q.cycles},
                {"sustained", q.sustained}};
  };
  json osc;
  osc["core"] = osc_json(
      analyze_queue(result.queues, "core", topo.core_buffer, topo.core_capacity, rtt_mean));
  for (int m = 0; m < 2; ++m) {
    const std::string name = "edge" + std::to_string(m + 1);
    osc[name] = osc_json(analyze_queue(result.queues, name, topo.edge_buffer[m],
                                       topo.edge_capacity[m], cfg.network.rtt_ms[m] / 1000.0));
  }
  summary["oscillation"] = osc;
  write_report(opt, "summary.json", summary);
  return summary;
}

ExperimentConfig sweep_point(const ExperimentConfig& cfg, double value) {
  if (!cfg.sweep) throw std::invalid_argument("configuration has no sweep section");
  json j = to_json(cfg);
  j.erase("sweep");
  for (const auto& t : cfg.sweep->targets) {
    json::json_pointer ptr;
    try {
      ptr = json::json_pointer(t.path);
    } catch (const json::exception& e) {
      throw std::invalid_argument("sweep target '" + t.path + "' is not a JSON pointer");
    }
    if (!j.contains(ptr) || !j.at(ptr).is_number()) {
      throw std::invalid_argument("sweep target '" + t.path + "' does not name a numeric field");
    }
    if (j.at(ptr).is_number_integer()) {
      j[ptr] = static_cast<std::int64_t>(std::llround(value * t.factor));
    } else {
      j[ptr] = value * t.factor;
    }
  }
  return config_from_json(j);
}

json cmd_sweep(const ExperimentConfig& cfg, const RunOptions& opt) {
  if (!cfg.sweep) throw std::invalid_argument("configuration has no sweep section");
  prepare_output(opt);
  const auto command = command_by_name(cfg.sweep->command);
  const auto values = cfg.sweep->values();
  // Configuration errors surface before any work starts.
  std::vector<ExperimentConfig> points;
  for (double v : values) points.push_back(sweep_point(cfg, v));

  std::vector<json> results(values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < values.size(); i = next++) {
      try {
        results[i] = {{"result", command(points[i], RunOptions{})}};
      } catch (...) {
        results[i] = {{"error", describe_current_exception().body}};
      }
    }
  };
  const int n = worker_count(cfg, opt, values.size());
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  const auto columns = sweep_columns(cfg.sweep->command);
  std::ostringstream csv;
  csv << "index,value";
  for (const auto& c : columns) csv << ',' << c.name;
  csv << ",error\n";
  json list = json::array();
  for (std::size_t i = 0; i < values.size(); ++i) {
    csv << i << ',' << format_double(values[i]);
    const json& r = results[i];
    for (const auto& c : columns) {
      csv << ',';
      if (r.contains("result")) {
        const json::json_pointer ptr(c.pointer);
        if (r["result"].contains(ptr)) csv << csv_field(r["result"].at(ptr));
      }
    }
    csv << ',';
    if (r.contains("error")) csv << r["error"].value("type", "error");
    csv << '\n';
    json entry{{"index", i}, {"value", values[i]}};
    entry.update(r);
    if (entry.contains("result")) entry["result"].erase("config");
    list.push_back(entry);
  }
  json out{{"config", to_json(cfg)}, {"points", list}};
  if (opt.out_dir) {
    write_text(*opt.out_dir / "sweep.csv", csv.str());
    write_text(*opt.out_dir / "sweep.json", out.dump(2) + "\n");
  }
  return out;
}

ErrorReport describe_current_exception() {
  ErrorReport r;
  auto fill = [&](int code, const char* kind, const char* type, const std::string& message) {
    r.exit_code = code;
    r.body = {{"kind", kind}, {"type", type}, {"message", message}};
  };
  try {
    throw;
  } catch (const HorizonTooShort& e) {
    fill(2, "numerical", "HorizonTooShort", e.what());
    r.body["required_seconds"] = e.required_seconds;
  } catch (const IntegrationAborted& e) {
    fill(2, "numerical", "IntegrationAborted", e.what());
    r.body["time_s"] = e.time;
  } catch (const NoRoot& e) {
    fill(2, "numerical", "NoRoot", e.what());
    r.body["bracket"] = {e.bracket_lo, e.bracket_hi};
  } catch (const NoConvergence& e) {
    fill(2, "numerical", "NoConvergence", e.what());
    r.body["last_iterate"] = e.last_iterate;
    r.body["last_residual"] = e.last_residual;
  } catch (const NumericalError& e) {
    fill(2, "numerical", "NumericalError", e.what());
  } catch (const UnsupportedConfiguration& e) {
    fill(1, "configuration", "UnsupportedConfiguration", e.what());
  } catch (const DomainError& e) {
    fill(1, "configuration", "DomainError", e.what());
  } catch (const nlohmann::json::exception& e) {
    fill(1, "configuration", "JsonError", e.what());
  } catch (const std::invalid_argument& e) {
    fill(1, "configuration", "InvalidArgument", e.what());
  } catch (const std::exception& e) {
    fill(2, "numerical", "RuntimeError", e.what());
  } catch (...) {
    fill(2, "numerical", "Unknown", "unknown failure");
  }
  return r;
}

}  // namespace tcpsync::cli
