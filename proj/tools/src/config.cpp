#include "tcpsync_cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "tcpsync/serialization.hpp"

namespace tcpsync::cli {

namespace {

template <class T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

nlohmann::json network_json(const NetworkSection& n) {
  return {{"flows", n.flows},
          {"edge_capacity_mbps", n.edge_capacity_mbps},
          {"core_capacity_mbps", n.core_capacity_mbps},
          {"rtt_ms", n.rtt_ms},
          {"edge_buffer_pkts", n.edge_buffer_pkts},
          {"core_buffer_pkts", n.core_buffer_pkts},
          {"edge_burstiness", n.edge_burstiness},
          {"core_burstiness", n.core_burstiness},
          {"packet_bytes", n.packet_bytes}};
}

NetworkSection network_section(const nlohmann::json& j) {
  reject_unknown_keys(j, {"flows", "edge_capacity_mbps", "core_capacity_mbps", "rtt_ms",
                          "edge_buffer_pkts", "core_buffer_pkts", "edge_burstiness",
                          "core_burstiness", "packet_bytes"},
                      "network");
  NetworkSection n;
  read(j, "flows", n.flows);
  read(j, "edge_capacity_mbps", n.edge_capacity_mbps);
  read(j, "core_capacity_mbps", n.core_capacity_mbps);
  read(j, "rtt_ms", n.rtt_ms);
  read(j, "edge_buffer_pkts", n.edge_buffer_pkts);
  read(j, "core_buffer_pkts", n.core_buffer_pkts);
  read(j, "edge_burstiness", n.edge_burstiness);
  read(j, "core_burstiness", n.core_burstiness);
  read(j, "packet_bytes", n.packet_bytes);
  return n;
}

nlohmann::json fluid_json(const FluidSection& f) {
  return {{"model", f.model},         {"set", f.set},
          {"horizon_s", f.horizon_s}, {"dt_ms", f.dt_ms},
          {"kick", f.kick},           {"sample_every", f.sample_every},
          {"transient_fraction", f.transient_fraction}};
}

FluidSection fluid_section(const nlohmann::json& j) {
  reject_unknown_keys(j, {"model", "set", "horizon_s", "dt_ms", "kick", "sample_every",
                          "transient_fraction"},
                      "fluid");
  FluidSection f;
  read(j, "model", f.model);
  read(j, "set", f.set);
  read(j, "horizon_s", f.horizon_s);
  read(j, "dt_ms", f.dt_ms);
  read(j, "kick", f.kick);
  read(j, "sample_every", f.sample_every);
  read(j, "transient_fraction", f.transient_fraction);
  return f;
}

nlohmann::json phase_json(const PhaseSection& p) {
  nlohmann::json j{{"model", p.model},
                   {"horizon_s", p.horizon_s},
                   {"dt_ms", p.dt_ms},
                   {"sample_every", p.sample_every},
                   {"transient_fraction", p.transient_fraction}};
  j["omega_rad_s"] = p.omega_rad_s ? nlohmann::json(*p.omega_rad_s) : nlohmann::json(nullptr);
  j["coupling_per_s"] = p.coupling_per_s ? nlohmann::json(*p.coupling_per_s) : nlohmann::json(nullptr);
  j["tau_s"] = p.tau_s ? nlohmann::json(*p.tau_s) : nlohmann::json(nullptr);
  return j;
}

PhaseSection phase_section(const nlohmann::json& j) {
  reject_unknown_keys(j, {"model", "omega_rad_s", "coupling_per_s", "tau_s", "horizon_s", "dt_ms",
                          "sample_every", "transient_fraction"},
                      "phase");
  PhaseSection p;
  read(j, "model", p.model);
  if (j.contains("omega_rad_s") && !j["omega_rad_s"].is_null()) {
    p.omega_rad_s = j["omega_rad_s"].get<std::array<double, 2>>();
  }
  if (j.contains("coupling_per_s") && !j["coupling_per_s"].is_null()) {
    p.coupling_per_s = j["coupling_per_s"].get<double>();
  }
  if (j.contains("tau_s") && !j["tau_s"].is_null()) p.tau_s = j["tau_s"].get<double>();
  read(j, "horizon_s", p.horizon_s);
  read(j, "dt_ms", p.dt_ms);
  read(j, "sample_every", p.sample_every);
  read(j, "transient_fraction", p.transient_fraction);
  return p;
}

nlohmann::json packet_json(const PacketSection& p) {
  return {{"access_capacity_mbps", p.access_capacity_mbps},
          {"cross_flows", p.cross_flows},
          {"cross_access_mbps", p.cross_access_mbps},
          {"cross_rtt_ms", p.cross_rtt_ms},
          {"duration_s", p.duration_s},
          {"sample_interval_ms", p.sample_interval_ms},
          {"start_jitter_s", p.start_jitter_s}};
}

PacketSection packet_section(const nlohmann::json& j) {
  reject_unknown_keys(j, {"access_capacity_mbps", "cross_flows", "cross_access_mbps",
                          "cross_rtt_ms", "duration_s", "sample_interval_ms", "start_jitter_s"},
                      "packet");
  PacketSection p;
  read(j, "access_capacity_mbps", p.access_capacity_mbps);
  read(j, "cross_flows", p.cross_flows);
  read(j, "cross_access_mbps", p.cross_access_mbps);
  read(j, "cross_rtt_ms", p.cross_rtt_ms);
  read(j, "duration_s", p.duration_s);
  read(j, "sample_interval_ms", p.sample_interval_ms);
  read(j, "start_jitter_s", p.start_jitter_s);
  return p;
}

nlohmann::json sweep_json(const SweepSection& s) {
  nlohmann::json targets = nlohmann::json::array();
  for (const auto& t : s.targets) targets.push_back({{"path", t.path}, {"factor", t.factor}});
  return {{"command", s.command}, {"targets", targets}, {"from", s.from}, {"to", s.to},
          {"steps", s.steps},     {"scale", s.scale},   {"jobs", s.jobs}};
}

SweepSection sweep_section(const nlohmann::json& j) {
  reject_unknown_keys(j, {"command", "targets", "from", "to", "steps", "scale", "jobs"}, "sweep");
  SweepSection s;
  read(j, "command", s.command);
  read(j, "from", s.from);
  read(j, "to", s.to);
  read(j, "steps", s.steps);
  read(j, "scale", s.scale);
  read(j, "jobs", s.jobs);
  if (j.contains("targets")) {
    for (const auto& t : j.at("targets")) {
      reject_unknown_keys(t, {"path", "factor"}, "sweep target");
      s.targets.push_back({t.at("path").get<std::string>(), t.value("factor", 1.0)});
    }
  }
  return s;
}

}  // namespace

std::vector<double> SweepSection::values() const {
  std::vector<double> v;
  for (int i = 0; i < steps; ++i) {
    const double f = steps == 1 ? 0.0 : static_cast<double>(i) / (steps - 1);
    if (scale == "log") {
      v.push_back(std::exp(std::log(from) + f * (std::log(to) - std::log(from))));
    } else {
      v.push_back(from + f * (to - from));
    }
  }
  return v;
}

void ExperimentConfig::validate() const {
  protocol.validate();
  const auto& n = network;
  for (int m = 0; m < 2; ++m) {
    require(n.flows[m] >= 1, "network.flows must be at least 1 per set");
    require(n.edge_capacity_mbps[m] > 0.0, "network.edge_capacity_mbps must be positive");
    require(n.rtt_ms[m] > 0.0, "network.rtt_ms must be positive");
    require(n.edge_buffer_pkts[m] >= 1.0, "network.edge_buffer_pkts must be at least 1");
    require(n.edge_burstiness[m] >= 1.0, "network.edge_burstiness must be at least 1");
  }
  require(n.core_capacity_mbps > 0.0, "network.core_capacity_mbps must be positive");
  require(n.core_buffer_pkts >= 1.0, "network.core_buffer_pkts must be at least 1");
  require(n.core_burstiness >= 1.0, "network.core_burstiness must be at least 1");
  require(n.packet_bytes >= 1, "network.packet_bytes must be positive");

  require(fluid.model == "single" || fluid.model == "coupled" || fluid.model == "linearized",
          "fluid.model must be single, coupled or linearized");
  require(fluid.set == 1 || fluid.set == 2, "fluid.set must be 1 or 2");
  require(fluid.horizon_s > 0.0, "fluid.horizon_s must be positive");
  require(fluid.dt_ms >= 0.0, "fluid.dt_ms must be non-negative");
  require(fluid.kick[0] > 0.0 && fluid.kick[1] > 0.0, "fluid.kick must be positive");
  require(fluid.sample_every >= 1, "fluid.sample_every must be at least 1");
  require(fluid.transient_fraction >= 0.0 && fluid.transient_fraction < 1.0,
          "fluid.transient_fraction must lie in [0, 1)");

  require(phase.model == "equal" || phase.model == "general", "phase.model must be equal or general");
  require(phase.horizon_s > 0.0, "phase.horizon_s must be positive");
  require(phase.dt_ms >= 0.0, "phase.dt_ms must be non-negative");
  require(phase.sample_every >= 1, "phase.sample_every must be at least 1");
  require(phase.transient_fraction >= 0.0 && phase.transient_fraction < 1.0,
          "phase.transient_fraction must lie in [0, 1)");
  require(!phase.tau_s || *phase.tau_s > 0.0, "phase.tau_s must be positive");

  require(packet.access_capacity_mbps >= 0.0, "packet.access_capacity_mbps must be non-negative");
  require(packet.cross_flows >= 0, "packet.cross_flows must be non-negative");
  require(packet.cross_access_mbps >= 0.0, "packet.cross_access_mbps must be non-negative");
  require(packet.cross_rtt_ms > 0.0, "packet.cross_rtt_ms must be positive");
  require(packet.duration_s > 0.0, "packet.duration_s must be positive");
  require(packet.sample_interval_ms > 0.0, "packet.sample_interval_ms must be positive");
  require(packet.start_jitter_s >= 0.0, "packet.start_jitter_s must be non-negative");

  if (coupling_sweep) {
    require(coupling_sweep->steps >= 1, "coupling_sweep.steps must be at least 1");
    require(coupling_sweep->K_to >= coupling_sweep->K_from,
            "coupling_sweep.K_to must not be below K_from");
  }
  if (sweep) {
    require(sweep->command == "analyze" || sweep->command == "simulate-packets" ||
                sweep->command == "simulate-fluid",
            "sweep.command must be analyze, simulate-packets or simulate-fluid");
    require(!sweep->targets.empty(), "sweep.targets must name at least one path");
    require(sweep->steps >= 1, "sweep.steps must be at least 1");
    require(sweep->scale == "linear" || sweep->scale == "log", "sweep.scale must be linear or log");
    require(sweep->scale == "linear" || (sweep->from > 0.0 && sweep->to > 0.0),
            "log sweeps need positive bounds");
    require(sweep->jobs >= 0, "sweep.jobs must be non-negative");
  }
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  nlohmann::json j{{"name", cfg.name},
                   {"protocol", tcpsync::to_json(cfg.protocol)},
                   {"regime", std::string(to_string(cfg.regime))},
                   {"network", network_json(cfg.network)},
                   {"fluid", fluid_json(cfg.fluid)},
                   {"phase", phase_json(cfg.phase)},
                   {"packet", packet_json(cfg.packet)},
                   {"seed", cfg.seed}};
  j["coupling_sweep"] =
      cfg.coupling_sweep
          ? nlohmann::json{{"K_from", cfg.coupling_sweep->K_from},
                           {"K_to", cfg.coupling_sweep->K_to},
                           {"steps", cfg.coupling_sweep->steps}}
          : nlohmann::json(nullptr);
  j["sweep"] = cfg.sweep ? sweep_json(*cfg.sweep) : nlohmann::json(nullptr);
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  reject_unknown_keys(j, {"name", "protocol", "regime", "network", "fluid", "phase", "packet",
                          "coupling_sweep", "sweep", "seed"},
                      "configuration");
  ExperimentConfig cfg;
  read(j, "name", cfg.name);
  if (j.contains("protocol")) cfg.protocol = protocol_from_json(j.at("protocol"));
  if (j.contains("regime")) cfg.regime = parse_regime(j.at("regime").get<std::string>());
  if (j.contains("network")) cfg.network = network_section(j.at("network"));
  if (j.contains("fluid")) cfg.fluid = fluid_section(j.at("fluid"));
  if (j.contains("phase")) cfg.phase = phase_section(j.at("phase"));
  if (j.contains("packet")) cfg.packet = packet_section(j.at("packet"));
  if (j.contains("coupling_sweep") && !j["coupling_sweep"].is_null()) {
    const auto& c = j["coupling_sweep"];
    reject_unknown_keys(c, {"K_from", "K_to", "steps"}, "coupling_sweep");
    CouplingSweepSection s;
    read(c, "K_from", s.K_from);
    read(c, "K_to", s.K_to);
    read(c, "steps", s.steps);
    cfg.coupling_sweep = s;
  }
  if (j.contains("sweep") && !j["sweep"].is_null()) cfg.sweep = sweep_section(j["sweep"]);
  read(j, "seed", cfg.seed);
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot read configuration file '" + path + "'");
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("configuration file '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

double mbps_to_pps(double mbps, int packet_bytes) {
  return mbps * 125000.0 / static_cast<double>(packet_bytes);
}

NetworkParams fluid_network(const ExperimentConfig& cfg) {
  const auto& n = cfg.network;
  NetworkParams net;
  for (int m = 0; m < 2; ++m) {
    net.c_prime[m] = mbps_to_pps(n.edge_capacity_mbps[m], n.packet_bytes) / n.flows[m];
    net.tau[m] = n.rtt_ms[m] / 1000.0;
    net.b[m] = n.edge_buffer_pkts[m];
    net.n_e[m] = n.edge_burstiness[m];
  }
  net.C_tilde =
      2.0 * mbps_to_pps(n.core_capacity_mbps, n.packet_bytes) / (n.flows[0] + n.flows[1]);
  net.B = n.core_buffer_pkts;
  net.n_c = n.core_burstiness;
  net.validate();
  return net;
}

DdeConfig fluid_dde_config(const ExperimentConfig& cfg) {
  DdeConfig d;
  d.dt = cfg.fluid.dt_ms / 1000.0;
  d.horizon = cfg.fluid.horizon_s;
  d.kick = cfg.fluid.kick;
  d.sample_every = cfg.fluid.sample_every;
  d.transient_fraction = cfg.fluid.transient_fraction;
  return d;
}

DdeConfig phase_dde_config(const ExperimentConfig& cfg) {
  DdeConfig d;
  d.dt = cfg.phase.dt_ms / 1000.0;
  d.horizon = cfg.phase.horizon_s;
  d.sample_every = cfg.phase.sample_every;
  d.transient_fraction = cfg.phase.transient_fraction;
  return d;
}

ScenarioConfig packet_scenario(const ExperimentConfig& cfg) {
  const auto& n = cfg.network;
  const auto& p = cfg.packet;
  ScenarioConfig s;
  for (int m = 0; m < 2; ++m) {
    s.topology.edge_capacity[m] = mbps_to_pps(n.edge_capacity_mbps[m], n.packet_bytes);
    s.topology.edge_buffer[m] = static_cast<int>(std::lround(n.edge_buffer_pkts[m]));
  }
  s.topology.core_capacity = mbps_to_pps(n.core_capacity_mbps, n.packet_bytes);
  s.topology.core_buffer = static_cast<int>(std::lround(n.core_buffer_pkts));
  s.topology.access_capacity = mbps_to_pps(p.access_capacity_mbps, n.packet_bytes);
  s.topology.packet_bytes = n.packet_bytes;
  for (int m = 0; m < 2; ++m) {
    s.groups.push_back({m, n.flows[m], cfg.protocol, n.rtt_ms[m] / 1000.0, -1.0});
  }
  if (p.cross_flows > 0) {
    s.groups.push_back({-1, p.cross_flows, cfg.protocol, p.cross_rtt_ms / 1000.0,
                        mbps_to_pps(p.cross_access_mbps, n.packet_bytes)});
  }
  s.duration = p.duration_s;
  s.sample_interval = p.sample_interval_ms / 1000.0;
  s.start_jitter = p.start_jitter_s;
  s.seed = cfg.seed;
  s.validate();
  return s;
}

}  // namespace tcpsync::cli
