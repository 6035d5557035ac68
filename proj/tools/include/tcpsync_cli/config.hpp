#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tcpsync/dde.hpp"
#include "tcpsync/network.hpp"
#include "tcpsync/packet_sim.hpp"
#include "tcpsync/protocols.hpp"

namespace tcpsync::cli {

// Physical units are part of every key name.
struct NetworkSection {
  std::array<int, 2> flows{60, 60};
  std::array<double, 2> edge_capacity_mbps{100.0, 100.0};
  double core_capacity_mbps = 197.0;
  std::array<double, 2> rtt_ms{100.0, 110.0};
  std::array<double, 2> edge_buffer_pkts{15.0, 15.0};
  double core_buffer_pkts = 15.0;
  std::array<double, 2> edge_burstiness{1.0, 1.0};
  double core_burstiness = 1.0;
  int packet_bytes = 1500;
};

struct FluidSection {
  std::string model = "coupled";  // single | coupled | linearized
  int set = 1;                    // 1-based, single and linearized models
  double horizon_s = 30.0;
  double dt_ms = 0.0;             // 0: min rtt / 500
  std::array<double, 2> kick{1.05, 1.0};
  int sample_every = 10;
  double transient_fraction = 0.3;
};

struct PhaseSection {
  std::string model = "equal";  // equal | general
  std::optional<std::array<double, 2>> omega_rad_s;  // default: intrinsic frequencies
  std::optional<double> coupling_per_s;              // default: coupling strength of the network
  std::optional<double> tau_s;                       // default: mean round-trip time
  double horizon_s = 30.0;
  double dt_ms = 0.0;
  int sample_every = 10;
  double transient_fraction = 0.3;
};

struct PacketSection {
  double access_capacity_mbps = 2.0;
  int cross_flows = 0;
  double cross_access_mbps = 1.0;
  double cross_rtt_ms = 100.0;
  double duration_s = 300.0;
  double sample_interval_ms = 10.0;
  double start_jitter_s = 1.0;
};

struct CouplingSweepSection {
  double K_from = 0.0;
  double K_to = 1.0;
  int steps = 100;
};

// A swept value v is written to every target path as v * factor.
struct SweepTarget {
  std::string path;  // JSON pointer into the configuration
  double factor = 1.0;
};

struct SweepSection {
  std::string command = "analyze";  // analyze | simulate-packets | simulate-fluid
  std::vector<SweepTarget> targets;
  double from = 0.0;
  double to = 1.0;
  int steps = 10;  // number of points
  std::string scale = "linear";  // linear | log
  int jobs = 0;                  // 0: hardware concurrency, capped at 8

  std::vector<double> values() const;
};

struct ExperimentConfig {
  std::string name;
  ProtocolSpec protocol = ProtocolSpec::compound();
  Regime regime = Regime::Intermediate;
  NetworkSection network;
  FluidSection fluid;
  PhaseSection phase;
  PacketSection packet;
  std::optional<CouplingSweepSection> coupling_sweep;
  std::optional<SweepSection> sweep;
  std::uint64_t seed = 1;

  // Throws std::invalid_argument naming the violated invariant.
  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& cfg);
// Missing keys take defaults; unknown keys are errors. The result is validated.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

// Megabits per second to packets per second: mbps * 125000 / bytes, one rounding.
double mbps_to_pps(double mbps, int packet_bytes);

// Fluid-model parameters in packets and seconds.
NetworkParams fluid_network(const ExperimentConfig& cfg);
DdeConfig fluid_dde_config(const ExperimentConfig& cfg);
DdeConfig phase_dde_config(const ExperimentConfig& cfg);
ScenarioConfig packet_scenario(const ExperimentConfig& cfg);

}  // namespace tcpsync::cli
