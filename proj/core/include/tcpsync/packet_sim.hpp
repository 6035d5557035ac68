#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "tcpsync/protocols.hpp"
#include "tcpsync/trace.hpp"

namespace tcpsync {

// Two edge routers feeding one core router, Drop-Tail FIFO everywhere.
// Capacities in packets/second, buffers in packets.
struct Topology {
  std::array<double, 2> edge_capacity{1388.8888888888889, 1388.8888888888889};
  double core_capacity = 2736.1111111111111;
  double access_capacity = 166.66666666666666;  // per flow; 0 means an infinitely fast access link
  std::array<int, 2> edge_buffer{100, 100};
  int core_buffer = 100;
  int packet_bytes = 1500;

  // Throws DomainError for non-positive capacities or buffers below one packet.
  void validate() const;
  // The core is meant to be the bottleneck; false when it is not.
  bool core_is_bottleneck() const;
};

// Per-flow congestion state.
struct FlowState {
  double cwnd = 2.0;
  double dwnd = 0.0;   // Compound delay window
  double awnd = 1e9;   // receiver window
  double base_rtt = 0.0;  // 0 until the first sample
  double last_rtt = 0.0;
  long acks_in_round = 0;  // Compound: acks since the last dwnd update

  double window() const;
};

enum class WindowEvent { Ack, Loss };

/// Per-ack / per-loss window rules. `rtt_sample` is ignored on loss.
void reno_window_update(FlowState& f, WindowEvent ev);
void illinois_window_update(FlowState& f, WindowEvent ev, const ProtocolSpec& spec);
/// On ack the delay window is revised once per window of acks using the
/// backlog estimate diff = (w/baseRTT - w/RTT) baseRTT.
void compound_window_update(FlowState& f, WindowEvent ev, const ProtocolSpec& spec,
                            double rtt_sample = 0.0);
void window_update(FlowState& f, WindowEvent ev, const ProtocolSpec& spec,
                   double rtt_sample = 0.0);

struct FlowGroup {
  int set = 0;     // 0 or 1 for the edges, -1 for cross traffic entering the core directly
  int count = 10;
  ProtocolSpec protocol = ProtocolSpec::compound();
  double rtt = 0.1;  // two-way propagation delay, s
  double access_capacity = -1.0;  // per flow; negative uses the topology default
};

struct ScenarioConfig {
  Topology topology;
  std::vector<FlowGroup> groups;
  double duration = 100.0;        // s
  double sample_interval = 0.01;  // s, queue sampling
  double start_jitter = 1.0;      // flows start uniformly in [0, start_jitter)
  std::uint64_t seed = 1;

  void validate() const;
};

struct LossCounters {
  std::uint64_t sent = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped_edge[2] = {0, 0};
  std::uint64_t dropped_core = 0;
  std::uint64_t loss_events = 0;  // window reductions
  std::uint64_t dropped() const { return dropped_edge[0] + dropped_edge[1] + dropped_core; }
};

struct ScenarioResult {
  Trace queues;                 // edge1, edge2, core occupancy; sent, delivered, dropped, in_network
  std::array<Trace, 2> windows;  // mean window per set, sampled every set round-trip time
  LossCounters counters;
  double core_utilization = 0.0;
  std::array<double, 2> edge_utilization{0.0, 0.0};
  bool conservation_held = true;  // sent = delivered + dropped + in network at every sample
  std::vector<std::string> warnings;
};

/// Discrete-event run of the scenario. Deterministic for a fixed seed.
ScenarioResult run_scenario(const ScenarioConfig& cfg);

// Queue-occupancy oscillation after a transient. The series is smoothed
// over one round-trip time so packet-scale noise does not count as an
// oscillation; cycles are counted with a Schmitt trigger at mean +- 0.5 sd.
struct QueueOscillation {
  double mean = 0.0;
  double amplitude = 0.0;    // 95th minus 5th percentile of the smoothed series, packets
  double swing = 0.0;        // amplitude / buffer
  double delay_swing = 0.0;  // amplitude / capacity / rtt
  double period = 0.0;       // mean cycle length, s; 0 with fewer than two cycles
  int cycles = 0;
  bool sustained = false;    // both halves of the analysed window pass the thresholds
};

struct OscillationCriteria {
  double transient = 0.3;  // leading share discarded
  double smoothing_rtts = 1.0;
  double min_swing = 0.2;
  double min_delay_swing = 0.1;
  int min_cycles = 3;  // per half
};

/// `capacity` is the router's service rate (packets/s), `rtt` the mean
/// propagation round-trip time of the flows through it.
QueueOscillation analyze_queue(const Trace& queues, const std::string& column, int buffer,
                               double capacity, double rtt, const OscillationCriteria& c = {});

nlohmann::json to_json(const ScenarioConfig& cfg);
ScenarioConfig scenario_from_json(const nlohmann::json& j);

}  // namespace tcpsync
