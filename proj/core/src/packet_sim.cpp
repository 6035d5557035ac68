#include "tcpsync/packet_sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <span>
#include <queue>
#include <random>
#include <stdexcept>
#include <string>

#include "tcpsync/errors.hpp"
#include "tcpsync/serialization.hpp"

namespace tcpsync {

void Topology::validate() const {
  for (int m = 0; m < 2; ++m) {
    if (!(edge_capacity[m] > 0.0)) throw DomainError("edge capacity must be positive");
    if (edge_buffer[m] < 1) throw DomainError("edge buffer must hold at least one packet");
  }
  if (!(core_capacity > 0.0)) throw DomainError("core capacity must be positive");
  if (core_buffer < 1) throw DomainError("core buffer must hold at least one packet");
  if (access_capacity < 0.0) throw DomainError("access capacity must be non-negative");
  if (packet_bytes < 1) throw DomainError("packet size must be positive");
}

bool Topology::core_is_bottleneck() const {
  return core_capacity < edge_capacity[0] + edge_capacity[1];
}

double FlowState::window() const { return std::min(cwnd + dwnd, awnd); }

void reno_window_update(FlowState& f, WindowEvent ev) {
  if (ev == WindowEvent::Ack) {
    f.cwnd += 1.0 / f.cwnd;
  } else {
    f.cwnd = std::max(f.cwnd / 2.0, 1.0);
  }
}

void illinois_window_update(FlowState& f, WindowEvent ev, const ProtocolSpec& spec) {
  if (ev == WindowEvent::Ack) {
    f.cwnd += spec.alpha_max / f.cwnd;
  } else {
    f.cwnd = std::max((1.0 - spec.beta_min) * f.cwnd, 1.0);
  }
}

void compound_window_update(FlowState& f, WindowEvent ev, const ProtocolSpec& spec,
                            double rtt_sample) {
  if (ev == WindowEvent::Loss) {
    const double w = f.window();
    const double half = f.cwnd / 2.0;
    f.dwnd = std::max(w * (1.0 - spec.beta) - half, 0.0);
    f.cwnd = std::max(half, 1.0);
    f.acks_in_round = 0;
    return;
  }
  if (rtt_sample > 0.0) {
    f.last_rtt = rtt_sample;
    f.base_rtt = f.base_rtt > 0.0 ? std::min(f.base_rtt, rtt_sample) : rtt_sample;
  }
  f.cwnd += 1.0 / f.cwnd;
  ++f.acks_in_round;
  const double w = f.window();
  if (static_cast<double>(f.acks_in_round) < w || f.base_rtt <= 0.0) return;
  f.acks_in_round = 0;
  const double diff = (w / f.base_rtt - w / f.last_rtt) * f.base_rtt;
  if (diff < spec.gamma) {
    f.dwnd += std::max(spec.alpha * std::pow(w, spec.k) - 1.0, 0.0);
  } else {
    f.dwnd = std::max(f.dwnd - spec.zeta * diff, 0.0);
  }
}

void window_update(FlowState& f, WindowEvent ev, const ProtocolSpec& spec, double rtt_sample) {
  if (ev == WindowEvent::Ack && rtt_sample > 0.0) {
    f.last_rtt = rtt_sample;
    f.base_rtt = f.base_rtt > 0.0 ? std::min(f.base_rtt, rtt_sample) : rtt_sample;
  }
  switch (spec.variant) {
    case Variant::Reno: reno_window_update(f, ev); break;
    case Variant::Illinois: illinois_window_update(f, ev, spec); break;
    case Variant::Compound: compound_window_update(f, ev, spec, rtt_sample); break;
  }
}

void ScenarioConfig::validate() const {
  topology.validate();
  if (groups.empty()) throw DomainError("scenario has no flows");
  for (const auto& g : groups) {
    if (g.set < -1 || g.set > 1) throw DomainError("flow group set must be 0, 1 or -1 (cross)");
    if (g.count < 1) throw DomainError("flow group count must be positive");
    if (!(g.rtt > 0.0)) throw DomainError("flow group round-trip time must be positive");
    g.protocol.validate();
  }
  if (!(duration > 0.0)) throw DomainError("duration must be positive");
  if (!(sample_interval > 0.0)) throw DomainError("sample interval must be positive");
  if (start_jitter < 0.0) throw DomainError("start jitter must be non-negative");
}

namespace {

constexpr int kCore = 2;

struct Packet {
  int flow = 0;
  std::uint64_t seq = 0;
  double sent_at = 0.0;
};

enum class EventType : std::uint8_t {
  FlowStart,
  AccessDone,
  RouterDone,
  Deliver,
  Ack,
  LossTimer,
  SampleQueues,
  SampleWindows,
};

struct Event {
  double t = 0.0;
  std::uint64_t order = 0;
  EventType type = EventType::FlowStart;
  int index = 0;
  Packet pkt;
};

struct Later {
  bool operator()(const Event& a, const Event& b) const {
    return a.t != b.t ? a.t > b.t : a.order > b.order;
  }
};

struct PendingLoss {
  std::uint64_t seq = 0;
  int dupacks = 0;
};

struct Flow {
  FlowState st;
  ProtocolSpec proto;
  int set = 0;
  double rtt = 0.0;
  double access_capacity = 0.0;
  bool started = false;
  std::uint64_t next_seq = 0;
  long in_flight = 0;
  std::uint64_t recovery_seq = 0;  // losses of earlier packets belong to the last reduction
  std::deque<PendingLoss> lost;
  std::deque<Packet> access;
  bool access_busy = false;
};

struct Router {
  double capacity = 0.0;
  std::size_t buffer = 0;
  std::deque<Packet> queue;
  double busy_time = 0.0;
};

// 53 random mantissa bits; independent of the standard library's distributions.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

class Simulator {
 public:
  explicit Simulator(const ScenarioConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {
    const auto& topo = cfg.topology;
    routers_[0] = {topo.edge_capacity[0], static_cast<std::size_t>(topo.edge_buffer[0]), {}, 0.0};
    routers_[1] = {topo.edge_capacity[1], static_cast<std::size_t>(topo.edge_buffer[1]), {}, 0.0};
    routers_[kCore] = {topo.core_capacity, static_cast<std::size_t>(topo.core_buffer), {}, 0.0};
    for (const auto& g : cfg.groups) {
      for (int i = 0; i < g.count; ++i) {
        Flow f;
        f.proto = g.protocol;
        f.set = g.set;
        f.rtt = g.rtt;
        f.access_capacity = g.access_capacity >= 0.0 ? g.access_capacity : topo.access_capacity;
        f.st.last_rtt = g.rtt;
        flows_.push_back(std::move(f));
      }
    }
    for (int m = 0; m < 2; ++m) {
      for (const auto& g : cfg.groups) {
        if (g.set == m) {
          set_rtt_[m] = g.rtt;
          break;
        }
      }
    }
  }

  ScenarioResult run() {
    for (std::size_t i = 0; i < flows_.size(); ++i) {
      push(cfg_.start_jitter * uniform01(rng_), EventType::FlowStart, static_cast<int>(i));
    }
    push(0.0, EventType::SampleQueues, 0);
    for (int m = 0; m < 2; ++m) {
      if (set_rtt_[m] > 0.0) push(0.0, EventType::SampleWindows, m);
    }
    while (!events_.empty()) {
      const Event ev = events_.top();
      if (ev.t > cfg_.duration) break;
      events_.pop();
      now_ = ev.t;
      dispatch(ev);
    }
    return finish();
  }

 private:
  void push(double t, EventType type, int index, Packet pkt = {}) {
    events_.push(Event{t, order_++, type, index, pkt});
  }

  void dispatch(const Event& ev) {
    switch (ev.type) {
      case EventType::FlowStart:
        flows_[ev.index].started = true;
        try_send(ev.index);
        break;
      case EventType::AccessDone: access_done(ev.index); break;
      case EventType::RouterDone: router_done(ev.index); break;
      case EventType::Deliver:
        --propagating_;
        ++counters_.delivered;
        push(now_ + flows_[ev.pkt.flow].rtt / 2.0, EventType::Ack, ev.pkt.flow, ev.pkt);
        break;
      case EventType::Ack: ack(ev.pkt); break;
      case EventType::LossTimer: loss_timer(ev.index, ev.pkt.seq); break;
      case EventType::SampleQueues: sample_queues(); break;
      case EventType::SampleWindows: sample_windows(ev.index); break;
    }
  }

  void try_send(int fi) {
    Flow& f = flows_[fi];
    while (f.in_flight < static_cast<long>(std::floor(f.st.window()))) {
      Packet pkt{fi, f.next_seq++, now_};
      ++f.in_flight;
      ++counters_.sent;
      if (f.access_capacity <= 0.0) {
        enter_router(first_hop(f), pkt);
        continue;
      }
      f.access.push_back(pkt);
      if (!f.access_busy) {
        f.access_busy = true;
        push(now_ + 1.0 / f.access_capacity, EventType::AccessDone, fi);
      }
    }
  }

  static int first_hop(const Flow& f) { return f.set < 0 ? kCore : f.set; }

  void access_done(int fi) {
    Flow& f = flows_[fi];
    const Packet pkt = f.access.front();
    f.access.pop_front();
    enter_router(first_hop(f), pkt);
    if (f.access.empty()) {
      f.access_busy = false;
    } else {
      push(now_ + 1.0 / f.access_capacity, EventType::AccessDone, fi);
    }
  }

  void enter_router(int r, const Packet& pkt) {
    Router& router = routers_[r];
    if (router.queue.size() >= router.buffer) {
      drop(r, pkt);
      return;
    }
    router.queue.push_back(pkt);
    if (router.queue.size() == 1) start_service(r);
  }

  void start_service(int r) {
    const double service = 1.0 / routers_[r].capacity;
    routers_[r].busy_time += service;
    push(now_ + service, EventType::RouterDone, r);
  }

  void router_done(int r) {
    Router& router = routers_[r];
    const Packet pkt = router.queue.front();
    router.queue.pop_front();
    if (!router.queue.empty()) start_service(r);
    if (r != kCore) {
      enter_router(kCore, pkt);
    } else {
      ++propagating_;
      push(now_ + flows_[pkt.flow].rtt / 2.0, EventType::Deliver, pkt.flow, pkt);
    }
  }

  void drop(int r, const Packet& pkt) {
    if (r == kCore) {
      ++counters_.dropped_core;
    } else {
      ++counters_.dropped_edge[r];
    }
    Flow& f = flows_[pkt.flow];
    f.lost.push_back({pkt.seq, 0});
    // Fallback detection when too few later packets arrive to produce duplicate acks.
    const double wait = 2.0 * std::max(f.st.last_rtt, f.rtt);
    push(now_ + wait, EventType::LossTimer, pkt.flow, pkt);
  }

  void detect_loss(int fi, std::uint64_t seq) {
    Flow& f = flows_[fi];
    --f.in_flight;
    if (seq >= f.recovery_seq) {
      window_update(f.st, WindowEvent::Loss, f.proto);
      ++counters_.loss_events;
      f.recovery_seq = f.next_seq;
    }
  }

  void ack(const Packet& pkt) {
    Flow& f = flows_[pkt.flow];
    --f.in_flight;
    window_update(f.st, WindowEvent::Ack, f.proto, now_ - pkt.sent_at);
    for (auto it = f.lost.begin(); it != f.lost.end();) {
      if (it->seq < pkt.seq && ++it->dupacks >= 3) {
        const std::uint64_t seq = it->seq;
        it = f.lost.erase(it);
        detect_loss(pkt.flow, seq);
      } else {
        ++it;
      }
    }
    try_send(pkt.flow);
  }

  void loss_timer(int fi, std::uint64_t seq) {
    Flow& f = flows_[fi];
    for (auto it = f.lost.begin(); it != f.lost.end(); ++it) {
      if (it->seq == seq) {
        f.lost.erase(it);
        detect_loss(fi, seq);
        try_send(fi);
        return;
      }
    }
  }

  std::uint64_t in_network() const {
    std::uint64_t n = propagating_;
    for (const auto& r : routers_) n += r.queue.size();
    for (const auto& f : flows_) n += f.access.size();
    return n;
  }

  void sample_queues() {
    q_edge_[0].push_back(static_cast<double>(routers_[0].queue.size()));
    q_edge_[1].push_back(static_cast<double>(routers_[1].queue.size()));
    q_core_.push_back(static_cast<double>(routers_[kCore].queue.size()));
    const std::uint64_t net = in_network();
    const std::uint64_t dropped = counters_.dropped();
    s_sent_.push_back(static_cast<double>(counters_.sent));
    s_delivered_.push_back(static_cast<double>(counters_.delivered));
    s_dropped_.push_back(static_cast<double>(dropped));
    s_network_.push_back(static_cast<double>(net));
    if (counters_.sent != counters_.delivered + dropped + net) conservation_ = false;
    ++queue_samples_;
    push(static_cast<double>(queue_samples_) * cfg_.sample_interval, EventType::SampleQueues, 0);
  }

  void sample_windows(int m) {
    double sum = 0.0;
    int n = 0;
    for (const auto& f : flows_) {
      if (f.set == m && f.started) {
        sum += f.st.window();
        ++n;
      }
    }
    windows_[m].push_back(n > 0 ? sum / n : 0.0);
    push(static_cast<double>(windows_[m].size()) * set_rtt_[m], EventType::SampleWindows, m);
  }

  ScenarioResult finish() {
    ScenarioResult res;
    res.queues.model = "packet-queues";
    res.queues.dt = cfg_.sample_interval;
    res.queues.add_column("edge1", std::move(q_edge_[0]));
    res.queues.add_column("edge2", std::move(q_edge_[1]));
    res.queues.add_column("core", std::move(q_core_));
    res.queues.add_column("sent", std::move(s_sent_));
    res.queues.add_column("delivered", std::move(s_delivered_));
    res.queues.add_column("dropped", std::move(s_dropped_));
    res.queues.add_column("in_network", std::move(s_network_));
    res.queues.metadata = {{"seed", cfg_.seed}, {"scenario", to_json(cfg_)}};
    for (int m = 0; m < 2; ++m) {
      Trace& w = res.windows[m];
      w.model = "packet-window-set" + std::to_string(m + 1);
      w.dt = set_rtt_[m];
      w.add_column("w", std::move(windows_[m]));
      w.metadata = {{"seed", cfg_.seed}};
    }
    res.counters = counters_;
    res.core_utilization = routers_[kCore].busy_time / cfg_.duration;
    for (int m = 0; m < 2; ++m) res.edge_utilization[m] = routers_[m].busy_time / cfg_.duration;
    res.conservation_held = conservation_;
    if (!cfg_.topology.core_is_bottleneck()) {
      res.warnings.push_back("core capacity is not below the sum of the edge capacities");
    }
    return res;
  }

  const ScenarioConfig& cfg_;
  std::mt19937_64 rng_;
  std::priority_queue<Event, std::vector<Event>, Later> events_;
  std::uint64_t order_ = 0;
  double now_ = 0.0;
  std::array<Router, 3> routers_;
  std::vector<Flow> flows_;
  std::array<double, 2> set_rtt_{0.0, 0.0};
  std::uint64_t propagating_ = 0;
  LossCounters counters_;
  bool conservation_ = true;
  std::uint64_t queue_samples_ = 0;
  std::vector<double> q_edge_[2], q_core_;
  std::vector<double> s_sent_, s_delivered_, s_dropped_, s_network_;
  std::vector<double> windows_[2];
};

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  return Simulator(cfg).run();
}

namespace {

struct Segment {
  double amplitude = 0.0;
  double period = 0.0;
  int cycles = 0;
};

Segment measure(std::span<const double> s, double dt) {
  Segment seg;
  const double n = static_cast<double>(s.size());
  double mean = 0.0;
  for (double v : s) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : s) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / n);

  std::vector<double> sorted(s.begin(), s.end());
  std::sort(sorted.begin(), sorted.end());
  auto pct = [&](double f) { return sorted[static_cast<std::size_t>(f * (n - 1.0))]; };
  seg.amplitude = pct(0.95) - pct(0.05);
  if (sd <= 0.0) return seg;

  const double hi = mean + 0.5 * sd;
  const double lo = mean - 0.5 * sd;
  int state = 0;
  std::size_t first = 0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (state <= 0 && s[i] > hi) {
      state = 1;
      if (seg.cycles == 0) first = i;
      last = i;
      ++seg.cycles;
    } else if (state >= 0 && s[i] < lo) {
      state = -1;
    }
  }
  if (seg.cycles >= 2) seg.period = static_cast<double>(last - first) * dt / (seg.cycles - 1);
  return seg;
}

}  // namespace

QueueOscillation analyze_queue(const Trace& queues, const std::string& column, int buffer,
                               double capacity, double rtt, const OscillationCriteria& c) {
  const auto& all = queues.column(column);
  const auto skip = static_cast<std::size_t>(c.transient * static_cast<double>(all.size()));
  const auto width = static_cast<std::size_t>(
      std::max(1.0, std::round(c.smoothing_rtts * rtt / queues.dt)));
  if (all.size() < skip + width + 32) throw std::invalid_argument("queue trace too short to analyse");

  // Trailing moving average over the smoothing window.
  std::vector<double> smooth;
  double acc = 0.0;
  for (std::size_t i = skip; i < all.size(); ++i) {
    acc += all[i];
    if (i >= skip + width) acc -= all[i - width];
    if (i + 1 >= skip + width) smooth.push_back(acc / static_cast<double>(width));
  }

  QueueOscillation q;
  for (std::size_t i = skip; i < all.size(); ++i) q.mean += all[i];
  q.mean /= static_cast<double>(all.size() - skip);

  const auto whole = measure(smooth, queues.dt);
  q.amplitude = whole.amplitude;
  q.period = whole.period;
  q.cycles = whole.cycles;
  q.swing = q.amplitude / buffer;
  q.delay_swing = q.amplitude / capacity / rtt;

  auto passes = [&](const Segment& seg) {
    return seg.amplitude / buffer >= c.min_swing &&
           seg.amplitude / capacity / rtt >= c.min_delay_swing && seg.cycles >= c.min_cycles;
  };
  const std::size_t half = smooth.size() / 2;
  const std::span<const double> all_smooth(smooth);
  q.sustained = passes(measure(all_smooth.first(half), queues.dt)) &&
                passes(measure(all_smooth.subspan(half), queues.dt));
  return q;
}

nlohmann::json to_json(const ScenarioConfig& cfg) {
  const auto& t = cfg.topology;
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : cfg.groups) {
    groups.push_back({{"set", g.set},
                      {"count", g.count},
                      {"protocol", to_json(g.protocol)},
                      {"rtt_s", g.rtt},
                      {"access_capacity_pps", g.access_capacity}});
  }
  return {{"topology",
           {{"edge_capacity_pps", t.edge_capacity},
            {"core_capacity_pps", t.core_capacity},
            {"access_capacity_pps", t.access_capacity},
            {"edge_buffer_pkts", t.edge_buffer},
            {"core_buffer_pkts", t.core_buffer},
            {"packet_bytes", t.packet_bytes}}},
          {"groups", groups},
          {"duration_s", cfg.duration},
          {"sample_interval_s", cfg.sample_interval},
          {"start_jitter_s", cfg.start_jitter},
          {"seed", cfg.seed}};
}

ScenarioConfig scenario_from_json(const nlohmann::json& j) {
  reject_unknown_keys(j, {"topology", "groups", "duration_s", "sample_interval_s", "start_jitter_s",
                          "seed"},
                      "scenario");
  ScenarioConfig cfg;
  const auto& t = j.at("topology");
  reject_unknown_keys(t, {"edge_capacity_pps", "core_capacity_pps", "access_capacity_pps",
                          "edge_buffer_pkts", "core_buffer_pkts", "packet_bytes"},
                      "topology");
  cfg.topology.edge_capacity = t.value("edge_capacity_pps", cfg.topology.edge_capacity);
  cfg.topology.core_capacity = t.value("core_capacity_pps", cfg.topology.core_capacity);
  cfg.topology.access_capacity = t.value("access_capacity_pps", cfg.topology.access_capacity);
  cfg.topology.edge_buffer = t.value("edge_buffer_pkts", cfg.topology.edge_buffer);
  cfg.topology.core_buffer = t.value("core_buffer_pkts", cfg.topology.core_buffer);
  cfg.topology.packet_bytes = t.value("packet_bytes", cfg.topology.packet_bytes);
  for (const auto& g : j.at("groups")) {
    reject_unknown_keys(g, {"set", "count", "protocol", "rtt_s", "access_capacity_pps"},
                        "flow group");
    FlowGroup fg;
    fg.set = g.value("set", fg.set);
    fg.count = g.value("count", fg.count);
    if (g.contains("protocol")) fg.protocol = protocol_from_json(g.at("protocol"));
    fg.rtt = g.value("rtt_s", fg.rtt);
    fg.access_capacity = g.value("access_capacity_pps", fg.access_capacity);
    cfg.groups.push_back(fg);
  }
  cfg.duration = j.value("duration_s", cfg.duration);
  cfg.sample_interval = j.value("sample_interval_s", cfg.sample_interval);
  cfg.start_jitter = j.value("start_jitter_s", cfg.start_jitter);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.validate();
  return cfg;
}

}  // namespace tcpsync
