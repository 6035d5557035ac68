#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "../oracles/aimd.hpp"
#include "tcpsync/errors.hpp"
#include "tcpsync/packet_sim.hpp"

using namespace tcpsync;

TEST_CASE("reno window rules") {
  FlowState f;
  f.cwnd = 10.0;
  reno_window_update(f, WindowEvent::Ack);
  CHECK(f.cwnd == doctest::Approx(10.1));
  f.cwnd = 10.0;
  reno_window_update(f, WindowEvent::Loss);
  CHECK(f.cwnd == 5.0);
  f.cwnd = 1.0;
  reno_window_update(f, WindowEvent::Loss);
  CHECK(f.cwnd == 1.0);
}

TEST_CASE("illinois window rules") {
  const auto s = ProtocolSpec::illinois();
  FlowState f;
  f.cwnd = 10.0;
  illinois_window_update(f, WindowEvent::Ack, s);
  CHECK(f.cwnd == doctest::Approx(11.0));
  f.cwnd = 16.0;
  illinois_window_update(f, WindowEvent::Loss, s);
  CHECK(f.cwnd == doctest::Approx(14.0));
  f.cwnd = 1.0;
  illinois_window_update(f, WindowEvent::Loss, s);
  CHECK(f.cwnd == 1.0);
}

TEST_CASE("compound window rules") {
  const auto s = ProtocolSpec::compound();
  SUBCASE("loss") {
    FlowState f;
    f.cwnd = 12.0;
    f.dwnd = 8.0;
    compound_window_update(f, WindowEvent::Loss, s);
    CHECK(f.dwnd == doctest::Approx(4.0));
    CHECK(f.cwnd == 6.0);
  }
  SUBCASE("growth once per window of acks while the path is idle") {
    FlowState f;
    f.cwnd = 40.0;
    int acks = 0;
    while (f.dwnd == 0.0 && acks < 100) {
      compound_window_update(f, WindowEvent::Ack, s, 0.1);
      ++acks;
    }
    CHECK(acks == 42);
    CHECK(f.dwnd == doctest::Approx(s.alpha * std::pow(f.cwnd, s.k) - 1.0).epsilon(1e-12));
  }
  SUBCASE("a backlog equal to gamma reduces the delay window") {
    FlowState f;
    f.cwnd = 30.0;
    f.dwnd = 20.0;
    f.base_rtt = 0.1;
    f.acks_in_round = 50;
    const double w = f.cwnd + 1.0 / f.cwnd + f.dwnd;
    double rtt = 0.1 * w / (w - s.gamma);
    auto diff = [&](double r) { return (w / 0.1 - w / r) * 0.1; };
    while (diff(rtt) < s.gamma) rtt = std::nextafter(rtt, 1.0);
    while (diff(std::nextafter(rtt, 0.0)) >= s.gamma) rtt = std::nextafter(rtt, 0.0);
    REQUIRE(diff(rtt) == s.gamma);
    compound_window_update(f, WindowEvent::Ack, s, rtt);
    CHECK(f.acks_in_round == 0);
    CHECK(f.dwnd == doctest::Approx(20.0 - s.zeta * s.gamma));
  }
  SUBCASE("base rtt never increases") {
    FlowState f;
    compound_window_update(f, WindowEvent::Ack, s, 0.2);
    compound_window_update(f, WindowEvent::Ack, s, 0.15);
    compound_window_update(f, WindowEvent::Ack, s, 0.3);
    CHECK(f.base_rtt == 0.15);
    CHECK(f.last_rtt == 0.3);
  }
}

TEST_CASE("intermediate buffer rule") {
  const double pps = 197e6 / (1500.0 * 8.0);
  CHECK(std::lround(0.25 * pps / std::sqrt(120.0)) == 375);
}

namespace {

ScenarioConfig single_reno(double C, double tau, int buffer, double duration) {
  ScenarioConfig cfg;
  cfg.topology.edge_capacity = {C, C};
  cfg.topology.core_capacity = 1e6;
  cfg.topology.core_buffer = 100000;
  cfg.topology.edge_buffer = {buffer, buffer};
  cfg.topology.access_capacity = 0.0;
  FlowGroup g;
  g.set = 0;
  g.count = 1;
  g.protocol = ProtocolSpec::reno();
  g.rtt = tau;
  cfg.groups = {g};
  cfg.duration = duration;
  cfg.start_jitter = 0.0;
  return cfg;
}

}  // namespace

TEST_CASE("single reno flow follows the AIMD sawtooth") {
  const double C = 200.0, tau = 0.1;
  const int buffer = 10;
  const auto res = run_scenario(single_reno(C, tau, buffer, 200.0));
  const auto oracle = oracle::aimd_sawtooth(C, tau, buffer);

  CHECK(res.edge_utilization[0] > 0.75);
  CHECK(res.edge_utilization[0] == doctest::Approx(oracle.utilization).epsilon(0.1));

  const auto& w = res.windows[0].column("w");
  const double dt = res.windows[0].dt;
  std::vector<double> drops;
  for (std::size_t i = w.size() * 3 / 10; i < w.size(); ++i) {
    if (w[i] < 0.75 * w[i - 1]) drops.push_back(dt * static_cast<double>(i));
  }
  REQUIRE(drops.size() >= 10);
  const double period = (drops.back() - drops.front()) / static_cast<double>(drops.size() - 1);
  CHECK(period == doctest::Approx(oracle.period).epsilon(0.1));
  const double peak = *std::max_element(w.begin() + w.size() / 2, w.end());
  CHECK(peak == doctest::Approx(oracle.w_max).epsilon(0.1));
}

TEST_CASE("scenario invariants") {
  ScenarioConfig cfg;
  cfg.topology.edge_buffer = {15, 15};
  cfg.topology.core_buffer = 15;
  FlowGroup a, b;
  a.set = 0;
  b.set = 1;
  b.rtt = 0.11;
  cfg.groups = {a, b};
  cfg.duration = 40.0;
  cfg.seed = 7;
  const auto r1 = run_scenario(cfg);
  CHECK(r1.conservation_held);
  for (const char* q : {"edge1", "edge2", "core"}) {
    const auto& col = r1.queues.column(q);
    CHECK(*std::max_element(col.begin(), col.end()) <= 15.0);
  }
  const auto& sent = r1.queues.column("sent");
  const auto& delivered = r1.queues.column("delivered");
  const auto& dropped = r1.queues.column("dropped");
  const auto& in_net = r1.queues.column("in_network");
  for (std::size_t i = 0; i < sent.size(); ++i) {
    CHECK(sent[i] == delivered[i] + dropped[i] + in_net[i]);
  }
  CHECK(r1.counters.sent == r1.counters.delivered + r1.counters.dropped() +
                                static_cast<std::uint64_t>(in_net.back()));

  const auto r2 = run_scenario(cfg);
  CHECK(to_csv(r1.queues) == to_csv(r2.queues));
  CHECK(to_csv(r1.windows[0]) == to_csv(r2.windows[0]));
  CHECK(r1.counters.loss_events == r2.counters.loss_events);

  cfg.seed = 8;
  CHECK(to_csv(run_scenario(cfg).queues) != to_csv(r1.queues));
}

TEST_CASE("misconfiguration") {
  ScenarioConfig cfg;
  cfg.groups = {FlowGroup{}};
  cfg.duration = 5.0;
  cfg.topology.core_capacity = 1e5;
  const auto r = run_scenario(cfg);
  CHECK_FALSE(r.warnings.empty());
  cfg.topology.core_buffer = 0;
  CHECK_THROWS_AS(run_scenario(cfg), DomainError);
  cfg.topology.core_buffer = 10;
  cfg.groups.clear();
  CHECK_THROWS_AS(run_scenario(cfg), DomainError);
}

TEST_CASE("scenario json round trip") {
  ScenarioConfig cfg;
  FlowGroup g;
  g.protocol = ProtocolSpec::illinois();
  g.rtt = 0.05;
  cfg.groups = {g};
  cfg.seed = 99;
  const auto back = scenario_from_json(to_json(cfg));
  CHECK(to_json(back) == to_json(cfg));
}

TEST_CASE("queue oscillation analysis") {
  Trace t;
  t.dt = 0.01;
  std::vector<double> sq(20000), flat(20000, 50.0);
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = 50.0 + 40.0 * std::sin(2.0 * M_PI * i * 0.01 / 2.0);
  t.add_column("osc", sq);
  t.add_column("flat", flat);
  const auto o = analyze_queue(t, "osc", 100, 1000.0, 0.1);
  CHECK(o.sustained);
  CHECK(o.period == doctest::Approx(2.0).epsilon(0.02));
  CHECK(o.amplitude == doctest::Approx(80.0).epsilon(0.05));
  const auto f = analyze_queue(t, "flat", 100, 1000.0, 0.1);
  CHECK_FALSE(f.sustained);
  CHECK(f.amplitude == 0.0);
}
