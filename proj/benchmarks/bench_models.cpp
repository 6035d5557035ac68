#include <benchmark/benchmark.h>

#include "tcpsync/dde.hpp"
#include "tcpsync/equilibrium.hpp"
#include "tcpsync/packet_sim.hpp"
#include "tcpsync/spectral.hpp"
#include "tcpsync/sync_solver.hpp"

using namespace tcpsync;

namespace {

NetworkParams coupled_network() {
  NetworkParams net;
  net.c_prime = {80.0, 80.0};
  net.tau = {0.1, 0.11};
  net.b = {10.0, 10.0};
  net.B = 15.0;
  net.C_tilde = 160.0;
  return net;
}

void BM_SolveCoupled(benchmark::State& state) {
  const auto net = coupled_network();
  for (auto _ : state) benchmark::DoNotOptimize(solve_coupled(ProtocolSpec::compound(), Regime::SmallBuffer, net));
}
BENCHMARK(BM_SolveCoupled);

void BM_SolveSync(benchmark::State& state) {
  SyncProblem p;
  p.regime = Regime::Intermediate;
  p.omega1 = 50.0;
  p.omega2 = 51.0;
  p.K = static_cast<double>(state.range(0));
  p.tau = 0.1;
  for (auto _ : state) benchmark::DoNotOptimize(solve_sync(p));
}
BENCHMARK(BM_SolveSync)->Arg(5)->Arg(30)->Arg(300);

// One simulated second of the coupled fluid model at the default step (tau/500).
void BM_FluidCoupledSecond(benchmark::State& state) {
  const auto net = coupled_network();
  DdeConfig cfg;
  cfg.horizon = 1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_fluid_coupled(ProtocolSpec::reno(), Regime::SmallBuffer, net, cfg));
  }
  state.SetItemsProcessed(state.iterations() * 5000);
}
BENCHMARK(BM_FluidCoupledSecond)->Unit(benchmark::kMillisecond);

void BM_PhaseOscillatorsSecond(benchmark::State& state) {
  PhaseModel m;
  m.omega = {40.0, 41.0};
  m.tau = {0.1, 0.1};
  m.coupling = {{{5.0, 5.0}, {5.0, 5.0}}};
  DdeConfig cfg;
  cfg.horizon = 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(simulate_phase_oscillators(m, cfg));
}
BENCHMARK(BM_PhaseOscillatorsSecond)->Unit(benchmark::kMillisecond);

void BM_EstimateLock(benchmark::State& state) {
  const auto net = coupled_network();
  DdeConfig cfg;
  cfg.horizon = 30.0;
  cfg.sample_every = 10;
  const auto t = simulate_fluid_coupled(ProtocolSpec::reno(), Regime::SmallBuffer, net, cfg);
  for (auto _ : state) benchmark::DoNotOptimize(estimate_lock(t, "w1", "w2"));
}
BENCHMARK(BM_EstimateLock)->Unit(benchmark::kMillisecond);

// Desk-scale dumbbell, 20 Compound flows, 60 simulated seconds.
void BM_PacketScenario(benchmark::State& state) {
  ScenarioConfig cfg;
  cfg.topology.edge_buffer = {100, 100};
  cfg.topology.core_buffer = 100;
  FlowGroup a, b;
  b.set = 1;
  b.rtt = 0.11;
  cfg.groups = {a, b};
  cfg.duration = 60.0;
  std::uint64_t packets = 0;
  for (auto _ : state) {
    const auto r = run_scenario(cfg);
    packets += r.counters.sent;
    benchmark::DoNotOptimize(r);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(packets));
}
BENCHMARK(BM_PacketScenario)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
