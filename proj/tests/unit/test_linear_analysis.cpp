#include <doctest.h>

#include <cmath>
#include <random>

#include "../oracles/closed_forms.hpp"
#include "tcpsync/errors.hpp"
#include "tcpsync/linear_analysis.hpp"

using namespace tcpsync;

namespace {

ProtocolSpec spec_of(oracle::Law l) {
  return l == oracle::Law::Compound ? ProtocolSpec::compound()
         : l == oracle::Law::Reno   ? ProtocolSpec::reno()
                                    : ProtocolSpec::illinois();
}

EquilibriumState at(double w, double p) {
  EquilibriumState e;
  e.w_star = w;
  e.p_edge_star = p;
  return e;
}

}  // namespace

TEST_CASE("closed-form examples") {
  const auto il = closed_form_frequency(ProtocolSpec::illinois(), Regime::SmallBuffer, 20.0, 0.1, 0.1, 15.0);
  REQUIRE(il.feasible());
  CHECK(*il.omega == doctest::Approx(5.0 * std::sqrt(221.76)).epsilon(1e-12));
  CHECK(*il.omega == doctest::Approx(74.46).epsilon(1e-4));

  const auto re = closed_form_frequency(ProtocolSpec::reno(), Regime::Intermediate, 25.0, 0.2, 0.1, 0.0);
  REQUIRE(re.feasible());
  CHECK(*re.omega == doctest::Approx(125.0 * std::sqrt(0.84)).epsilon(1e-12));

  // Radicand zero: b = 2(1 - p) for Reno.
  const auto zero = closed_form_frequency(ProtocolSpec::reno(), Regime::SmallBuffer, 10.0, 0.25, 0.1, 1.5);
  REQUIRE(zero.feasible());
  CHECK(*zero.omega == doctest::Approx(0.0));
  CHECK_FALSE(closed_form_frequency(ProtocolSpec::reno(), Regime::SmallBuffer, 10.0, 0.25, 0.1, 1.0).feasible());

  CHECK_THROWS_AS(closed_form_frequency(ProtocolSpec::reno(), Regime::SmallBuffer, 10.0, 0.2, 0.1, 15.0, 2.0),
                  UnsupportedConfiguration);
}

TEST_CASE("generic frequency equals the table rows") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (auto law : {oracle::Law::Compound, oracle::Law::Reno, oracle::Law::Illinois}) {
    const auto spec = spec_of(law);
    oracle::LawParams P;
    P.law = law;
    int small_checked = 0, inter_checked = 0;
    for (int trial = 0; trial < 200; ++trial) {
      const double w = 2.0 + 60.0 * U(rng);
      const double tau = 0.01 + 0.3 * U(rng);
      const double b = 2.0 + 40.0 * U(rng);
      const double p = oracle::balance_loss(P, w);

      // Small buffers: choose c' so the equilibrium sits exactly at w.
      auto net = NetworkParams::single(oracle::small_pipe_for(w, p, b) / tau, tau, b);
      const auto f = intrinsic_frequency(spec, Regime::SmallBuffer, net, at(w, p));
      const auto cf = closed_form_frequency(spec, Regime::SmallBuffer, w, p, tau, b);
      if (f.feasible()) {
        ++small_checked;
        REQUIRE(cf.feasible());
        CHECK(*f.omega == doctest::Approx(*cf.omega).epsilon(1e-9));
        CHECK(*f.omega == doctest::Approx(oracle::table_small_frequency(P, w, p, tau, b)).epsilon(1e-9));
      }

      net = NetworkParams::single(oracle::intermediate_pipe_for(w, p) / tau, tau, b);
      const auto fi = intrinsic_frequency(spec, Regime::Intermediate, net, at(w, p));
      const auto ci = closed_form_frequency(spec, Regime::Intermediate, w, p, tau, b);
      if (fi.feasible()) {
        ++inter_checked;
        REQUIRE(ci.feasible());
        CHECK(*fi.omega == doctest::Approx(*ci.omega).epsilon(1e-9));
        CHECK(*fi.omega == doctest::Approx(oracle::table_intermediate_frequency(P, w, p, tau)).epsilon(1e-9));
      }
    }
    CHECK(small_checked > 50);
    CHECK(inter_checked > 50);
  }
}

TEST_CASE("frequency falls as the round-trip time grows") {
  // c' tau held fixed keeps w* and p* fixed.
  for (auto regime : {Regime::SmallBuffer, Regime::Intermediate}) {
    double prev = 1e300;
    for (double tau : {0.01, 0.05, 0.1, 0.2, 0.4}) {
      const auto net = NetworkParams::single(25.0 / tau, tau, 15.0);
      const auto eq = solve_single(ProtocolSpec::compound(), regime, net);
      const auto f = intrinsic_frequency(ProtocolSpec::compound(), regime, net, eq);
      REQUIRE(f.feasible());
      CHECK(*f.omega < prev);
      prev = *f.omega;
    }
  }
}

TEST_CASE("coupling strength") {
  NetworkParams net;
  net.c_prime = {200.0, 200.0};
  net.tau = {0.1, 0.1};
  net.C_tilde = 390.0;
  const auto cmp = ProtocolSpec::compound();
  const auto eq = solve_single(cmp, Regime::Intermediate, net);
  const auto K = coupling_strength(cmp, Regime::Intermediate, net, eq);
  CHECK(K.K == doctest::Approx((0.125 * std::pow(eq.w_star, -1.25) + 0.5) * 390.0 / 4.0).epsilon(1e-12));
  CHECK(K.K == doctest::Approx(coupling_closed_form_intermediate(cmp, eq.w_star, 390.0)).epsilon(1e-12));

  NetworkParams twice = net;
  twice.C_tilde *= 2.0;
  CHECK(coupling_strength(cmp, Regime::Intermediate, twice, eq).K == doctest::Approx(2.0 * K.K).epsilon(1e-14));

  // Reno, small buffers: with the edge and core losses equal K_s = 1/(2 w* tau).
  NetworkParams s;
  s.c_prime = {250.0, 250.0};
  s.tau = {0.1, 0.1};
  s.b = {15.0, 15.0};
  s.B = 15.0;
  s.C_tilde = 500.0;  // core load 2w/C~tau = w/c'tau, so p_c = p at any w
  const auto seq = solve_single(ProtocolSpec::reno(), Regime::SmallBuffer, s);
  const auto Ks = coupling_strength(ProtocolSpec::reno(), Regime::SmallBuffer, s, seq);
  CHECK(Ks.K == doctest::Approx(1.0 / (2.0 * seq.w_star * 0.1)).epsilon(1e-12));

  NetworkParams uneven = net;
  uneven.b = {10.0, 20.0};
  CHECK_THROWS_AS(coupling_strength(cmp, Regime::Intermediate, uneven, eq), UnsupportedConfiguration);
  NetworkParams far = net;
  far.tau = {0.1, 0.2};
  CHECK_THROWS_AS(coupling_strength(cmp, Regime::Intermediate, far, eq), UnsupportedConfiguration);
}

TEST_CASE("coupling table rows") {
  for (auto law : {oracle::Law::Compound, oracle::Law::Reno, oracle::Law::Illinois}) {
    oracle::LawParams P;
    P.law = law;
    const auto spec = spec_of(law);
    for (double w : {3.0, 11.0, 47.0}) {
      for (double C : {60.0, 900.0}) {
        const double table = oracle::table_intermediate_coupling(P, w, C);
        CHECK(coupling_closed_form_intermediate(spec, w, C) == doctest::Approx(table).epsilon(1e-12));
        CHECK(oracle::general_intermediate_coupling(P, w, C) == doctest::Approx(table).epsilon(1e-12));
      }
    }
    // Small buffers with c, C read per round trip.
    NetworkParams net;
    net.c_prime = {230.0, 230.0};
    net.tau = {0.1, 0.1};
    net.b = {14.0, 14.0};
    net.B = 22.0;
    net.C_tilde = 470.0;
    const auto eq = solve_single(spec, Regime::SmallBuffer, net);
    const double K = coupling_strength(spec, Regime::SmallBuffer, net, eq).K;
    CHECK(K == doctest::Approx(coupling_closed_form_small(spec, eq.w_star, 0.1, 23.0, 47.0, 14.0, 22.0))
                   .epsilon(1e-12));
    CHECK(K == doctest::Approx(oracle::table_small_coupling(P, eq.w_star, 0.1, 23.0, 47.0, 14.0, 22.0))
                   .epsilon(1e-12));
  }
}
