#include <doctest.h>

#include <cmath>
#include <numbers>

#include "../oracles/sync.hpp"
#include "tcpsync/sync_solver.hpp"

using namespace tcpsync;

namespace {

SyncProblem intermediate(double w1, double w2, double K, double tau = 0.1) {
  SyncProblem p;
  p.regime = Regime::Intermediate;
  p.omega1 = w1;
  p.omega2 = w2;
  p.K = K;
  p.tau = tau;
  return p;
}

SyncProblem small(double w1, double w2, double K, double B, double b, double tau = 0.1) {
  SyncProblem p = intermediate(w1, w2, K, tau);
  p.regime = Regime::SmallBuffer;
  p.B = B;
  p.b = b;
  return p;
}

oracle::Locking locking(const SyncProblem& p) {
  oracle::Locking L;
  L.small = p.regime == Regime::SmallBuffer;
  L.omega1 = p.omega1;
  L.omega2 = p.omega2;
  L.K = p.K;
  L.tau = p.tau;
  L.B = p.B;
  L.b = p.b;
  L.nc = p.n_c;
  L.ne = p.n_e;
  return L;
}

}  // namespace

TEST_CASE("identical oscillators lock in phase") {
  const auto p = small(40.0, 40.0, 3.0, 30.0, 10.0);
  const auto roots = solve_sync_small(p);
  bool found = false;
  for (const auto& r : roots) {
    if (std::abs(r.phi0) > 1e-12) continue;
    found = true;
    CHECK(r.Omega == doctest::Approx(40.0 + 3.0 * (30.0 - 10.0) * std::sin(r.Omega * 0.1)).epsilon(1e-10));
  }
  CHECK(found);

  const auto q = intermediate(50.0, 50.0, 20.0);
  bool any = false;
  for (const auto& r : solve_sync_intermediate(q)) {
    if (r.branch != Branch::InPhase) continue;
    any = true;
    CHECK(r.phi0 == 0.0);
    CHECK(r.Omega == doctest::Approx(50.0 + 40.0 * std::sin(r.Omega * 0.1)).epsilon(1e-10));
  }
  CHECK(any);
}

TEST_CASE("zero coupling") {
  const auto same = solve_sync(intermediate(30.0, 30.0, 0.0));
  REQUIRE(same.size() >= 1);
  CHECK(same.front().Omega == doctest::Approx(30.0));
  CHECK(solve_sync(intermediate(30.0, 31.0, 0.0)).empty());
}

TEST_CASE("matches the brute-force oracle") {
  for (const auto& p : {intermediate(50.0, 51.0, 30.0), small(45.0, 45.5, 1.2, 20.0, 6.0),
                        intermediate(20.0, 20.3, 4.0, 0.2)}) {
    const double Omega_max = std::max(4.0 * 0.5 * (p.omega1 + p.omega2), 4.0 * std::numbers::pi / p.tau);
    const auto mine = solve_sync(p);
    const auto theirs = oracle::brute_force_roots(locking(p), Omega_max);
    REQUIRE(!theirs.empty());
    CHECK(mine.size() == theirs.size());
    for (const auto& o : theirs) {
      bool matched = false;
      for (const auto& r : mine) {
        if (std::abs(r.Omega - o.Omega) < 1e-7 * o.Omega && std::abs(oracle::wrap(r.phi0 - o.phi0)) < 1e-7) {
          matched = true;
        }
      }
      CHECK_MESSAGE(matched, "oracle root Omega=" << o.Omega << " phi0=" << o.phi0);
    }
  }
}

TEST_CASE("back-substitution, order parameter and symmetry") {
  for (const auto& p : {intermediate(50.0, 51.0, 30.0), small(45.0, 45.5, 1.2, 20.0, 6.0)}) {
    const auto L = locking(p);
    const auto roots = solve_sync(p);
    REQUIRE(!roots.empty());
    SyncProblem swapped = p;
    std::swap(swapped.omega1, swapped.omega2);
    const auto mirror = solve_sync(swapped);
    for (const auto& r : roots) {
      CHECK(std::abs(L.f(r.Omega, r.phi0)) <= 1e-8 * L.scale(r.Omega));
      CHECK(std::abs(L.g(r.Omega, r.phi0)) <= 1e-8 * L.scale(r.Omega));
      CHECK(r.order_r == std::cos(r.phi0 / 2.0));
      bool mirrored = false;
      for (const auto& m : mirror) {
        if (std::abs(m.Omega - r.Omega) <= 1e-10 * r.Omega && std::abs(m.phi0 + r.phi0) <= 1e-12) {
          mirrored = true;
        }
      }
      CHECK(mirrored);
    }
    CHECK(mirror.size() == roots.size());
  }
}

TEST_CASE("stability labels follow the coupling inequality") {
  const auto p = small(45.0, 45.5, 1.2, 20.0, 6.0);
  for (const auto& r : solve_sync(p)) {
    const double v = 1.2 * (20.0 - 6.0) * std::cos(r.Omega * 0.1);
    CHECK(r.stability_value == doctest::Approx(v).epsilon(1e-12));
    CHECK(r.stable() == (v < 0.0));
  }
}

TEST_CASE("coupling range") {
  const auto same = coupling_range(intermediate(40.0, 40.0, 0.0), KSweep{0.0, 10.0, 50});
  REQUIRE(same.K_c);
  CHECK(*same.K_c == 0.0);

  const auto p = intermediate(40.0, 42.0, 0.0);
  const auto range = coupling_range(p, KSweep{0.0, 20.0, 200});
  REQUIRE(range.K_c);
  CHECK(*range.K_c > 0.0);
  SyncProblem below = p;
  below.K = *range.K_c * 0.99;
  CHECK(solve_sync(below).empty());
  SyncProblem above = p;
  above.K = *range.K_c * 1.01;
  CHECK(!solve_sync(above).empty());
}

TEST_CASE("phase difference shrinks along the primary branch") {
  double prev = 1e300;
  for (double K = 3.0; K <= 12.0; K += 0.25) {
    const auto s = primary_state(solve_sync(intermediate(40.0, 40.4, K)));
    REQUIRE(s);
    CHECK(std::abs(s->phi0) <= prev + 1e-15);
    prev = std::abs(s->phi0);
  }
}

TEST_CASE("order parameter") {
  CHECK(order_parameter(0.3, 0.3).r == doctest::Approx(1.0));
  const auto anti = order_parameter(std::numbers::pi, 0.0);
  CHECK(anti.r == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(order_parameter(std::numbers::pi / 3.0, 0.0).r == doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-15));
  CHECK(order_parameter(1.0, 0.4).psi.has_value());
  CHECK(*order_parameter(1.0, 0.4).psi == doctest::Approx(0.7));
}
