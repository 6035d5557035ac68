#include <doctest.h>

#include <cmath>

#include "tcpsync/errors.hpp"
#include "tcpsync/loss_models.hpp"
#include "tcpsync/network.hpp"

using namespace tcpsync;

TEST_CASE("small edge buffer") {
  CHECK(edge_loss_small(0.0, 250.0, 0.1, 15.0).p == 0.0);
  CHECK(edge_loss_small(25.0, 250.0, 0.1, 7.0).p == doctest::Approx(1.0));
  CHECK(edge_loss_small(20.0, 250.0, 0.1, 15.0).p == doctest::Approx(std::pow(0.8, 15)).epsilon(1e-14));
  CHECK(edge_loss_small(20.0, 250.0, 0.1, 15.0).p == doctest::Approx(0.0352).epsilon(1e-3));
  const auto over = edge_loss_small(30.0, 250.0, 0.1, 15.0);
  CHECK(over.p == 1.0);
  CHECK(over.clamped);
  CHECK_FALSE(edge_loss_small(20.0, 250.0, 0.1, 15.0).clamped);
}

TEST_CASE("intermediate edge buffer") {
  CHECK(edge_loss_intermediate(10.0, 100.0, 0.2).p == 0.0);
  CHECK(edge_loss_intermediate(20.0, 100.0, 0.2).p == 0.0);
  CHECK(edge_loss_intermediate(40.0, 100.0, 0.2).p == doctest::Approx(0.5));
  CHECK(edge_loss_intermediate(40.0, 100.0, 0.2, 2.0).p == doctest::Approx(0.375));
  // Continuous at capacity.
  CHECK(edge_loss_intermediate(20.0 * (1 + 1e-12), 100.0, 0.2).p < 1e-11);
}

TEST_CASE("small core buffer") {
  CHECK(core_loss_small(0.0, 0.0, 0.1, 0.1, 50.0, 15.0).p == 0.0);
  CHECK(core_loss_small(2.5, 2.5, 0.1, 0.1, 50.0, 15.0).p == doctest::Approx(1.0));
  // w1/tau1 + w2/tau2 = 0.9 C~
  CHECK(core_loss_small(2.0, 5.0, 0.1, 0.2, 50.0, 15.0).p ==
        doctest::Approx(std::pow(0.9, 15)).epsilon(1e-13));
  CHECK(core_loss_small(2.0, 5.0, 0.1, 0.2, 50.0, 15.0).p == doctest::Approx(0.2059).epsilon(1e-3));
}

TEST_CASE("intermediate core buffer") {
  CHECK(core_loss_intermediate(1.0, 1.0, 0.1, 0.1, 50.0).p == 0.0);
  CHECK(core_loss_intermediate(5.0, 5.0, 0.1, 0.1, 50.0).p == doctest::Approx(0.5));
  CHECK(core_loss_intermediate(5.0, 5.0, 0.1, 0.1, 50.0, 3.0).p == doctest::Approx((1.0 - 0.125) / 3.0));
}

TEST_CASE("burstiness one recovers the smooth forms") {
  for (double w = 0.5; w < 30.0; w += 0.37) {
    const double load = w / 25.0;
    CHECK(edge_loss_small(w, 250.0, 0.1, 15.0, 1.0).p == std::min(1.0, std::pow(load, 15.0)));
    CHECK(edge_loss_intermediate(w, 250.0, 0.1, 1.0).p == (load > 1.0 ? (w - 25.0) / w : 0.0));
  }
}

TEST_CASE("monotone and bounded") {
  for (double n : {1.0, 2.0, 3.5}) {
    double prev[4] = {0, 0, 0, 0};
    for (double w = 0.0; w < 80.0; w += 0.25) {
      const double v[4] = {edge_loss_small(w, 250.0, 0.1, 15.0, n).p,
                           edge_loss_intermediate(w, 250.0, 0.1, n).p,
                           core_loss_small(w, 3.0, 0.1, 0.11, 60.0, 20.0, n).p,
                           core_loss_intermediate(w, 3.0, 0.1, 0.11, 60.0, n).p};
      for (int k = 0; k < 4; ++k) {
        CHECK(v[k] >= prev[k]);
        CHECK(v[k] >= 0.0);
        CHECK(v[k] <= 1.0);
        prev[k] = v[k];
      }
    }
  }
}

TEST_CASE("core buffer limit") {
  // Below capacity the loss vanishes as B grows; above it saturates at the clamp.
  double below = 1.0, above = 0.0;
  for (double B = 5; B <= 500; B *= 2) {
    const double pb = core_loss_small(2.0, 2.0, 0.1, 0.1, 50.0, B).p;
    const double pa = core_loss_small(2.6, 2.6, 0.1, 0.1, 50.0, B).p;
    CHECK(pb < below);
    CHECK(pa >= above);
    below = pb;
    above = pa;
  }
  CHECK(below < 1e-20);
  CHECK(above == 1.0);
}

TEST_CASE("network parameter validation") {
  NetworkParams net;
  CHECK_NOTHROW(net.validate());
  net.n_c = 0.5;
  CHECK_THROWS_AS(net.validate(), DomainError);
  net = NetworkParams{};
  net.tau[1] = 0.0;
  CHECK_THROWS_AS(net.validate(), DomainError);
  CHECK(parse_regime("small") == Regime::SmallBuffer);
  CHECK(parse_regime(to_string(Regime::Intermediate)) == Regime::Intermediate);
}
