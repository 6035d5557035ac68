#include <doctest.h>

#include <cmath>

#include "tcpsync/errors.hpp"
#include "tcpsync/protocols.hpp"

using namespace tcpsync;

TEST_CASE("increase function rows") {
  CHECK(increase_fn(ProtocolSpec::compound(), 1.0) == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(increase_fn(ProtocolSpec::reno(), 2.0) == 0.5);
  CHECK(increase_fn(ProtocolSpec::compound(), 16.0) == doctest::Approx(0.0625).epsilon(1e-15));
  CHECK(increase_fn(ProtocolSpec::illinois(), 5.0) == doctest::Approx(2.0));
  CHECK_THROWS_AS(increase_fn(ProtocolSpec::reno(), 0.0), DomainError);
  CHECK_THROWS_AS(increase_fn(ProtocolSpec::compound(), -1.0), DomainError);
}

TEST_CASE("decrease function rows") {
  CHECK(decrease_fn(ProtocolSpec::compound(), 10.0) == 5.0);
  CHECK(decrease_fn(ProtocolSpec::reno(), 10.0) == 5.0);
  CHECK(decrease_fn(ProtocolSpec::illinois(), 8.0) == 1.0);
  CHECK_THROWS_AS(decrease_fn(ProtocolSpec::illinois(), 0.0), DomainError);
}

TEST_CASE("g factor") {
  CHECK(g_factor(ProtocolSpec::reno(), 7.0, 0.5) == doctest::Approx(1.0));
  CHECK(g_factor(ProtocolSpec::compound(), 3.0, 0.2) == doctest::Approx(1.0));
  CHECK(g_factor(ProtocolSpec::illinois(), 12.0, 0.1) == doctest::Approx(1.8));
  CHECK_THROWS_AS(g_factor(ProtocolSpec::reno(), 7.0, 0.0), DomainError);
  CHECK_THROWS_AS(g_factor(ProtocolSpec::reno(), 7.0, 1.0), DomainError);

  // Symbolic form (w d'/d - w i'/i) d/(i+d) at the balance point d/(i+d) = 1 - p.
  for (double k : {0.0, 0.25, 0.75, 1.0}) {
    ProtocolSpec s = ProtocolSpec::compound();
    s.k = k;
    for (double w : {0.5, 3.0, 40.0}) {
      for (double p : {0.01, 0.3, 0.9}) {
        CHECK(g_factor(s, w, p) == doctest::Approx((2.0 - k) * (1.0 - p)).epsilon(1e-12));
      }
    }
  }
  // Vanishes as p -> 1.
  CHECK(g_factor(ProtocolSpec::compound(), 5.0, 1.0 - 1e-12) < 1e-11);
}

TEST_CASE("analytic derivatives agree with central differences") {
  for (auto s : {ProtocolSpec::compound(), ProtocolSpec::reno(), ProtocolSpec::illinois()}) {
    for (double w : {0.7, 4.0, 33.0}) {
      const double h = 1e-6 * w;
      const double di = (increase_fn(s, w + h) - increase_fn(s, w - h)) / (2 * h);
      const double dd = (decrease_fn(s, w + h) - decrease_fn(s, w - h)) / (2 * h);
      CHECK(increase_derivative(s, w) == doctest::Approx(di).epsilon(1e-7));
      CHECK(decrease_derivative(s, w) == doctest::Approx(dd).epsilon(1e-7));
    }
  }
}

TEST_CASE("window derivative") {
  const auto reno = ProtocolSpec::reno();
  CHECK(window_derivative(reno, 10.0, 10.0, 0.0, 0.1) == doctest::Approx(10.0));
  CHECK(window_derivative(reno, 10.0, 10.0, 1.0, 0.1) == doctest::Approx(-500.0));
  for (auto s : {ProtocolSpec::compound(), ProtocolSpec::reno(), ProtocolSpec::illinois()}) {
    const double w = 9.0;
    const double i = increase_fn(s, w), d = decrease_fn(s, w);
    const double p = i / (i + d);
    CHECK(std::abs(window_derivative(s, w, w, p, 0.2)) < 1e-12);
    CHECK(window_derivative(s, w, w, p * 0.99, 0.2) > 0.0);
    CHECK(window_derivative(s, w, w, p * 1.01, 0.2) < 0.0);
  }
}

TEST_CASE("shape properties") {
  ProtocolSpec flat = ProtocolSpec::compound();
  flat.k = 1.0;
  CHECK(increase_fn(flat, 1.0) == increase_fn(flat, 50.0));
  for (auto s : {ProtocolSpec::compound(), ProtocolSpec::reno(), ProtocolSpec::illinois()}) {
    double prev_i = 1e300, prev_d = -1.0;
    for (double w = 0.5; w < 200.0; w *= 1.3) {
      const double i = increase_fn(s, w), d = decrease_fn(s, w);
      CHECK(i > 0.0);
      CHECK(i < prev_i);
      CHECK(d > prev_d);
      CHECK(d / w == doctest::Approx(decrease_fn(s, 1.0)));
      prev_i = i;
      prev_d = d;
    }
  }
}

TEST_CASE("parameter validation") {
  CHECK_NOTHROW(ProtocolSpec::compound().validate());
  ProtocolSpec s = ProtocolSpec::compound();
  s.beta = 1.0;
  CHECK_THROWS_AS(s.validate(), DomainError);
  s = ProtocolSpec::compound();
  s.k = 1.5;
  CHECK_THROWS_AS(s.validate(), DomainError);
  s = ProtocolSpec::illinois();
  s.beta_min = 0.0;
  CHECK_THROWS_AS(s.validate(), DomainError);
  CHECK(parse_variant(to_string(Variant::Illinois)) == Variant::Illinois);
  CHECK_THROWS_AS(parse_variant("vegas"), DomainError);
}
