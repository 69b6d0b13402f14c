#include <doctest.h>

#include <cmath>

#include "../oracles.hpp"
#include "oste/error.hpp"
#include "oste/estimators.hpp"
#include "oste/random.hpp"

using namespace oste;
using Sample = std::vector<Observation>;

TEST_CASE("step function validation and evaluation") {
  CHECK_THROWS_AS(StepFunction(CurveKind::survival, {2, 1}, {0.5, 0.2}), ValidationError);
  CHECK_THROWS_AS(StepFunction(CurveKind::survival, {1, 2}, {0.5, 0.6}), ValidationError);
  CHECK_THROWS_AS(StepFunction(CurveKind::survival, {1}, {1.5}), ValidationError);
  CHECK_THROWS_AS(StepFunction(CurveKind::cumulative_hazard, {1, 2}, {0.5, 0.2}), ValidationError);
  CHECK_THROWS_AS(StepFunction(CurveKind::survival, {-1}, {0.5}), ValidationError);

  const StepFunction s(CurveKind::survival, {1, 3}, {0.5, 0.25});
  CHECK(s(0.0) == 1.0);
  CHECK(s(0.999) == 1.0);
  CHECK(s(1.0) == 0.5);
  CHECK(s(2.0) == 0.5);
  CHECK(s(3.0) == 0.25);
  CHECK(s(100.0) == 0.25);
  CHECK(s.left_limit(1.0) == 1.0);
  CHECK(s.left_limit(3.0) == 0.5);
  const std::vector<double> grid{0.5, 1, 2, 3, 4};
  CHECK(s.evaluate(grid) == std::vector<double>{1, 0.5, 0.5, 0.25, 0.25});
  CHECK(s.to_csv() == "time,value\n0,1\n1,0.5\n3,0.25\n");
}

TEST_CASE("kaplan_meier examples") {
  const auto single = kaplan_meier(Sample{{3, true}});
  CHECK(single(2.999) == 1.0);
  CHECK(single(3.0) == 0.0);

  const auto none = kaplan_meier(Sample{{1, false}, {2, false}, {3, false}});
  CHECK(none(0) == 1.0);
  CHECK(none(10) == 1.0);

  const auto mixed = kaplan_meier(Sample{{1, true}, {2, false}, {3, true}, {4, false}});
  CHECK(mixed(1) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(mixed(3) == doctest::Approx(0.375).epsilon(1e-15));
  CHECK(mixed(10) == doctest::Approx(0.375).epsilon(1e-15));

  CHECK_THROWS_AS(kaplan_meier(Sample{}), ValidationError);
}

TEST_CASE("kaplan_meier keeps censored subjects at risk at tied event times") {
  // At t=2 there are 3 at risk including the subject censored at 2.
  const auto s = kaplan_meier(Sample{{1, true}, {2, true}, {2, false}, {3, true}});
  CHECK(s(2) == doctest::Approx(0.75 * (1.0 - 1.0 / 3.0)));
}

TEST_CASE("nelson_aalen examples") {
  const auto single = nelson_aalen(Sample{{3, true}});
  CHECK(single(2.5) == 0.0);
  CHECK(single(3) == 1.0);
  CHECK(nelson_aalen(Sample{{1, false}, {4, false}})(10) == 0.0);
  const auto mixed = nelson_aalen(Sample{{1, true}, {2, false}, {3, true}, {4, false}});
  CHECK(mixed(3) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK_THROWS_AS(nelson_aalen(Sample{}), ValidationError);
}

TEST_CASE("censoring_km examples") {
  const auto g0 = censoring_km(Sample{{1, true}, {2, true}});
  CHECK(g0(5) == 1.0);
  const auto g = censoring_km(Sample{{1, false}, {2, false}});
  CHECK(g(1) == 0.5);
  CHECK(g(2) == 0.0);
  CHECK_THROWS_AS(censoring_km(Sample{}), ValidationError);
}

TEST_CASE("estimators match brute-force oracles on random tied samples") {
  std::mt19937_64 rng(2024);
  for (int rep = 0; rep < 100; ++rep) {
    const auto s = oracle::random_sample(rng, 1 + rep % 12);
    Sample inverted = s;
    for (auto& o : inverted) o.event = !o.event;
    const auto km = kaplan_meier(s);
    const auto na = nelson_aalen(s);
    const auto g = censoring_km(s);
    const auto km_inv = kaplan_meier(inverted);
    for (double t = 0.0; t <= 7.0; t += 0.5) {
      CHECK(std::abs(km(t) - oracle::km(s, t)) <= 1e-12);
      CHECK(std::abs(na(t) - oracle::na(s, t)) <= 1e-12);
      CHECK(std::abs(g(t) - oracle::km(s, t, false)) <= 1e-12);
      CHECK(g(t) == km_inv(t));
    }
  }
}

TEST_CASE("estimator shape invariants and scale equivariance") {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 50; ++rep) {
    const auto s = oracle::random_sample(rng, 2 + rep % 10, 9, 0.7);
    const auto km = kaplan_meier(s);
    const auto na = nelson_aalen(s);
    CHECK(km(0) == 1.0);
    CHECK(na(0) == 0.0);
    for (std::size_t k = 1; k < km.size(); ++k) CHECK(km.values()[k] <= km.values()[k - 1]);
    for (std::size_t k = 1; k < na.size(); ++k) CHECK(na.values()[k] >= na.values()[k - 1]);

    Sample scaled = s;
    for (auto& o : scaled) o.time *= 2.5;
    const auto km2 = kaplan_meier(scaled);
    REQUIRE(km2.size() == km.size());
    for (std::size_t k = 0; k < km.size(); ++k) {
      CHECK(km2.knots()[k] == km.knots()[k] * 2.5);
      CHECK(km2.values()[k] == km.values()[k]);
    }
  }
}

TEST_CASE("exp(-NA) bounds KM and the two agree on large exponential samples") {
  Rng rng(99);
  std::exponential_distribution<double> ev(1.0), cens(0.3);
  Sample s;
  for (int i = 0; i < 300; ++i) {
    const double t = ev(rng);
    const double c = cens(rng);
    s.push_back({std::min(t, c), t <= c});
  }
  const auto km = kaplan_meier(s);
  const auto na = nelson_aalen(s);
  for (double t : km.knots()) {
    CHECK(std::exp(-na(t)) >= km(t) - 1e-15);
    CHECK(std::abs(std::exp(-na(t)) - km(t)) < 0.1);
  }
}
