#include <doctest.h>

#include <cmath>
#include <limits>

#include "mdq/errors.hpp"
#include "mdq/rate.hpp"
#include "oracles.hpp"

using namespace mdq;

namespace {

SampledPath ramp(double slope, int dim = 1, double T = 1.0, int K = 10) {
  return SampledPath::sample(TimeGrid(T, K), dim, [&](double t) { return std::vector<double>(static_cast<std::size_t>(dim), slope * t); });
}

}  // namespace

TEST_CASE("arrival action") {
  CHECK(action_arrivals(ramp(1.0), ClassParams::single(1.0, 1.0, 1.0)) == doctest::Approx(0.5));
  CHECK(action_arrivals(ramp(0.0), ClassParams::single(1.0, 1.0, 1.0)) == 0.0);
  CHECK(action_arrivals(ramp(2.0), ClassParams::single(2.0, 2.0, 1.0)) == doctest::Approx(1.0));
}

TEST_CASE("arrival action is infinite off the domain") {
  auto p = ramp(1.0);
  p(0) = 0.1;
  CHECK(std::isinf(action_arrivals(p, ClassParams::single(1.0, 1.0, 1.0))));
  CHECK(std::isinf(action_arrivals(ramp(1.0), ClassParams::single(1.0, 1.0, 0.0))));
  CHECK(action_arrivals(ramp(0.0), ClassParams::single(1.0, 1.0, 0.0)) == 0.0);
}

TEST_CASE("service action") {
  CHECK(action_services(ramp(1.0), ClassParams::single(1.0, 1.0, 1.0)) == doctest::Approx(0.5));
  CHECK(action_services(ramp(0.0), ClassParams::single(1.0, 1.0, 1.0)) == 0.0);
  CHECK(action_services(ramp(2.0), ClassParams::single(4.0, 4.0, 1.0)) == doctest::Approx(0.5));
}

TEST_CASE("joint action") {
  const auto p = ClassParams::single(1.0, 1.0, 1.0);
  CHECK(action_joint(ramp(0.0), ramp(0.0), p) == 0.0);
  CHECK(action_joint(ramp(1.0), ramp(0.0), p) == doctest::Approx(0.5));
  CHECK(action_joint(ramp(1.0), ramp(1.0), p) == doctest::Approx(1.0));
}

TEST_CASE("split rate closed form against grid search") {
  const auto s = min_split_rate(2.0, 1.0, 1.0);
  CHECK(s.u == doctest::Approx(1.0));
  CHECK(s.v == doctest::Approx(-1.0));
  CHECK(s.cost == doctest::Approx(1.0));
  const auto z = min_split_rate(0.0, 2.0, 3.0);
  CHECK(z.u == 0.0);
  CHECK(z.cost == 0.0);
  const auto t = min_split_rate(1.0, 3.0, 1.0);
  CHECK(t.u == doctest::Approx(0.75));
  CHECK(t.v == doctest::Approx(-0.25));
  CHECK(t.cost == doctest::Approx(0.125));
  const auto g = oracle::grid_split(1.0, 3.0, 1.0);
  CHECK(g.cost == doctest::Approx(0.125).epsilon(1e-6));
  CHECK_THROWS_AS(min_split_rate(1.0, 0.0, 1.0), InvalidArgument);
}

TEST_CASE("single class rate examples") {
  SingleClassParams p;
  p.x = 1.0;
  const auto up = SampledPath::sample(TimeGrid(1.0, 16), 1, [](double t) { return std::vector<double>{1.0 + t}; });
  CHECK(single_class_rate(up, p, RateRegime::reflected) == doctest::Approx(0.25));
  const auto flat = SampledPath::sample(TimeGrid(1.0, 16), 1, [](double) { return std::vector<double>{1.0}; });
  CHECK(single_class_rate(flat, p, RateRegime::reflected) == 0.0);
  CHECK(single_class_rate(flat, p, RateRegime::ode) == 0.0);
}

TEST_CASE("single class rate: target must start at x") {
  SingleClassParams p;
  p.x = 0.5;
  const auto flat = SampledPath::sample(TimeGrid(1.0, 4), 1, [](double) { return std::vector<double>{1.0}; });
  CHECK(std::isinf(single_class_rate(flat, p, RateRegime::reflected)));
}

TEST_CASE("single class rate: holding at zero against the drift") {
  // pinned at 0 with r > 0 costs (r^+)^2 / (2 (lambda sigma^2 + mu)) per unit time
  SingleClassParams p;
  p.r = 1.0;
  p.x = 0.0;
  const auto zero = SampledPath(TimeGrid(1.0, 16), 1);
  const double expect = 1.0 / (2.0 * 2.0);
  CHECK(single_class_rate(zero, p, RateRegime::reflected) == doctest::Approx(expect));
  CHECK(oracle::reflected_rate_bruteforce(zero.values(), 1.0, 1.0, 1.0, 1.0) == doctest::Approx(expect).epsilon(0.03));
  p.r = -1.0;
  CHECK(single_class_rate(zero, p, RateRegime::reflected) == 0.0);
}

TEST_CASE("lambda functional") {
  CHECK(lambda_functional(SampledPath(TimeGrid(1.0, 3), 2)) == 0.0);
  const auto p = SampledPath::sample(TimeGrid(1.0, 4), 2, [](double t) { return std::vector<double>{t, -t}; });
  CHECK(lambda_functional(p) == doctest::Approx(2.0));
  const auto q = SampledPath::sample(TimeGrid(1.0, 4), 1, [](double t) { return std::vector<double>{1.0 - 2.0 * t}; });
  CHECK(lambda_functional(q) == doctest::Approx(1.0));
}

TEST_CASE("class parameter validation") {
  auto p = ClassParams::single(1.0, 1.0, 1.0);
  CHECK_NOTHROW(p.validate());
  p.mu[0] = 2.0;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  ClassParams two{{0.5, 0.5}, {1.0, 1.0}, {1.0, 1.0}, {0.0, 0.0}, {0.0, 0.0}};
  CHECK_NOTHROW(two.validate());
  CHECK(two.theta(1) == 1.0);
}
