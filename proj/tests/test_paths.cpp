#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "mdq/errors.hpp"
#include "mdq/paths.hpp"
#include "oracles.hpp"

using namespace mdq;

namespace {

SampledPath linear_path(double a, double b, int K = 10, double T = 1.0) {
  return SampledPath::sample(TimeGrid(T, K), 1, [&](double t) { return std::vector<double>{a + b * t}; });
}

double max_abs_diff(const SampledPath& p, const std::vector<double>& q) {
  double e = 0.0;
  for (int k = 0; k < p.nodes(); ++k) e = std::max(e, std::abs(p(k) - q[static_cast<std::size_t>(k)]));
  return e;
}

}  // namespace

TEST_CASE("reflection: nonnegative path is a fixed point") {
  const auto psi = linear_path(0.0, 1.0);
  const auto phi = skorokhod_reflect(psi);
  for (int k = 0; k < psi.nodes(); ++k) CHECK(phi(k) == psi(k));
}

TEST_CASE("reflection: negative drift pins at zero") {
  const auto phi = skorokhod_reflect(linear_path(0.0, -1.0));
  for (int k = 0; k < phi.nodes(); ++k) CHECK(std::abs(phi(k)) <= 1e-15);
}

TEST_CASE("reflection: 1 - 2t becomes max(1 - 2t, 0) and matches the penalty oracle") {
  const auto psi = linear_path(1.0, -2.0, 64);
  const auto phi = skorokhod_reflect(psi);
  for (int k = 0; k < phi.nodes(); ++k) CHECK(phi(k) == doctest::Approx(std::max(1.0 - 2.0 * psi.grid().node(k), 0.0)));
  CHECK(max_abs_diff(phi, oracle::penalty_reflect(psi.values(), 1.0)) < 1e-3);
}

TEST_CASE("reflection rejects a negative start") {
  CHECK_THROWS_AS(skorokhod_reflect(linear_path(-0.5, 1.0)), InvalidArgument);
}

TEST_CASE("reflection of a step path uses the running minimum over jumps") {
  StepPath s(1.0, {0.2, 0.5, 0.7}, {-1.0, 0.5, -2.0});
  const auto r = skorokhod_reflect(s);
  CHECK(r.eval(0.1) == 1.0);
  CHECK(r.eval(0.3) == 0.0);
  CHECK(r.eval(0.6) == doctest::Approx(1.5));
  CHECK(r.eval(0.8) == 0.0);
  CHECK(r.eval_left(0.7) == doctest::Approx(1.5));
}

TEST_CASE("drift reflection closed forms") {
  const TimeGrid grid(1.0, 1024);
  const SampledPath zero(grid, 1);
  SUBCASE("positive constant never activates") {
    const auto xi = drift_reflect_ode(1.0, 0.0, 5.0, zero, zero);
    for (int k = 0; k < xi.nodes(); ++k) CHECK(xi(k) == 1.0);
  }
  SUBCASE("x0 = -1 decays like -exp(-t)") {
    const auto xi = drift_reflect_ode(-1.0, 0.0, 1.0, zero, zero);
    for (int k = 0; k < xi.nodes(); ++k) CHECK(std::abs(xi(k) + std::exp(-grid.node(k))) < 1e-4);
  }
  SUBCASE("y = -1 settles like exp(-t) - 1, also against fine Euler") {
    const auto xi = drift_reflect_ode(0.0, -1.0, 1.0, zero, zero);
    const auto fine = oracle::euler_drift_reflect(0.0, -1.0, 1.0, std::vector<double>(1025, 0.0), 1.0, 64);
    for (int k = 0; k < xi.nodes(); ++k) {
      CHECK(std::abs(xi(k) - (std::exp(-grid.node(k)) - 1.0)) < 1e-4);
      CHECK(std::abs(xi(k) - fine[static_cast<std::size_t>(k)]) < 1e-4);
    }
  }
}

TEST_CASE("drift reflection with kappa = 0 is the free path") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  const TimeGrid grid(2.0, 50);
  SampledPath p1(grid, 1), p2(grid, 1);
  for (int k = 1; k < grid.nodes(); ++k) {
    p1(k) = p1(k - 1) + 0.2 * nd(rng);
    p2(k) = p2(k - 1) + 0.2 * nd(rng);
  }
  const auto xi = drift_reflect_ode(0.3, -0.7, 0.0, p1, p2);
  for (int k = 0; k < grid.nodes(); ++k) CHECK(xi(k) == doctest::Approx(0.3 - 0.7 * grid.node(k) + p1(k) - p2(k)));
}

TEST_CASE("oscillation") {
  CHECK(oscillation(linear_path(2.0, 0.0), 0.3) == 0.0);
  CHECK(oscillation(linear_path(0.0, 3.0), 0.25) == doctest::Approx(0.75));
  const auto tent = SampledPath::scalar(TimeGrid(1.0, 2), {0.0, 0.5, 0.0});
  CHECK(oscillation(tent, 0.5) == doctest::Approx(0.5));
}

TEST_CASE("sup norms") {
  CHECK(sup_norm(SampledPath(TimeGrid(1.0, 4), 1)) == 0.0);
  CHECK(sup_norm(linear_path(0.0, 1.0)) == doctest::Approx(1.0));
  CHECK(sup_norm(linear_path(1.0, -2.0)) == doctest::Approx(1.0));
  CHECK(sup_norm_to(linear_path(0.0, 1.0), 0.5) == doctest::Approx(0.5));
}

TEST_CASE("csv round trip and schema errors") {
  const auto psi = linear_path(1.0, -2.0, 8);
  std::stringstream ss;
  write_csv(ss, psi);
  const auto back = read_csv(ss);
  REQUIRE(back.nodes() == psi.nodes());
  for (int k = 0; k < psi.nodes(); ++k) CHECK(back(k) == psi(k));

  std::istringstream empty("");
  CHECK_THROWS_AS(read_csv(empty), ConfigError);
  std::istringstream bad_header("time,x\n0,1\n1,2\n");
  CHECK_THROWS_AS(read_csv(bad_header), ConfigError);
  std::istringstream bad_value("t,v1\n0,1\n1,abc\n");
  CHECK_THROWS_AS(read_csv(bad_value), ConfigError);
  std::istringstream ragged("t,v1\n0,1\n1\n");
  CHECK_THROWS_AS(read_csv(ragged), ConfigError);
}
