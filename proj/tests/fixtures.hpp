#pragma once

#include <random>
#include <vector>

#include "mdq/game.hpp"
#include "mdq/paths.hpp"
#include "mdq/rate.hpp"

namespace fixture {

// One class, lambda = mu = sigma^2 = 1, x = 0, h(x) = x, g = 0, T = 1. Value 1/3.
inline mdq::GameSpec one_third() {
  mdq::GameSpec s;
  s.params = mdq::ClassParams::single(1.0, 1.0, 1.0);
  s.x = {0.0};
  s.horizon = 1.0;
  s.costs = mdq::CostFunctions::linear({1.0}, {0.0});
  s.curve = mdq::MinCurve::linear(1, 0, 1.0);
  return s;
}

// Same system with h = 0, g(x) = x. Value d^2 T = 1.
inline mdq::GameSpec terminal_linear() {
  auto s = one_third();
  s.costs = mdq::CostFunctions::linear({0.0}, {1.0});
  return s;
}

inline mdq::GameSpec zero_cost() {
  auto s = one_third();
  s.costs = mdq::CostFunctions::linear({0.0}, {0.0});
  return s;
}

// Random critically loaded two-class instance with linear costs sharing a
// common cheapest class (d is a nonnegative multiple of c).
inline mdq::GameSpec random_two_class(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  mdq::GameSpec s;
  const double r1 = 0.2 + 0.6 * U(rng);
  const std::vector<double> mu{0.5 + 1.5 * U(rng), 0.5 + 1.5 * U(rng)};
  s.params.mu = mu;
  s.params.lambda = {r1 * mu[0], (1.0 - r1) * mu[1]};
  s.params.sigma2 = {0.5 + U(rng), 0.5 + U(rng)};
  s.params.lambda_tilde = {U(rng) - 0.5, U(rng) - 0.5};
  s.params.mu_tilde = {U(rng) - 0.5, U(rng) - 0.5};
  s.x = {U(rng), U(rng)};
  s.horizon = 1.0;
  const std::vector<double> c{0.2 + 1.8 * U(rng), 0.2 + 1.8 * U(rng)};
  const double kd = U(rng);
  s.costs = mdq::CostFunctions::linear(c, {kd * c[0], kd * c[1]});
  s.curve = mdq::min_curve_linear(s.costs, s.params);
  return s;
}

// Gaussian random-walk path started at 0 with the given per-step scale.
inline mdq::SampledPath random_walk(const mdq::TimeGrid& grid, int dim, double step, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, step);
  mdq::SampledPath p(grid, dim);
  for (int k = 1; k < grid.nodes(); ++k)
    for (int j = 0; j < dim; ++j) p(k, j) = p(k - 1, j) + nd(rng);
  return p;
}

}  // namespace fixture
