#include "mdq/rate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mdq/errors.hpp"

namespace mdq {

using detail::require;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// int_0^L of the square of a linear function going from a to b.
double linear_square_integral(double a, double b, double length) {
  return length * (a * a + a * b + b * b) / 3.0;
}

// Per-component int psi_j'^2, exact for piecewise-linear paths.
double energy(const SampledPath& psi, int j) {
  const double dt = psi.grid().dt();
  double acc = 0.0;
  for (int k = 0; k < psi.grid().steps(); ++k) {
    const double s = psi.slope(k, j);
    acc += s * s * dt;
  }
  return acc;
}

bool starts_at_zero(const SampledPath& psi) {
  for (int j = 0; j < psi.dim(); ++j)
    if (psi(0, j) != 0.0) return false;
  return true;
}

bool component_is_zero(const SampledPath& psi, int j) {
  for (int k = 0; k < psi.nodes(); ++k)
    if (psi(k, j) != 0.0) return false;
  return true;
}
}  // namespace

// ---------------------------------------------------------------------------

ClassParams ClassParams::single(double lambda, double mu, double sigma2) {
  return ClassParams{{lambda}, {mu}, {sigma2}, {0.0}, {0.0}};
}

std::vector<double> ClassParams::rho_vector() const {
  std::vector<double> out(lambda.size());
  for (int i = 0; i < classes(); ++i) out[idx(i)] = rho(i);
  return out;
}

std::vector<double> ClassParams::theta_vector() const {
  std::vector<double> out(lambda.size());
  for (int i = 0; i < classes(); ++i) out[idx(i)] = theta(i);
  return out;
}

std::vector<double> ClassParams::y_vector() const {
  std::vector<double> out(lambda.size());
  for (int i = 0; i < classes(); ++i) out[idx(i)] = y(i);
  return out;
}

void ClassParams::validate() const {
  const std::size_t n = lambda.size();
  require(n >= 1, "ClassParams: need at least one class");
  require(mu.size() == n && sigma2.size() == n && lambda_tilde.size() == n && mu_tilde.size() == n,
          "ClassParams: per-class vectors must have equal length");
  double load = 0.0;
  for (int i = 0; i < classes(); ++i) {
    require(std::isfinite(lambda[idx(i)]) && lambda[idx(i)] > 0.0, "ClassParams: lambda_i must be > 0");
    require(std::isfinite(mu[idx(i)]) && mu[idx(i)] > 0.0, "ClassParams: mu_i must be > 0");
    require(std::isfinite(sigma2[idx(i)]) && sigma2[idx(i)] >= 0.0, "ClassParams: sigma2_i must be >= 0");
    require(std::isfinite(lambda_tilde[idx(i)]) && std::isfinite(mu_tilde[idx(i)]),
            "ClassParams: drifts must be finite");
    load += rho(i);
  }
  require(std::abs(load - 1.0) <= 1e-12, "ClassParams: system must be critically loaded (sum rho_i = 1)");
}

void SingleClassParams::validate() const {
  require(lambda > 0.0 && mu > 0.0, "SingleClassParams: rates must be positive");
  require(std::abs(lambda - mu) <= 1e-12, "SingleClassParams: system must be critically loaded (lambda = mu)");
  require(sigma2 >= 0.0, "SingleClassParams: sigma2 must be >= 0");
  require(std::isfinite(r) && std::isfinite(x), "SingleClassParams: r and x must be finite");
}

// ---------------------------------------------------------------------------

double action_arrivals(const SampledPath& psi, const ClassParams& params) {
  require(psi.dim() == params.classes(), "action_arrivals: path dimension must equal class count");
  if (!starts_at_zero(psi)) return kInf;
  double total = 0.0;
  for (int i = 0; i < psi.dim(); ++i) {
    const double weight = params.lambda[static_cast<std::size_t>(i)] * params.sigma2[static_cast<std::size_t>(i)];
    if (weight == 0.0) {
      if (!component_is_zero(psi, i)) return kInf;
      continue;
    }
    total += 0.5 * energy(psi, i) / weight;
  }
  return total;
}

double action_services(const SampledPath& psi, const ClassParams& params) {
  require(psi.dim() == params.classes(), "action_services: path dimension must equal class count");
  if (!starts_at_zero(psi)) return kInf;
  double total = 0.0;
  for (int i = 0; i < psi.dim(); ++i) total += 0.5 * energy(psi, i) / params.mu[static_cast<std::size_t>(i)];
  return total;
}

double action_joint(const SampledPath& psi1, const SampledPath& psi2, const ClassParams& params) {
  return action_arrivals(psi1, params) + action_services(psi2, params);
}

SplitRate min_split_rate(double mdot, double a, double b) {
  require(a > 0.0 && b > 0.0, "min_split_rate: weights must be positive");
  const double s = a + b;
  return {a * mdot / s, -b * mdot / s, mdot * mdot / (2.0 * s)};
}

// ---------------------------------------------------------------------------

double single_class_rate(const SampledPath& target, const SingleClassParams& params, RateRegime regime) {
  params.validate();
  require(target.dim() == 1, "single_class_rate: scalar target required");
  const TimeGrid& grid = target.grid();
  const double dt = grid.dt();
  const double diffusivity = params.lambda * params.sigma2 + params.mu;

  if (regime == RateRegime::reflected) {
    for (int k = 0; k < target.nodes(); ++k)
      require(target(k) >= 0.0, "single_class_rate: reflected regime needs a nonnegative target");
  }
  if (std::abs(target(0) - params.x) > 1e-12 * (1.0 + std::abs(params.x))) return kInf;

  double energy_total = 0.0;
  if (regime == RateRegime::ode) {
    // m' = phi' - r - mu phi^-, linear on each sign-homogeneous piece.
    for (int k = 0; k < grid.steps(); ++k) {
      const double p = target(k);
      const double q = target(k + 1);
      const double slope = (q - p) / dt;
      const double base = slope - params.r;
      auto mdot = [&](double phi) { return base - params.mu * std::max(-phi, 0.0); };
      if ((p < 0.0) != (q < 0.0) && p != q) {
        const double cross = dt * (-p) / (q - p);
        energy_total += linear_square_integral(mdot(p), mdot(0.0), cross);
        energy_total += linear_square_integral(mdot(0.0), mdot(q), dt - cross);
      } else {
        energy_total += linear_square_integral(mdot(p), mdot(q), dt);
      }
    }
  } else {
    const double tol = 1e-9 * (1.0 + sup_norm(target));
    const double hold = std::max(params.r, 0.0);
    for (int k = 0; k < grid.steps(); ++k) {
      const bool at_zero = target(k) <= tol && target(k + 1) <= tol;
      const double rate = at_zero ? hold : target.slope(k) - params.r;
      energy_total += rate * rate * dt;
    }
  }
  return energy_total / (2.0 * diffusivity);
}

double lambda_functional(const SampledPath& psi) {
  double total = 0.0;
  for (int j = 0; j < psi.dim(); ++j) {
    double best = 0.0;
    for (int k = 0; k < psi.nodes(); ++k) best = std::max(best, std::abs(psi(k, j)));
    total += best;
  }
  return total;
}

}  // namespace mdq
