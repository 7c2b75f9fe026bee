#pragma once

#include <vector>

#include "mdq/paths.hpp"

namespace mdq {

/// Limiting per-class parameters of a critically loaded multi-class system.
struct ClassParams {
  std::vector<double> lambda;        // arrival rates, > 0
  std::vector<double> mu;            // service capacity rates, > 0
  std::vector<double> sigma2;        // inter-arrival variances, >= 0
  std::vector<double> lambda_tilde;  // second-order arrival drift
  std::vector<double> mu_tilde;      // second-order service drift

  /// One class with zero second-order drifts.
  static ClassParams single(double lambda, double mu, double sigma2);

  int classes() const { return static_cast<int>(lambda.size()); }
  double rho(int i) const { return lambda[idx(i)] / mu[idx(i)]; }
  double theta(int i) const { return 1.0 / mu[idx(i)]; }
  double y(int i) const { return lambda_tilde[idx(i)] - rho(i) * mu_tilde[idx(i)]; }
  /// lambda_i (sigma_i^2 + 1): net-flow diffusivity after the optimal arrival/service split.
  double diffusivity(int i) const { return lambda[idx(i)] * (sigma2[idx(i)] + 1.0); }

  std::vector<double> rho_vector() const;
  std::vector<double> theta_vector() const;
  std::vector<double> y_vector() const;

  /// Throws InvalidArgument on size mismatch, nonpositive rates, or sum(rho) != 1.
  void validate() const;

 private:
  static std::size_t idx(int i) { return static_cast<std::size_t>(i); }
};

/// Single-class near-critical system: lambda == mu, second-order drift r, start x.
struct SingleClassParams {
  double lambda = 1.0;
  double mu = 1.0;
  double sigma2 = 1.0;
  double r = 0.0;
  double x = 0.0;

  void validate() const;
};

/// 1/2 sum_i 1/(lambda_i sigma_i^2) int psi_i'^2; +inf if psi(0) != 0 or a
/// zero-variance class has a nonzero component.
double action_arrivals(const SampledPath& psi, const ClassParams& params);
/// 1/2 sum_i 1/mu_i int psi_i'^2; +inf if psi(0) != 0.
double action_services(const SampledPath& psi, const ClassParams& params);
double action_joint(const SampledPath& psi1, const SampledPath& psi2, const ClassParams& params);

struct SplitRate {
  double u;     // arrival-side rate
  double v;     // service-side rate
  double cost;  // u^2/(2a) + v^2/(2b)
};

/// Cheapest (u, v) with u - v = mdot under u^2/(2a) + v^2/(2b).
SplitRate min_split_rate(double mdot, double a, double b);

enum class RateRegime { ode, reflected };

/// Rate of a scalar target path for the single-class system. `ode` is the
/// server-count-proportional regime; `reflected` the sublinear one.
double single_class_rate(const SampledPath& target, const SingleClassParams& params, RateRegime regime);

/// sum_i sup_t |psi_i(t)|.
double lambda_functional(const SampledPath& psi);

}  // namespace mdq
