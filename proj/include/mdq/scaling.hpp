#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mdq/rate.hpp"

namespace mdq {

/// b_n as a function of n: n^p (0 < p < 1/2) or max(1, ln n).
struct BnRule {
  enum class Kind { power, log };
  Kind kind = Kind::power;
  double p = 0.25;

  static BnRule power(double p) { return {Kind::power, p}; }
  static BnRule log() { return {Kind::log, 0.0}; }
  double eval(double n) const;
  std::string describe() const;
};

/// N^n as a function of n: floor(n^q) or floor(fraction * n), at least 1.
struct NnRule {
  enum class Kind { power, fixed_fraction };
  Kind kind = Kind::power;
  double q = 0.5;
  double fraction = 0.0;

  static NnRule power(double q) { return {Kind::power, q, 0.0}; }
  static NnRule fixed_fraction(double f) { return {Kind::fixed_fraction, 0.0, f}; }
  long long eval(double n) const;
  std::string describe() const;
};

/// Which of the asymptotic requirements the rule family meets as n grows.
struct RegimeReport {
  bool bn_diverges = false;
  bool bn_over_sqrt_n_vanishes = false;
  bool servers_over_n_vanish = false;
  bool servers_over_bn_sqrt_n_vanish = false;
  std::vector<std::string> warnings;  // finite-n observations, not errors
};

struct ScalingScheme {
  ClassParams params;  // limit parameters
  double n = 1.0;
  double bn = 1.0;
  long long servers = 1;            // N^n
  std::vector<double> lambda_n;     // arrival rates lambda^n_i
  std::vector<double> mu_n;         // per-server service rates mu^n_i
  std::vector<double> lambda_tilde_n;
  std::vector<double> mu_tilde_n;
  RegimeReport regime;

  int classes() const { return static_cast<int>(mu_n.size()); }
  /// b_n sqrt(n)
  double scale() const;
  double rho(int i) const { return params.rho(i); }
  /// n / (N^n mu^n_i)
  double theta_n(int i) const;
  /// lambda~^n_i - rho_i mu~^n_i
  double y_n(int i) const;

  /// Throws InvalidArgument when rates, b_n or N^n are out of range.
  void validate() const;
};

ScalingScheme build_scaling(const ClassParams& params, double n, const BnRule& bn_rule = {},
                            const NnRule& n_rule = {});

/// Scheme with explicitly chosen prelimit rates (test fixtures, subcritical checks).
/// Zero arrival rates are allowed here.
ScalingScheme manual_scaling(const ClassParams& params, double n, double bn, long long servers,
                             std::vector<double> lambda_n, std::vector<double> mu_n);

struct InitialState {
  std::vector<long long> X0;
  std::vector<double> discrepancy;  // scaled x achieved minus requested
  double max_discrepancy = 0.0;
};

/// X_i(0) = floor(rho_i N + x_i b_n sqrt(n)).
InitialState initial_state(const ScalingScheme& scheme, std::span<const double> x);

}  // namespace mdq
