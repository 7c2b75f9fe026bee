#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mdq/paths.hpp"
#include "mdq/rate.hpp"

namespace mdq {

/// Running and terminal cost maps h, g : R^I -> R, nondecreasing with at most
/// linear growth h(x) + g(x) <= C1 |x| + C2.
class CostFunctions {
 public:
  using Fn = std::function<double(std::span<const double>)>;
  enum class Kind { linear, custom };

  /// h(x) = sum c_i x_i, g(x) = sum d_i x_i with c, d >= 0.
  static CostFunctions linear(std::vector<double> c, std::vector<double> d);
  /// h(x) = max_i c_i x_i, g(x) = max_i d_i x_i (c, d > 0).
  static CostFunctions max_linear(std::vector<double> c, std::vector<double> d);
  static CostFunctions custom(Fn h, Fn g, double c1, double c2, std::string label = "custom");

  double h(std::span<const double> x) const;
  double g(std::span<const double> x) const;

  Kind kind() const { return kind_; }
  const std::string& label() const { return label_; }
  const std::vector<double>& c() const { return c_; }
  const std::vector<double>& d() const { return d_; }
  double growth_c1() const { return c1_; }
  double growth_c2() const { return c2_; }

  /// Random spot checks of monotonicity and the declared growth bound on
  /// `dim`-dimensional inputs; throws InvalidArgument on violation.
  void spot_check(int dim, std::uint64_t seed = 1, int trials = 200) const;

 private:
  Kind kind_ = Kind::linear;
  std::string label_;
  std::vector<double> c_, d_;
  Fn h_, g_;
  double c1_ = 0.0, c2_ = 0.0;
};

/// Continuous selection f(w) of cheapest states on each workload level set.
class MinCurve {
 public:
  /// f(w) = w mu_index e_index.
  static MinCurve linear(int dim, int index, double mu_index);
  /// Piecewise-linear interpolation of tabulated points; w must start at 0 and
  /// increase. Beyond the last point f scales linearly with w.
  static MinCurve tabulated(std::vector<double> w, std::vector<std::vector<double>> f);

  std::vector<double> operator()(double w) const;
  void eval_into(double w, std::span<double> out) const;

  int dim() const { return dim_; }
  bool is_linear() const { return linear_index_ >= 0; }
  int linear_index() const { return linear_index_; }
  const std::vector<double>& w_grid() const { return w_; }
  const std::vector<std::vector<double>>& table() const { return f_; }

  /// Checks theta . f(w) = w (1e-8) and f >= 0 at the tabulated points and a few probes.
  void validate(std::span<const double> theta) const;

 private:
  int dim_ = 0;
  int linear_index_ = -1;
  double linear_scale_ = 0.0;
  std::vector<double> w_;
  std::vector<std::vector<double>> f_;
};

struct GameSpec {
  ClassParams params;
  std::vector<double> x;  // initial state, >= 0
  double horizon = 1.0;
  CostFunctions costs = CostFunctions::linear({1.0}, {0.0});
  MinCurve curve = MinCurve::linear(1, 0, 1.0);

  int classes() const { return params.classes(); }
  void validate() const;
};

/// Scalar workload formulation of the game.
struct Reduced1D {
  double w0 = 0.0;            // theta . x
  double drift = 0.0;         // theta . y
  double sigma_bar_sq = 0.0;  // sum theta_i^2 lambda_i (sigma_i^2 + 1)
  std::function<double(double)> h_star;
  std::function<double(double)> g_star;
};

/// R_i[psi](t) = psi_i(rho_i t), resampled on the same grid.
SampledPath time_change_R(const SampledPath& psi, const ClassParams& params);

/// phi_i = x_i + y_i t + psi1_i - R_i[psi2] + zeta_i. No sign constraint applied.
SampledPath game_dynamics(const GameSpec& spec, const SampledPath& psi1, const SampledPath& psi2,
                          const SampledPath& zeta);

/// Minimizing curve for linear costs: all workload on the class minimizing
/// c_i mu_i and d_i mu_i (ties toward the largest index).
MinCurve min_curve_linear(const CostFunctions& costs, const ClassParams& params);

/// Numerical minimizing curve on `w_grid`; throws InvalidArgument if h and g
/// are not minimized at a common point.
MinCurve min_curve_numeric(const CostFunctions& costs, const ClassParams& params, std::span<const double> w_grid);

struct StrategyOutput {
  SampledPath zeta;
  SampledPath phi;
};

/// The minimizing strategy: zeta = f(Gamma[theta . psi_hat]) - psi_hat with
/// psi_hat = x + y t + psi1 - R[psi2].
StrategyOutput strategy_zeta(const GameSpec& spec, const SampledPath& psi1, const SampledPath& psi2);

/// int_0^T h(phi) dt + g(phi(T)) - I(psi1, psi2), trapezoid in time.
double game_cost(const GameSpec& spec, const SampledPath& psi1, const SampledPath& psi2, const SampledPath& zeta);

Reduced1D reduce_to_workload(const GameSpec& spec);

/// Discretized reduced objective for a scalar net-input path s with s(0) = 0.
double reduced_objective(const Reduced1D& reduced, const SampledPath& s);

struct SolveOptions {
  int steps_K = 200;
  int restarts = 8;
  int ascent_steps = 500;
  double step_scale = 1.0;  // step = step_scale * sigma_bar^2 dt / sqrt(iter)
  std::uint64_t seed = 1;
  std::optional<double> max_slope;  // projection box on s'; derived from growth constants if unset
};

struct SolveResult {
  double value = 0.0;
  SampledPath argmax = SampledPath(TimeGrid(1.0, 1), 1);  // maximizing s
  std::vector<double> start_values;                       // best value reached from each start
  Reduced1D reduced;
};

/// Value V(x) via projected gradient ascent in workload coordinates.
SolveResult solve_value(const GameSpec& spec, const SolveOptions& options = {});

struct BruteForceOptions {
  int steps_K = 8;
  int restarts = 16;
  int ascent_steps = 400;
  std::uint64_t seed = 7;
};

/// Oracle: ascent over all 2I path-increment variables of (psi1, psi2),
/// composing strategy_zeta and game_cost.
double brute_force_value(const GameSpec& spec, const BruteForceOptions& options = {});

using Strategy = std::function<SampledPath(const SampledPath& psi1, const SampledPath& psi2)>;

Strategy minimizing_strategy(const GameSpec& spec);
/// zeta_i = sup_s (psi_hat_i(s))^-: each class reflected on its own.
Strategy componentwise_reflection_strategy(const GameSpec& spec);
/// Componentwise reflection plus extra idling rate per class.
Strategy idling_strategy(const GameSpec& spec, double extra_rate);
Strategy zero_strategy();
/// Looks at psi1(T): not causal.
Strategy anticipating_strategy(const GameSpec& spec);

struct TrialPath {
  SampledPath psi1;
  SampledPath psi2;
};

struct AdmissibilityReport {
  int trials = 0;
  int causality_failures = 0;
  int nonnegativity_failures = 0;
  int monotonicity_failures = 0;
  std::vector<std::string> notes;

  bool passed() const { return causality_failures == 0 && nonnegativity_failures == 0 && monotonicity_failures == 0; }
};

AdmissibilityReport check_strategy_admissible(const Strategy& strategy, const GameSpec& spec,
                                              std::span<const TrialPath> trials, std::uint64_t seed = 11);

}  // namespace mdq
