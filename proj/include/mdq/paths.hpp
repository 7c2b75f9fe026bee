#pragma once

#include <iosfwd>
#include <span>
#include <vector>

namespace mdq {

/// Uniform discretization of [0, T] into K steps.
class TimeGrid {
 public:
  TimeGrid(double horizon, int steps);

  double horizon() const { return horizon_; }
  int steps() const { return steps_; }
  int nodes() const { return steps_ + 1; }
  double dt() const { return horizon_ / steps_; }
  double node(int k) const;

  /// Segment index k with t in [t_k, t_{k+1}]; t is clamped to [0, T].
  int segment(double t) const;

  bool operator==(const TimeGrid&) const = default;

 private:
  double horizon_;
  int steps_;
};

/// Continuous piecewise-linear path on a uniform grid, d components.
/// Values are stored row-major: one row of d values per grid node.
class SampledPath {
 public:
  SampledPath(TimeGrid grid, int dim);
  SampledPath(TimeGrid grid, int dim, std::vector<double> values);

  /// Scalar path from node values (size K+1).
  static SampledPath scalar(TimeGrid grid, std::vector<double> values);

  /// Samples fn(t) (which must return `dim` values) at every node.
  template <class Fn>
  static SampledPath sample(TimeGrid grid, int dim, Fn&& fn) {
    SampledPath p(grid, dim);
    for (int k = 0; k < grid.nodes(); ++k) {
      const auto row = fn(grid.node(k));
      for (int j = 0; j < dim; ++j) p(k, j) = row[static_cast<std::size_t>(j)];
    }
    return p;
  }

  const TimeGrid& grid() const { return grid_; }
  int dim() const { return dim_; }
  int nodes() const { return grid_.nodes(); }

  double operator()(int k, int j = 0) const { return values_[index(k, j)]; }
  double& operator()(int k, int j = 0) { return values_[index(k, j)]; }

  std::span<const double> row(int k) const;
  std::vector<double> column(int j) const;
  SampledPath component(int j) const;
  const std::vector<double>& values() const { return values_; }

  /// Linear interpolant at t (clamped to [0, T]).
  double eval(double t, int j = 0) const;
  std::vector<double> eval_all(double t) const;

  /// Constant derivative of component j on segment (t_k, t_{k+1}).
  double slope(int k, int j = 0) const;

  SampledPath operator+(const SampledPath& other) const;
  SampledPath operator-(const SampledPath& other) const;
  SampledPath operator*(double c) const;

 private:
  std::size_t index(int k, int j) const {
    return static_cast<std::size_t>(k) * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(j);
  }

  TimeGrid grid_;
  int dim_;
  std::vector<double> values_;
};

/// Right-continuous piecewise-constant scalar path.
class StepPath {
 public:
  explicit StepPath(double initial = 0.0) : initial_(initial) {}
  StepPath(double initial, std::vector<double> times, std::vector<double> values);

  /// Appends a jump at t (t must not precede the previous jump).
  void push(double t, double value);

  double initial() const { return initial_; }
  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& values() const { return values_; }
  std::size_t jumps() const { return times_.size(); }

  double eval(double t) const;
  /// Left limit at t.
  double eval_left(double t) const;

 private:
  double initial_;
  std::vector<double> times_;
  std::vector<double> values_;
};

/// One-dimensional Skorokhod reflection: psi(t) + sup_{s<=t} (psi(s))^-.
/// Throws InvalidArgument when psi(0) < 0.
SampledPath skorokhod_reflect(const SampledPath& psi);
StepPath skorokhod_reflect(const StepPath& psi);
/// Node-wise variant on raw values; values[0] must be >= 0.
std::vector<double> skorokhod_reflect(std::span<const double> values);

/// Solution of xi(t) = x0 + y t + psi1(t) - psi2(t) + kappa * int_0^t xi(s)^- ds.
SampledPath drift_reflect_ode(double x0, double y, double kappa, const SampledPath& psi1,
                              const SampledPath& psi2);

/// sup{ |phi(s) - phi(t)| : |s - t| <= eta }, exact for piecewise-linear paths.
double oscillation(const SampledPath& path, double eta);

double sup_norm(const SampledPath& path);
double sup_norm_to(const SampledPath& path, double t);

/// CSV with header `t,v1,..,vd`, one row per node.
void write_csv(std::ostream& out, const SampledPath& path);
/// Parses the CSV written by write_csv; throws ConfigError on schema violations.
SampledPath read_csv(std::istream& in);

}  // namespace mdq
