#include "mdq/paths.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "mdq/errors.hpp"

namespace mdq {

using detail::require;

// ---------------------------------------------------------------------------
// TimeGrid

TimeGrid::TimeGrid(double horizon, int steps) : horizon_(horizon), steps_(steps) {
  require(std::isfinite(horizon) && horizon > 0.0, "TimeGrid: horizon must be positive");
  require(steps >= 1, "TimeGrid: need at least one step");
}

double TimeGrid::node(int k) const {
  if (k >= steps_) return horizon_;
  return horizon_ * static_cast<double>(k) / static_cast<double>(steps_);
}

int TimeGrid::segment(double t) const {
  if (t <= 0.0) return 0;
  if (t >= horizon_) return steps_ - 1;
  const int k = static_cast<int>(std::floor(t / dt()));
  return std::clamp(k, 0, steps_ - 1);
}

// ---------------------------------------------------------------------------
// SampledPath

SampledPath::SampledPath(TimeGrid grid, int dim)
    : grid_(grid), dim_(dim), values_(static_cast<std::size_t>(grid.nodes()) * static_cast<std::size_t>(dim), 0.0) {
  require(dim >= 1, "SampledPath: dimension must be >= 1");
}

SampledPath::SampledPath(TimeGrid grid, int dim, std::vector<double> values)
    : grid_(grid), dim_(dim), values_(std::move(values)) {
  require(dim >= 1, "SampledPath: dimension must be >= 1");
  require(values_.size() == static_cast<std::size_t>(grid.nodes()) * static_cast<std::size_t>(dim),
          "SampledPath: value count must equal (K+1)*d");
}

SampledPath SampledPath::scalar(TimeGrid grid, std::vector<double> values) {
  return SampledPath(grid, 1, std::move(values));
}

std::span<const double> SampledPath::row(int k) const {
  return {values_.data() + index(k, 0), static_cast<std::size_t>(dim_)};
}

std::vector<double> SampledPath::column(int j) const {
  std::vector<double> out(static_cast<std::size_t>(nodes()));
  for (int k = 0; k < nodes(); ++k) out[static_cast<std::size_t>(k)] = (*this)(k, j);
  return out;
}

SampledPath SampledPath::component(int j) const {
  require(j >= 0 && j < dim_, "SampledPath::component: index out of range");
  return scalar(grid_, column(j));
}

double SampledPath::eval(double t, int j) const {
  const int k = grid_.segment(t);
  const double t0 = grid_.node(k);
  const double w = std::clamp((t - t0) / grid_.dt(), 0.0, 1.0);
  return (1.0 - w) * (*this)(k, j) + w * (*this)(k + 1, j);
}

std::vector<double> SampledPath::eval_all(double t) const {
  std::vector<double> out(static_cast<std::size_t>(dim_));
  for (int j = 0; j < dim_; ++j) out[static_cast<std::size_t>(j)] = eval(t, j);
  return out;
}

double SampledPath::slope(int k, int j) const {
  return ((*this)(k + 1, j) - (*this)(k, j)) / grid_.dt();
}

SampledPath SampledPath::operator+(const SampledPath& other) const {
  require(grid_ == other.grid_ && dim_ == other.dim_, "SampledPath: shape mismatch in +");
  SampledPath out = *this;
  for (std::size_t i = 0; i < values_.size(); ++i) out.values_[i] += other.values_[i];
  return out;
}

SampledPath SampledPath::operator-(const SampledPath& other) const {
  require(grid_ == other.grid_ && dim_ == other.dim_, "SampledPath: shape mismatch in -");
  SampledPath out = *this;
  for (std::size_t i = 0; i < values_.size(); ++i) out.values_[i] -= other.values_[i];
  return out;
}

SampledPath SampledPath::operator*(double c) const {
  SampledPath out = *this;
  for (double& v : out.values_) v *= c;
  return out;
}

// ---------------------------------------------------------------------------
// StepPath

StepPath::StepPath(double initial, std::vector<double> times, std::vector<double> values)
    : initial_(initial), times_(std::move(times)), values_(std::move(values)) {
  require(times_.size() == values_.size(), "StepPath: times/values length mismatch");
  require(std::is_sorted(times_.begin(), times_.end()), "StepPath: jump times must be nondecreasing");
}

void StepPath::push(double t, double value) {
  require(times_.empty() || t >= times_.back(), "StepPath::push: time went backwards");
  times_.push_back(t);
  values_.push_back(value);
}

double StepPath::eval(double t) const {
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  if (it == times_.begin()) return initial_;
  return values_[static_cast<std::size_t>(it - times_.begin()) - 1];
}

double StepPath::eval_left(double t) const {
  const auto it = std::lower_bound(times_.begin(), times_.end(), t);
  if (it == times_.begin()) return initial_;
  return values_[static_cast<std::size_t>(it - times_.begin()) - 1];
}

// ---------------------------------------------------------------------------
// Skorokhod map

std::vector<double> skorokhod_reflect(std::span<const double> values) {
  require(!values.empty(), "skorokhod_reflect: empty path");
  require(values[0] >= 0.0, "skorokhod_reflect: initial value must be nonnegative");
  std::vector<double> out(values.size());
  double push = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    push = std::max(push, -values[k]);
    out[k] = values[k] + push;
  }
  return out;
}

SampledPath skorokhod_reflect(const SampledPath& psi) {
  require(psi.dim() == 1, "skorokhod_reflect: scalar path required");
  return SampledPath::scalar(psi.grid(), skorokhod_reflect(std::span<const double>(psi.values())));
}

StepPath skorokhod_reflect(const StepPath& psi) {
  require(psi.initial() >= 0.0, "skorokhod_reflect: initial value must be nonnegative");
  StepPath out(psi.initial());
  double push = 0.0;
  for (std::size_t k = 0; k < psi.jumps(); ++k) {
    push = std::max(push, -psi.values()[k]);
    out.push(psi.times()[k], psi.values()[k] + push);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Drift-reflection ODE

namespace {

// Advances xi' = c + kappa * xi^- over an interval of length tau, exactly.
double advance_segment(double xi, double c, double kappa, double tau) {
  while (tau > 0.0) {
    const bool negative_regime = xi < 0.0 || (xi == 0.0 && c < 0.0);
    if (!negative_regime) {
      if (c >= 0.0) return xi + c * tau;
      const double hit = xi / -c;
      if (hit >= tau) return xi + c * tau;
      xi = 0.0;
      tau -= hit;
      continue;
    }
    // xi(s) = xi e^{-kappa s} + (c/kappa)(1 - e^{-kappa s}) while xi <= 0.
    if (c <= 0.0) return xi * std::exp(-kappa * tau) - (c / kappa) * std::expm1(-kappa * tau);
    const double hit = std::log1p(-kappa * xi / c) / kappa;
    if (hit >= tau) return xi * std::exp(-kappa * tau) - (c / kappa) * std::expm1(-kappa * tau);
    xi = 0.0;
    tau -= hit;
    return xi + c * tau;
  }
  return xi;
}

}  // namespace

SampledPath drift_reflect_ode(double x0, double y, double kappa, const SampledPath& psi1,
                              const SampledPath& psi2) {
  require(kappa >= 0.0 && std::isfinite(kappa), "drift_reflect_ode: kappa must be >= 0");
  require(psi1.dim() == 1 && psi2.dim() == 1, "drift_reflect_ode: scalar inputs required");
  require(psi1.grid() == psi2.grid(), "drift_reflect_ode: inputs must share a grid");
  const TimeGrid& grid = psi1.grid();

  std::vector<double> drive(static_cast<std::size_t>(grid.nodes()));
  for (int k = 0; k < grid.nodes(); ++k)
    drive[static_cast<std::size_t>(k)] = x0 + y * grid.node(k) + psi1(k) - psi2(k);
  if (kappa == 0.0) return SampledPath::scalar(grid, std::move(drive));

  std::vector<double> xi(drive.size());
  xi[0] = drive[0];
  for (int k = 0; k < grid.steps(); ++k) {
    const auto uk = static_cast<std::size_t>(k);
    const double c = (drive[uk + 1] - drive[uk]) / grid.dt();
    xi[uk + 1] = advance_segment(xi[uk], c, kappa, grid.dt());
  }
  return SampledPath::scalar(grid, std::move(xi));
}

// ---------------------------------------------------------------------------
// Functionals

namespace {

double distance(const SampledPath& p, double s, double t) {
  double acc = 0.0;
  for (int j = 0; j < p.dim(); ++j) {
    const double d = p.eval(t, j) - p.eval(s, j);
    acc += d * d;
  }
  return std::sqrt(acc);
}

double node_distance(const SampledPath& p, int a, int b) {
  double acc = 0.0;
  for (int j = 0; j < p.dim(); ++j) {
    const double d = p(b, j) - p(a, j);
    acc += d * d;
  }
  return std::sqrt(acc);
}

}  // namespace

double oscillation(const SampledPath& path, double eta) {
  require(eta > 0.0 && std::isfinite(eta), "oscillation: eta must be positive");
  const TimeGrid& grid = path.grid();
  const double T = grid.horizon();
  const double slack = 1e-12 * T;
  double best = 0.0;
  // The norm of a piecewise-linear difference is convex on each cell of the
  // (s, t) arrangement, so the supremum sits at a vertex: node pairs, or a
  // node paired with the point eta away from it.
  for (int i = 0; i < grid.nodes(); ++i) {
    const double ti = grid.node(i);
    for (int j = i + 1; j < grid.nodes() && grid.node(j) - ti <= eta + slack; ++j)
      best = std::max(best, node_distance(path, i, j));
    if (ti + eta <= T) best = std::max(best, distance(path, ti, ti + eta));
    if (ti - eta >= 0.0) best = std::max(best, distance(path, ti - eta, ti));
  }
  return best;
}

double sup_norm(const SampledPath& path) { return sup_norm_to(path, path.grid().horizon()); }

double sup_norm_to(const SampledPath& path, double t) {
  double best = 0.0;
  auto norm_of = [&](auto&& value_at) {
    double acc = 0.0;
    for (int j = 0; j < path.dim(); ++j) {
      const double v = value_at(j);
      acc += v * v;
    }
    return std::sqrt(acc);
  };
  const TimeGrid& grid = path.grid();
  for (int k = 0; k < grid.nodes() && grid.node(k) <= t; ++k)
    best = std::max(best, norm_of([&](int j) { return path(k, j); }));
  if (t > 0.0 && t < grid.horizon()) best = std::max(best, norm_of([&](int j) { return path.eval(t, j); }));
  return best;
}

// ---------------------------------------------------------------------------
// CSV

void write_csv(std::ostream& out, const SampledPath& path) {
  out << "t";
  for (int j = 0; j < path.dim(); ++j) out << ",v" << (j + 1);
  out << '\n';
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  for (int k = 0; k < path.nodes(); ++k) {
    out << path.grid().node(k);
    for (int j = 0; j < path.dim(); ++j) out << ',' << path(k, j);
    out << '\n';
  }
  out.precision(old_precision);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(std::string s) {
  const auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && ws(static_cast<unsigned char>(s.back()))) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && ws(static_cast<unsigned char>(s[i]))) ++i;
  return s.substr(i);
}

double parse_number(const std::string& cell, std::size_t line_no) {
  const std::string s = trim(cell);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("path CSV line " + std::to_string(line_no) + ": not a number: '" + s + "'");
  }
  if (used != s.size() || !std::isfinite(v))
    throw ConfigError("path CSV line " + std::to_string(line_no) + ": not a finite number: '" + s + "'");
  return v;
}

}  // namespace

SampledPath read_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) throw ConfigError("path CSV: empty input");

  const auto header = split_csv_line(trim(line));
  if (header.size() < 2 || trim(header[0]) != "t")
    throw ConfigError("path CSV: header must be 't,v1,..,vd'");
  for (std::size_t j = 1; j < header.size(); ++j)
    if (trim(header[j]) != "v" + std::to_string(j))
      throw ConfigError("path CSV: header column " + std::to_string(j + 1) + " must be 'v" + std::to_string(j) + "'");
  const int dim = static_cast<int>(header.size()) - 1;

  std::vector<double> times;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string s = trim(line);
    if (s.empty()) continue;
    const auto cells = split_csv_line(s);
    if (cells.size() != header.size())
      throw ConfigError("path CSV line " + std::to_string(line_no) + ": expected " +
                        std::to_string(header.size()) + " columns");
    times.push_back(parse_number(cells[0], line_no));
    for (std::size_t j = 1; j < cells.size(); ++j) values.push_back(parse_number(cells[j], line_no));
  }
  if (times.size() < 2) throw ConfigError("path CSV: need at least two rows (t = 0 and t = T)");

  const int steps = static_cast<int>(times.size()) - 1;
  const double T = times.back();
  if (times.front() != 0.0) throw ConfigError("path CSV: first time must be 0");
  if (!(T > 0.0)) throw ConfigError("path CSV: horizon must be positive");
  const TimeGrid grid(T, steps);
  for (int k = 0; k <= steps; ++k)
    if (std::abs(times[static_cast<std::size_t>(k)] - grid.node(k)) > 1e-9 * std::max(1.0, T))
      throw ConfigError("path CSV: times must form a uniform grid");
  return SampledPath(grid, dim, std::move(values));
}

}  // namespace mdq
