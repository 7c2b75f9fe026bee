#include "mdq/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "mdq/errors.hpp"

namespace mdq {

using detail::require;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t u(int i) { return static_cast<std::size_t>(i); }

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double euclid(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace

// ---------------------------------------------------------------------------
// CostFunctions

CostFunctions CostFunctions::linear(std::vector<double> c, std::vector<double> d) {
  require(c.size() == d.size() && !c.empty(), "CostFunctions::linear: c and d must have equal nonzero length");
  for (std::size_t i = 0; i < c.size(); ++i)
    require(c[i] >= 0.0 && d[i] >= 0.0 && std::isfinite(c[i]) && std::isfinite(d[i]),
            "CostFunctions::linear: coefficients must be finite and nonnegative");
  CostFunctions out;
  out.kind_ = Kind::linear;
  out.label_ = "linear";
  out.c1_ = euclid(c) + euclid(d);
  out.c2_ = 0.0;
  out.c_ = std::move(c);
  out.d_ = std::move(d);
  return out;
}

CostFunctions CostFunctions::max_linear(std::vector<double> c, std::vector<double> d) {
  require(c.size() == d.size() && !c.empty(), "CostFunctions::max_linear: c and d must have equal nonzero length");
  for (std::size_t i = 0; i < c.size(); ++i)
    require(c[i] > 0.0 && d[i] >= 0.0, "CostFunctions::max_linear: need c > 0 and d >= 0");
  auto make = [](std::vector<double> w) -> Fn {
    return [w = std::move(w)](std::span<const double> x) {
      double best = -kInf;
      for (std::size_t i = 0; i < w.size(); ++i) best = std::max(best, w[i] * x[i]);
      return best;
    };
  };
  const double c1 = *std::max_element(c.begin(), c.end()) + *std::max_element(d.begin(), d.end());
  CostFunctions out = custom(make(c), make(d), c1, 0.0, "max_linear");
  out.c_ = std::move(c);
  out.d_ = std::move(d);
  return out;
}

CostFunctions CostFunctions::custom(Fn h, Fn g, double c1, double c2, std::string label) {
  require(static_cast<bool>(h) && static_cast<bool>(g), "CostFunctions::custom: h and g must be callable");
  require(c1 >= 0.0 && c2 >= 0.0, "CostFunctions::custom: growth constants must be nonnegative");
  CostFunctions out;
  out.kind_ = Kind::custom;
  out.label_ = std::move(label);
  out.h_ = std::move(h);
  out.g_ = std::move(g);
  out.c1_ = c1;
  out.c2_ = c2;
  return out;
}

double CostFunctions::h(std::span<const double> x) const {
  if (kind_ == Kind::linear) return dot(c_, x);
  return h_(x);
}

double CostFunctions::g(std::span<const double> x) const {
  if (kind_ == Kind::linear) return dot(d_, x);
  return g_(x);
}

void CostFunctions::spot_check(int dim, std::uint64_t seed, int trials) const {
  require(dim >= 1, "CostFunctions::spot_check: dim must be >= 1");
  if (kind_ == Kind::linear || !c_.empty())
    require(static_cast<int>(c_.size()) == dim, "CostFunctions: coefficient length must equal class count");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-5.0, 5.0);
  std::uniform_real_distribution<double> bump(0.0, 2.0);
  std::vector<double> a(u(dim)), b(u(dim));
  for (int t = 0; t < trials; ++t) {
    for (int i = 0; i < dim; ++i) {
      a[u(i)] = coord(rng);
      b[u(i)] = a[u(i)] + bump(rng);
    }
    const double ha = h(a), hb = h(b), ga = g(a), gb = g(b);
    require(hb >= ha - 1e-12 * (1.0 + std::abs(ha)), "CostFunctions: h is not nondecreasing");
    require(gb >= ga - 1e-12 * (1.0 + std::abs(ga)), "CostFunctions: g is not nondecreasing");
    require(ha + ga <= c1_ * euclid(a) + c2_ + 1e-9 * (1.0 + euclid(a)),
            "CostFunctions: declared growth constants C1, C2 violated");
  }
}

// ---------------------------------------------------------------------------
// MinCurve

MinCurve MinCurve::linear(int dim, int index, double mu_index) {
  require(dim >= 1 && index >= 0 && index < dim, "MinCurve::linear: class index out of range");
  require(mu_index > 0.0, "MinCurve::linear: service rate must be positive");
  MinCurve c;
  c.dim_ = dim;
  c.linear_index_ = index;
  c.linear_scale_ = mu_index;
  return c;
}

MinCurve MinCurve::tabulated(std::vector<double> w, std::vector<std::vector<double>> f) {
  require(w.size() >= 2 && w.size() == f.size(), "MinCurve::tabulated: need >= 2 points with matching values");
  require(w.front() == 0.0, "MinCurve::tabulated: w grid must start at 0");
  for (std::size_t k = 1; k < w.size(); ++k) require(w[k] > w[k - 1], "MinCurve::tabulated: w grid must increase");
  const std::size_t dim = f.front().size();
  require(dim >= 1, "MinCurve::tabulated: empty curve values");
  for (const auto& row : f) {
    require(row.size() == dim, "MinCurve::tabulated: ragged value table");
    for (double v : row) require(v >= 0.0 && std::isfinite(v), "MinCurve::tabulated: values must be >= 0");
  }
  MinCurve c;
  c.dim_ = static_cast<int>(dim);
  c.w_ = std::move(w);
  c.f_ = std::move(f);
  return c;
}

void MinCurve::eval_into(double w, std::span<double> out) const {
  w = std::max(w, 0.0);
  if (is_linear()) {
    std::fill(out.begin(), out.end(), 0.0);
    out[u(linear_index_)] = linear_scale_ * w;
    return;
  }
  if (w >= w_.back()) {
    const double scale = w / w_.back();
    for (int i = 0; i < dim_; ++i) out[u(i)] = f_.back()[u(i)] * scale;
    return;
  }
  const auto it = std::upper_bound(w_.begin(), w_.end(), w);
  const std::size_t k = static_cast<std::size_t>(it - w_.begin()) - 1;
  const double a = (w - w_[k]) / (w_[k + 1] - w_[k]);
  for (int i = 0; i < dim_; ++i) out[u(i)] = (1.0 - a) * f_[k][u(i)] + a * f_[k + 1][u(i)];
}

std::vector<double> MinCurve::operator()(double w) const {
  std::vector<double> out(u(dim_));
  eval_into(w, out);
  return out;
}

void MinCurve::validate(std::span<const double> theta) const {
  require(static_cast<int>(theta.size()) == dim_, "MinCurve: dimension does not match class count");
  std::vector<double> probes = {0.0, 0.5, 1.0, 3.0};
  for (double w : w_) probes.push_back(w);
  std::vector<double> out(u(dim_));
  for (double w : probes) {
    eval_into(w, out);
    require(std::abs(dot(theta, out) - w) <= 1e-8 * std::max(1.0, w), "MinCurve: theta . f(w) != w");
    for (double v : out) require(v >= 0.0, "MinCurve: f(w) must be nonnegative");
  }
}

// ---------------------------------------------------------------------------
// GameSpec

void GameSpec::validate() const {
  params.validate();
  const int n = classes();
  require(static_cast<int>(x.size()) == n, "GameSpec: initial state dimension must equal class count");
  for (double v : x) require(v >= 0.0 && std::isfinite(v), "GameSpec: initial state must be nonnegative");
  require(horizon > 0.0 && std::isfinite(horizon), "GameSpec: horizon must be positive");
  require(curve.dim() == n, "GameSpec: minimizing curve dimension must equal class count");
  if (costs.kind() == CostFunctions::Kind::linear)
    require(static_cast<int>(costs.c().size()) == n, "GameSpec: cost coefficient length must equal class count");
  for (int i = 0; i < n; ++i)
    require(params.rho(i) > 0.0 && params.rho(i) <= 1.0, "GameSpec: rho_i must lie in (0, 1]");
  curve.validate(params.theta_vector());
}

// ---------------------------------------------------------------------------
// Dynamics and strategies

SampledPath time_change_R(const SampledPath& psi, const ClassParams& params) {
  require(psi.dim() == params.classes(), "time_change_R: path dimension must equal class count");
  SampledPath out(psi.grid(), psi.dim());
  for (int i = 0; i < psi.dim(); ++i) {
    const double rho = params.rho(i);
    require(rho > 0.0 && rho <= 1.0 + 1e-12, "time_change_R: rho_i must lie in (0, 1]");
    for (int k = 0; k < psi.nodes(); ++k) out(k, i) = psi.eval(rho * psi.grid().node(k), i);
  }
  return out;
}

namespace {

void require_game_inputs(const GameSpec& spec, const SampledPath& psi1, const SampledPath& psi2) {
  require(psi1.dim() == spec.classes() && psi2.dim() == spec.classes(),
          "game: path dimensions must equal class count");
  require(psi1.grid() == psi2.grid(), "game: paths must share a grid");
  require(std::abs(psi1.grid().horizon() - spec.horizon) <= 1e-12 * spec.horizon,
          "game: path horizon must equal the game horizon");
}

// x + y t + psi1 - R[psi2]
SampledPath free_dynamics(const GameSpec& spec, const SampledPath& psi1, const SampledPath& psi2) {
  const SampledPath r = time_change_R(psi2, spec.params);
  SampledPath out(psi1.grid(), psi1.dim());
  for (int k = 0; k < out.nodes(); ++k) {
    const double t = out.grid().node(k);
    for (int i = 0; i < out.dim(); ++i) out(k, i) = spec.x[u(i)] + spec.params.y(i) * t + psi1(k, i) - r(k, i);
  }
  return out;
}

}  // namespace

SampledPath game_dynamics(const GameSpec& spec, const SampledPath& psi1, const SampledPath& psi2,
                          const SampledPath& zeta) {
  require_game_inputs(spec, psi1, psi2);
  require(zeta.grid() == psi1.grid() && zeta.dim() == psi1.dim(), "game_dynamics: zeta shape mismatch");
  return free_dynamics(spec, psi1, psi2) + zeta;
}

MinCurve min_curve_linear(const CostFunctions& costs, const ClassParams& params) {
  require(costs.kind() == CostFunctions::Kind::linear, "min_curve_linear: linear costs required");
  const int n = params.classes();
  require(static_cast<int>(costs.c().size()) == n, "min_curve_linear: coefficient length must equal class count");
  auto argmin_set = [&](const std::vector<double>& w) {
    double best = kInf;
    for (int i = 0; i < n; ++i) best = std::min(best, w[u(i)] * params.mu[u(i)]);
    std::vector<bool> in(u(n));
    for (int i = 0; i < n; ++i)
      in[u(i)] = w[u(i)] * params.mu[u(i)] <= best + 1e-12 * std::max(1.0, std::abs(best));
    return in;
  };
  const auto hset = argmin_set(costs.c());
  const auto gset = argmin_set(costs.d());
  for (int i = n - 1; i >= 0; --i)
    if (hset[u(i)] && gset[u(i)]) return MinCurve::linear(n, i, params.mu[u(i)]);
  throw InvalidArgument("min_curve_linear: no common minimizing curve (c_i mu_i and d_i mu_i disagree on the argmin)");
}

namespace {

// Minimizes `objective` over x = w * (p_i mu_i), p in the probability simplex,
// by vertex/centroid seeding and pairwise line searches.
class SliceMinimizer {
 public:
  SliceMinimizer(const ClassParams& params, double w) : mu_(params.mu), w_(w), n_(params.classes()) {}

  std::vector<double> point(const std::vector<double>& p) const {
    std::vector<double> x(u(n_));
    for (int i = 0; i < n_; ++i) x[u(i)] = w_ * p[u(i)] * mu_[u(i)];
    return x;
  }

  template <class Objective>
  std::vector<double> minimize(Objective&& objective, std::vector<double> p) const {
    double best = objective(point(p));
    for (int sweep = 0; sweep < 200; ++sweep) {
      bool improved = false;
      for (int i = 0; i < n_; ++i) {
        for (int j = i + 1; j < n_; ++j) {
          // move mass s from j to i, s in [-p_i, p_j]
          const double lo = -p[u(i)], hi = p[u(j)];
          if (hi - lo <= 1e-15) continue;
          auto at = [&](double s) {
            std::vector<double> q = p;
            q[u(i)] += s;
            q[u(j)] -= s;
            q[u(i)] = std::max(q[u(i)], 0.0);
            q[u(j)] = std::max(q[u(j)], 0.0);
            return std::pair{objective(point(q)), q};
          };
          const auto [s_best, v_best] = line_search(at, lo, hi);
          if (v_best < best - 1e-14 * (1.0 + std::abs(best))) {
            p = at(s_best).second;
            best = v_best;
            improved = true;
          }
        }
      }
      if (!improved) break;
    }
    return p;
  }

  std::vector<double> vertex(int i) const {
    std::vector<double> p(u(n_), 0.0);
    p[u(i)] = 1.0;
    return p;
  }
  std::vector<double> centroid() const { return std::vector<double>(u(n_), 1.0 / n_); }
  int classes() const { return n_; }

 private:
  template <class At>
  static std::pair<double, double> line_search(At&& at, double lo, double hi) {
    constexpr int kSamples = 33;
    double s_best = 0.0, v_best = at(0.0).first;
    int k_best = -1;
    for (int k = 0; k < kSamples; ++k) {
      const double s = lo + (hi - lo) * k / (kSamples - 1);
      const double v = at(s).first;
      if (v < v_best) {
        v_best = v;
        s_best = s;
        k_best = k;
      }
    }
    if (k_best < 0) return {s_best, v_best};
    // golden-section refinement inside the bracket around the best sample
    const double h = (hi - lo) / (kSamples - 1);
    double a = std::max(lo, s_best - h), b = std::min(hi, s_best + h);
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = at(c).first, fd = at(d).first;
    for (int it = 0; it < 80 && (b - a) > 1e-13 * (1.0 + hi - lo); ++it) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - r * (b - a);
        fc = at(c).first;
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + r * (b - a);
        fd = at(d).first;
      }
    }
    for (double s : {a, b, c, d}) {
      const double v = at(s).first;
      if (v < v_best) {
        v_best = v;
        s_best = s;
      }
    }
    return {s_best, v_best};
  }

  std::vector<double> mu_;
  double w_;
  int n_;
};

}  // namespace

MinCurve min_curve_numeric(const CostFunctions& costs, const ClassParams& params, std::span<const double> w_grid) {
  params.validate();
  require(w_grid.size() >= 2 && w_grid.front() == 0.0, "min_curve_numeric: w grid must start at 0");
  for (std::size_t k = 1; k < w_grid.size(); ++k)
    require(w_grid[k] > w_grid[k - 1], "min_curve_numeric: w grid must increase");
  const int n = params.classes();
  std::vector<std::vector<double>> table;
  table.push_back(std::vector<double>(u(n), 0.0));
  for (std::size_t k = 1; k < w_grid.size(); ++k) {
    const SliceMinimizer slice(params, w_grid[k]);
    auto h = [&](const std::vector<double>& x) { return costs.h(x); };
    auto g = [&](const std::vector<double>& x) { return costs.g(x); };

    auto seed_point = [&](auto&& objective) {
      std::vector<double> best = slice.vertex(n - 1);
      double best_v = objective(slice.point(best));
      for (int i = n - 2; i >= 0; --i) {
        const double v = objective(slice.point(slice.vertex(i)));
        if (v < best_v - 1e-14 * (1.0 + std::abs(best_v))) {
          best_v = v;
          best = slice.vertex(i);
        }
      }
      const double vc = objective(slice.point(slice.centroid()));
      if (vc < best_v - 1e-14 * (1.0 + std::abs(best_v))) best = slice.centroid();
      return best;
    };

    std::vector<double> p = slice.minimize(h, seed_point(h));
    const double h_min = costs.h(slice.point(p));
    // among (near-)minimizers of h, prefer the one that also lowers g
    const double h_tol = 1e-12 * (1.0 + std::abs(h_min));
    auto g_on_h_argmin = [&](const std::vector<double>& x) {
      return costs.h(x) <= h_min + h_tol ? costs.g(x) : kInf;
    };
    p = slice.minimize(g_on_h_argmin, p);
    const std::vector<double> x = slice.point(p);

    const std::vector<double> pg = slice.minimize(g, seed_point(g));
    const double g_min = std::min(costs.g(slice.point(pg)), costs.g(x));
    const double g_at = costs.g(x);
    if (g_at - g_min > 1e-6 * std::abs(g_min) + 1e-12)
      throw InvalidArgument("min_curve_numeric: minimizing-curve condition violated for supplied costs (h and g "
                            "minimizers differ at w = " + std::to_string(w_grid[k]) + ")");
    table.push_back(x);
  }
  return MinCurve::tabulated(std::vector<double>(w_grid.begin(), w_grid.end()), std::move(table));
}

StrategyOutput strategy_zeta(const GameSpec& spec, const SampledPath& psi1, const SampledPath& psi2) {
  require_game_inputs(spec, psi1, psi2);
  for (int i = 0; i < psi1.dim(); ++i)
    require(psi1(0, i) == 0.0 && psi2(0, i) == 0.0, "strategy_zeta: input paths must start at 0");
  const SampledPath free = free_dynamics(spec, psi1, psi2);
  const std::vector<double> theta = spec.params.theta_vector();
  std::vector<double> workload(u(free.nodes()));
  for (int k = 0; k < free.nodes(); ++k) workload[u(k)] = dot(theta, free.row(k));
  // theta . x >= 0 always holds, but rounding can leave a -0-ish value
  workload[0] = std::max(workload[0], 0.0);
  const std::vector<double> reflected = skorokhod_reflect(std::span<const double>(workload));

  SampledPath phi(free.grid(), free.dim());
  SampledPath zeta(free.grid(), free.dim());
  std::vector<double> row(u(free.dim()));
  for (int k = 0; k < free.nodes(); ++k) {
    spec.curve.eval_into(reflected[u(k)], row);
    for (int i = 0; i < free.dim(); ++i) {
      phi(k, i) = row[u(i)];
      zeta(k, i) = row[u(i)] - free(k, i);
    }
  }
  return {std::move(zeta), std::move(phi)};
}

double game_cost(const GameSpec& spec, const SampledPath& psi1, const SampledPath& psi2, const SampledPath& zeta) {
  const SampledPath phi = game_dynamics(spec, psi1, psi2, zeta);
  const TimeGrid& grid = phi.grid();
  double running = 0.0;
  for (int k = 0; k < grid.nodes(); ++k) {
    const double weight = (k == 0 || k == grid.steps()) ? 0.5 : 1.0;
    running += weight * spec.costs.h(phi.row(k));
  }
  running *= grid.dt();
  const double terminal = spec.costs.g(phi.row(grid.steps()));
  return running + terminal - action_joint(psi1, psi2, spec.params);
}

// ---------------------------------------------------------------------------
// Reduced problem and value solver

Reduced1D reduce_to_workload(const GameSpec& spec) {
  spec.validate();
  Reduced1D r;
  const std::vector<double> theta = spec.params.theta_vector();
  r.w0 = dot(theta, spec.x);
  r.drift = dot(theta, spec.params.y_vector());
  for (int i = 0; i < spec.classes(); ++i) r.sigma_bar_sq += theta[u(i)] * theta[u(i)] * spec.params.diffusivity(i);
  const CostFunctions costs = spec.costs;
  const MinCurve curve = spec.curve;
  const int dim = spec.classes();
  r.h_star = [costs, curve, dim](double w) {
    thread_local std::vector<double> buf;
    buf.resize(u(dim));
    curve.eval_into(w, buf);
    return costs.h(buf);
  };
  r.g_star = [costs, curve, dim](double w) {
    thread_local std::vector<double> buf;
    buf.resize(u(dim));
    curve.eval_into(w, buf);
    return costs.g(buf);
  };
  return r;
}

namespace {

// Discretized reduced objective on increments of s.
class ReducedProblem {
 public:
  ReducedProblem(const Reduced1D& reduced, double horizon, int steps)
      : r_(reduced), steps_(steps), dt_(horizon / steps), base_(u(steps + 1)) {
    for (int k = 0; k <= steps; ++k) base_[u(k)] = r_.w0 + r_.drift * (horizon * k / steps);
  }

  int steps() const { return steps_; }
  double dt() const { return dt_; }

  // trapezoid int h*(Gamma) + g*(Gamma(T)); increments has length K
  double reflected_term(const std::vector<double>& increments) const {
    double push = 0.0, s = 0.0, acc = 0.0, w = 0.0;
    for (int k = 0; k <= steps_; ++k) {
      if (k > 0) s += increments[u(k - 1)];
      const double uk = base_[u(k)] + s;
      push = std::max(push, -uk);
      w = uk + push;
      acc += weight(k) * r_.h_star(w);
    }
    return acc * dt_ + r_.g_star(w);
  }

  double action(const std::vector<double>& increments) const {
    double acc = 0.0;
    for (double d : increments) acc += d * d;
    return acc / (2.0 * r_.sigma_bar_sq * dt_);
  }

  double objective(const std::vector<double>& increments) const {
    const double v = reflected_term(increments) - action(increments);
    if (!std::isfinite(v))
      throw NumericalError("solve_value: non-finite objective; cost growth exceeds the declared constants");
    return v;
  }

  // Forward differences of the reflected term w.r.t. each increment, reusing
  // the unperturbed prefix.
  std::vector<double> reflected_gradient(const std::vector<double>& increments, double h) const {
    const std::size_t n = u(steps_ + 1);
    std::vector<double> s(n), prefix_push(n + 1), prefix_acc(n + 1);
    double run = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (k > 0) run += increments[k - 1];
      s[k] = run;
    }
    double push = 0.0, acc = 0.0, w = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      prefix_push[k] = push;
      prefix_acc[k] = acc;
      const double uk = base_[k] + s[k];
      push = std::max(push, -uk);
      w = uk + push;
      acc += weight(static_cast<int>(k)) * r_.h_star(w);
    }
    const double f0 = acc * dt_ + r_.g_star(w);

    std::vector<double> grad(u(steps_));
    for (int j = 1; j <= steps_; ++j) {
      double p = prefix_push[u(j)], a = prefix_acc[u(j)], wl = 0.0;
      for (std::size_t k = u(j); k < n; ++k) {
        const double uk = base_[k] + s[k] + h;
        p = std::max(p, -uk);
        wl = uk + p;
        a += weight(static_cast<int>(k)) * r_.h_star(wl);
      }
      grad[u(j - 1)] = (a * dt_ + r_.g_star(wl) - f0) / h;
    }
    return grad;
  }

 private:
  double weight(int k) const { return (k == 0 || k == steps_) ? 0.5 : 1.0; }

  const Reduced1D& r_;
  int steps_;
  double dt_;
  std::vector<double> base_;
};

double natural_slope(const GameSpec& spec, const Reduced1D& r) {
  const std::vector<double> f1 = spec.curve(1.0);
  const double cost_slope = spec.costs.growth_c1() * euclid(f1) + spec.costs.growth_c2();
  return r.sigma_bar_sq * (spec.horizon + 1.0) * (cost_slope + 1.0);
}

}  // namespace

double reduced_objective(const Reduced1D& reduced, const SampledPath& s) {
  require(s.dim() == 1, "reduced_objective: scalar path required");
  require(s(0) == 0.0, "reduced_objective: s must start at 0");
  const ReducedProblem problem(reduced, s.grid().horizon(), s.grid().steps());
  std::vector<double> inc(u(s.grid().steps()));
  for (int k = 0; k < s.grid().steps(); ++k) inc[u(k)] = s(k + 1) - s(k);
  return problem.objective(inc);
}

SolveResult solve_value(const GameSpec& spec, const SolveOptions& options) {
  require(options.steps_K >= 16, "solve_value: grid must have K >= 16");
  require(options.restarts >= 1 && options.ascent_steps >= 1, "solve_value: need at least one start and step");
  SolveResult result;
  result.reduced = reduce_to_workload(spec);
  const Reduced1D& r = result.reduced;
  require(r.sigma_bar_sq > 0.0, "solve_value: degenerate workload diffusivity");

  const ReducedProblem problem(r, spec.horizon, options.steps_K);
  const int K = options.steps_K;
  const double dt = problem.dt();
  const double slope = natural_slope(spec, r);
  const double max_step = options.max_slope.value_or(4.0 * slope) * dt;
  const double base_step = options.step_scale * r.sigma_bar_sq * dt;

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  auto initial = [&](int start) {
    std::vector<double> inc(u(K), 0.0);
    switch (start) {
      case 0: break;
      case 1: std::fill(inc.begin(), inc.end(), slope * dt); break;
      case 2: std::fill(inc.begin(), inc.end(), -slope * dt); break;
      case 3: std::fill(inc.begin(), inc.end(), 0.5 * slope * dt); break;
      default:
        for (double& d : inc) d = unit(rng) * slope * dt;
    }
    return inc;
  };

  double best_value = -kInf;
  std::vector<double> best_inc(u(K), 0.0);
  for (int start = 0; start < options.restarts; ++start) {
    std::vector<double> inc = initial(start);
    for (double& d : inc) d = std::clamp(d, -max_step, max_step);
    double local_best = problem.objective(inc);
    std::vector<double> local_inc = inc;
    for (int it = 1; it <= options.ascent_steps; ++it) {
      double sup = 0.0, run = 0.0;
      for (double d : inc) {
        run += d;
        sup = std::max(sup, std::abs(run));
      }
      const double h = 1e-6 * (1.0 + sup);
      std::vector<double> grad = problem.reflected_gradient(inc, h);
      const double step = base_step / std::sqrt(static_cast<double>(it));
      double change = 0.0;
      for (int k = 0; k < K; ++k) {
        grad[u(k)] -= inc[u(k)] / (r.sigma_bar_sq * dt);
        const double next = std::clamp(inc[u(k)] + step * grad[u(k)], -max_step, max_step);
        change = std::max(change, std::abs(next - inc[u(k)]));
        inc[u(k)] = next;
      }
      const double v = problem.objective(inc);
      if (v > local_best) {
        local_best = v;
        local_inc = inc;
      }
      if (change <= 1e-15 * (1.0 + sup)) break;
    }
    result.start_values.push_back(local_best);
    if (local_best > best_value) {
      best_value = local_best;
      best_inc = local_inc;
    }
  }

  std::vector<double> s(u(K + 1), 0.0);
  for (int k = 0; k < K; ++k) s[u(k + 1)] = s[u(k)] + best_inc[u(k)];
  result.value = best_value;
  result.argmax = SampledPath::scalar(TimeGrid(spec.horizon, K), std::move(s));
  return result;
}

// ---------------------------------------------------------------------------
// Brute-force oracle

double brute_force_value(const GameSpec& spec, const BruteForceOptions& options) {
  spec.validate();
  require(options.steps_K >= 1 && options.steps_K <= 8, "brute_force_value: coarse grid must have 1 <= K <= 8");
  require(options.restarts >= 1 && options.ascent_steps >= 1, "brute_force_value: need at least one start and step");
  const int n = spec.classes();
  const int K = options.steps_K;
  const TimeGrid grid(spec.horizon, K);
  const double dt = grid.dt();
  const std::size_t nvars = u(2 * n * K);

  // variable v[(side * n + i) * K + k]: increment k of component i, side 0 = psi1, 1 = psi2
  std::vector<double> precond(nvars);
  std::vector<bool> frozen(nvars, false);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < K; ++k) {
      const double a = spec.params.lambda[u(i)] * spec.params.sigma2[u(i)];
      precond[u((0 * n + i) * K + k)] = a * dt;
      frozen[u((0 * n + i) * K + k)] = a == 0.0;
      precond[u((1 * n + i) * K + k)] = spec.params.mu[u(i)] * dt;
    }

  auto build = [&](const std::vector<double>& v) {
    SampledPath p1(grid, n), p2(grid, n);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < K; ++k) {
        p1(k + 1, i) = p1(k, i) + v[u((0 * n + i) * K + k)];
        p2(k + 1, i) = p2(k, i) + v[u((1 * n + i) * K + k)];
      }
    return std::pair{std::move(p1), std::move(p2)};
  };
  auto objective = [&](const std::vector<double>& v) {
    const auto [p1, p2] = build(v);
    const StrategyOutput s = strategy_zeta(spec, p1, p2);
    const double c = game_cost(spec, p1, p2, s.zeta);
    if (!std::isfinite(c)) throw NumericalError("brute_force_value: non-finite objective");
    return c;
  };

  const Reduced1D r = reduce_to_workload(spec);
  const double slope = natural_slope(spec, r);
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  double best = -kInf;
  for (int start = 0; start < options.restarts; ++start) {
    std::vector<double> v(nvars, 0.0);
    if (start > 0)
      for (std::size_t j = 0; j < nvars; ++j)
        if (!frozen[j]) v[j] = unit(rng) * slope * dt;
    double local = objective(v);
    best = std::max(best, local);
    for (int it = 1; it <= options.ascent_steps; ++it) {
      double sup = 0.0;
      for (double x : v) sup = std::max(sup, std::abs(x));
      const double h = 1e-7 * (1.0 + sup);
      std::vector<double> grad(nvars, 0.0);
      for (std::size_t j = 0; j < nvars; ++j) {
        if (frozen[j]) continue;
        std::vector<double> w = v;
        w[j] += h;
        grad[j] = (objective(w) - local) / h;
      }
      const double step = 1.0 / std::sqrt(static_cast<double>(it));
      for (std::size_t j = 0; j < nvars; ++j) v[j] += step * precond[j] * grad[j];
      local = objective(v);
      best = std::max(best, local);
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Strategies and admissibility

Strategy minimizing_strategy(const GameSpec& spec) {
  return [spec](const SampledPath& psi1, const SampledPath& psi2) { return strategy_zeta(spec, psi1, psi2).zeta; };
}

Strategy componentwise_reflection_strategy(const GameSpec& spec) {
  return idling_strategy(spec, 0.0);
}

Strategy idling_strategy(const GameSpec& spec, double extra_rate) {
  require(extra_rate >= 0.0, "idling_strategy: extra rate must be nonnegative");
  return [spec, extra_rate](const SampledPath& psi1, const SampledPath& psi2) {
    const SampledPath free = free_dynamics(spec, psi1, psi2);
    SampledPath zeta(free.grid(), free.dim());
    for (int i = 0; i < free.dim(); ++i) {
      double push = 0.0;
      for (int k = 0; k < free.nodes(); ++k) {
        const double t = free.grid().node(k);
        push = std::max(push, -(free(k, i) + extra_rate * t));
        zeta(k, i) = push + extra_rate * t;
      }
    }
    return zeta;
  };
}

Strategy zero_strategy() {
  return [](const SampledPath& psi1, const SampledPath&) { return SampledPath(psi1.grid(), psi1.dim()); };
}

Strategy anticipating_strategy(const GameSpec& spec) {
  const Strategy base = componentwise_reflection_strategy(spec);
  return [base](const SampledPath& psi1, const SampledPath& psi2) {
    SampledPath zeta = base(psi1, psi2);
    const int last = psi1.grid().steps();
    for (int i = 0; i < zeta.dim(); ++i) {
      const double peek = std::abs(psi1(last, i));
      for (int k = 0; k < zeta.nodes(); ++k) zeta(k, i) += peek * psi1.grid().node(k);
    }
    return zeta;
  };
}

AdmissibilityReport check_strategy_admissible(const Strategy& strategy, const GameSpec& spec,
                                              std::span<const TrialPath> trials, std::uint64_t seed) {
  spec.validate();
  AdmissibilityReport report;
  const std::vector<double> theta = spec.params.theta_vector();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  for (const TrialPath& trial : trials) {
    ++report.trials;
    const SampledPath zeta = strategy(trial.psi1, trial.psi2);
    const SampledPath phi = game_dynamics(spec, trial.psi1, trial.psi2, zeta);
    const int K = phi.grid().steps();

    bool nonneg = true;
    for (double v : phi.values()) nonneg = nonneg && v >= -1e-9;
    if (!nonneg) {
      ++report.nonnegativity_failures;
      report.notes.push_back("trial " + std::to_string(report.trials) + ": dynamics leave the orthant");
    }

    bool monotone = std::abs(dot(theta, zeta.row(0))) <= 1e-9;
    for (int k = 0; k < K && monotone; ++k)
      monotone = dot(theta, zeta.row(k + 1)) >= dot(theta, zeta.row(k)) - 1e-12;
    if (!monotone) {
      ++report.monotonicity_failures;
      report.notes.push_back("trial " + std::to_string(report.trials) + ": theta . zeta not nondecreasing from 0");
    }

    bool causal = true;
    for (int cut : {K / 4, K / 2, (3 * K) / 4}) {
      SampledPath m1 = trial.psi1, m2 = trial.psi2;
      for (int k = cut + 1; k <= K; ++k)
        for (int i = 0; i < m1.dim(); ++i) {
          m1(k, i) += noise(rng);
          m2(k, i) += noise(rng);
        }
      const SampledPath mutated = strategy(m1, m2);
      for (int k = 0; k <= cut && causal; ++k)
        for (int i = 0; i < zeta.dim(); ++i) causal = causal && mutated(k, i) == zeta(k, i);
    }
    if (!causal) {
      ++report.causality_failures;
      report.notes.push_back("trial " + std::to_string(report.trials) + ": output depends on future input");
    }
  }
  return report;
}

}  // namespace mdq
