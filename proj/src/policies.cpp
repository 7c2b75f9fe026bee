#include "mdq/policies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "mdq/errors.hpp"

namespace mdq {

using detail::require;

namespace {
std::size_t u(int i) { return static_cast<std::size_t>(i); }
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

std::vector<long long> cmu_priority(std::span<const long long> X, long long servers, std::span<const int> order) {
  require(servers >= 0, "cmu_priority: server count must be >= 0");
  const int n = static_cast<int>(X.size());
  std::vector<int> seq(order.begin(), order.end());
  if (seq.empty()) {
    seq.resize(u(n));
    std::iota(seq.begin(), seq.end(), 0);
  }
  require(static_cast<int>(seq.size()) == n, "cmu_priority: order must list every class once");
  std::vector<long long> B(u(n), 0);
  long long free = servers;
  for (int i : seq) {
    require(i >= 0 && i < n && B[u(i)] == 0, "cmu_priority: order must be a permutation of the classes");
    require(X[u(i)] >= 0, "cmu_priority: X must be nonnegative");
    B[u(i)] = std::min(X[u(i)], free);
    free -= B[u(i)];
  }
  return B;
}

long long nonidling_single(long long X, long long servers) {
  require(X >= 0 && servers >= 0, "nonidling_single: counts must be nonnegative");
  return std::min(X, servers);
}

std::vector<int> cmu_order(const CostFunctions& costs, const ClassParams& params) {
  std::vector<int> order(u(params.classes()));
  std::iota(order.begin(), order.end(), 0);
  if (costs.c().size() != order.size()) return order;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return costs.c()[u(a)] * params.mu[u(a)] > costs.c()[u(b)] * params.mu[u(b)];
  });
  return order;
}

std::string policy_name(const PolicySpec& spec) {
  struct Visitor {
    std::string operator()(const policy_spec::Cmu&) const { return "cmu"; }
    std::string operator()(const policy_spec::Tracking&) const { return "tracking"; }
    std::string operator()(const policy_spec::Zero&) const { return "zero"; }
    std::string operator()(const policy_spec::NonIdlingSingle&) const { return "nonidling"; }
    std::string operator()(const policy_spec::Fixed&) const { return "fixed"; }
  };
  return std::visit(Visitor{}, spec);
}

std::unique_ptr<Policy> make_policy(const PolicySpec& spec, const GameSpec& game, const ScalingScheme& scheme) {
  if (const auto* c = std::get_if<policy_spec::Cmu>(&spec)) {
    std::vector<int> order = c->order.empty() ? cmu_order(game.costs, game.params) : c->order;
    return std::make_unique<CmuPolicy>(std::move(order));
  }
  if (const auto* t = std::get_if<policy_spec::Tracking>(&spec))
    return std::make_unique<TrackingPolicy>(t->config, game, scheme);
  if (std::holds_alternative<policy_spec::Zero>(spec)) return std::make_unique<ZeroPolicy>();
  if (std::holds_alternative<policy_spec::NonIdlingSingle>(spec)) {
    require(scheme.classes() == 1, "nonidling policy is defined for a single class only");
    return std::make_unique<NonIdlingSinglePolicy>();
  }
  const auto& f = std::get<policy_spec::Fixed>(spec);
  require(static_cast<int>(f.allocation.size()) == scheme.classes(), "fixed policy: allocation length mismatch");
  return std::make_unique<FixedPolicy>(f.allocation);
}

void CmuPolicy::allocate(const SystemView& view, std::span<long long> out) {
  const auto B = cmu_priority(view.X, view.servers, order_);
  std::copy(B.begin(), B.end(), out.begin());
}

void ZeroPolicy::allocate(const SystemView&, std::span<long long> out) { std::fill(out.begin(), out.end(), 0); }

void NonIdlingSinglePolicy::allocate(const SystemView& view, std::span<long long> out) {
  out[0] = nonidling_single(view.X[0], view.servers);
}

void FixedPolicy::allocate(const SystemView&, std::span<long long> out) {
  std::copy(allocation_.begin(), allocation_.end(), out.begin());
}

// ---------------------------------------------------------------------------
// Tracking policy

double TrackingGrid::a(int l) const { return l >= L + 1 ? horizon : l * v_tilde; }

double TrackingGrid::b(int l, int j) const { return j >= H + 1 ? a(l + 1) : a(l) + j * delta_n; }

std::pair<int, int> TrackingGrid::locate(double t) const {
  int l = std::clamp(static_cast<int>(std::floor(t / v_tilde)), 0, L);
  while (l < L && t >= a(l + 1)) ++l;
  while (l > 0 && t < a(l)) --l;
  int j = std::clamp(static_cast<int>(std::floor((t - a(l)) / delta_n)), 0, H);
  while (j < H && t >= b(l, j + 1)) ++j;
  while (j > 0 && t < b(l, j)) --j;
  return {l, j};
}

TrackingPolicy::TrackingPolicy(const TrackingConfig& config, const GameSpec& game, const ScalingScheme& scheme)
    : game_(game), scheme_(scheme) {
  game_.validate();
  scheme_.validate();
  classes_ = game_.classes();
  require(scheme_.classes() == classes_, "tracking policy: scheme and game class counts differ");
  require(config.delta > 0.0, "tracking policy: delta must be positive");
  const double T = game_.horizon;
  const double v = config.v.value_or(T / 4.0);
  require(v > 0.0 && v <= T, "tracking policy: v must lie in (0, T]");

  grid_.horizon = T;
  grid_.L = static_cast<int>(std::floor(T / v * (1.0 + 1e-12)));
  grid_.v_tilde = T / (grid_.L + 1);
  grid_.alpha_n = config.alpha_n.value_or(scheme_.bn / (std::sqrt(scheme_.n) * std::log(scheme_.n + 1.0)));
  require(grid_.alpha_n > 0.0, "tracking policy: alpha_n must be positive");
  grid_.H = std::max(2, static_cast<int>(std::floor(grid_.v_tilde / grid_.alpha_n)));
  grid_.delta_n = grid_.v_tilde / (grid_.H + 1);
  for (int i = 0; i < classes_; ++i) {
    grid_.M += std::sqrt(2.0 * game_.params.diffusivity(i) * config.delta * T);
    grid_.M += std::sqrt(2.0 * game_.params.mu[u(i)] * config.delta * T);
  }

  rho_ = game_.params.rho_vector();
  const std::vector<double> theta = game_.params.theta_vector();
  double w = 0.0;
  for (int i = 0; i < classes_; ++i) w += theta[u(i)] * game_.x[u(i)];
  ell_tilde_ = game_.curve(w);
  for (int i = 0; i < classes_; ++i) ell_tilde_[u(i)] -= game_.x[u(i)];

  const double coef = scheme_.bn / std::sqrt(scheme_.n);
  double sum = 0.0;
  gamma_.resize(u(classes_));
  for (int i = 0; i < classes_; ++i) {
    gamma_[u(i)] = std::max(0.0, rho_[u(i)] - coef / game_.params.mu[u(i)] * ell_tilde_[u(i)] / grid_.v_tilde);
    sum += gamma_[u(i)];
  }
  // sum is exactly 1 whenever the correction preserves workload; leave room for rounding
  if (sum > 1.0 + 1e-12) {
    gamma_ = rho_;
    gamma_capped_ = true;
  }

  block_fractions_.resize(u(grid_.blocks()));
  block_fractions_[0] = gamma_;
  if (grid_.L >= 1) block_fractions_[1] = rho_;

  prev_A_.assign(u(classes_), 0);
  prev_D_.assign(u(classes_), 0);
  psi_hat_.assign(u(classes_), 0.0);
  sup_A_.assign(u(classes_), 0.0);
  sup_D_.assign(u(classes_), 0.0);
}

const std::vector<double>& TrackingPolicy::fractions(int l) const {
  require(l >= 0 && l < grid_.blocks(), "tracking policy: block index out of range");
  require(!block_fractions_[u(l)].empty(), "tracking policy: block not decided yet");
  return block_fractions_[u(l)];
}

double TrackingPolicy::slot_boundary(int l, int j, int i) const {
  require(i >= 0 && i <= classes_ + 1, "tracking policy: slot index out of range");
  const double start = grid_.b(l, j), end = grid_.b(l, j + 1);
  if (i == 0) return start;
  if (i == classes_ + 1) return end;
  const auto& frac = fractions(l);
  double acc = 0.0;
  for (int k = 0; k < i; ++k) acc += frac[u(k)];
  return std::min(start + grid_.delta_n * acc, end);
}

void TrackingPolicy::observe(const SystemView& view) {
  const double scale = scheme_.scale();
  const double t = view.t;
  const std::vector<double> theta = game_.params.theta_vector();
  if (!started_) {
    std::copy(view.A.begin(), view.A.end(), prev_A_.begin());
    std::copy(view.D.begin(), view.D.end(), prev_D_.begin());
  }
  double w_left = 0.0, w_right = 0.0;
  for (int i = 0; i < classes_; ++i) {
    const double drift_A = scheme_.lambda_n[u(i)] * t;
    const double drift_D = scheme_.mu_n[u(i)] * view.busy[u(i)];
    const double a_left = (static_cast<double>(prev_A_[u(i)]) - drift_A) / scale;
    const double a_right = (static_cast<double>(view.A[u(i)]) - drift_A) / scale;
    const double d_left = (static_cast<double>(prev_D_[u(i)]) - drift_D) / scale;
    const double d_right = (static_cast<double>(view.D[u(i)]) - drift_D) / scale;
    sup_A_[u(i)] = std::max({sup_A_[u(i)], std::abs(a_left), std::abs(a_right)});
    sup_D_[u(i)] = std::max({sup_D_[u(i)], std::abs(d_left), std::abs(d_right)});
    const double base = game_.x[u(i)] + game_.params.y(i) * t;
    w_left += theta[u(i)] * (base + a_left - d_left);
    psi_hat_[u(i)] = base + a_right - d_right;
    w_right += theta[u(i)] * psi_hat_[u(i)];
  }
  min_workload_ = started_ ? std::min({min_workload_, w_left, w_right}) : std::min(w_left, w_right);
  started_ = true;
  last_t_ = t;
  std::copy(view.A.begin(), view.A.end(), prev_A_.begin());
  std::copy(view.D.begin(), view.D.end(), prev_D_.begin());

  // snapshots at macro boundaries reached by now (the engine stops at each a^l)
  while (static_cast<int>(zeta_at_a_.size()) <= grid_.L && t >= grid_.a(static_cast<int>(zeta_at_a_.size()))) {
    zeta_at_a_.push_back(zeta_hat_now());
    double norm = 0.0;
    for (int i = 0; i < classes_; ++i) norm += sup_A_[u(i)] + sup_D_[u(i)];
    norm_at_a_.push_back(norm);
  }
}

std::vector<double> TrackingPolicy::zeta_hat_now() const {
  const std::vector<double> theta = game_.params.theta_vector();
  double w = 0.0;
  for (int i = 0; i < classes_; ++i) w += theta[u(i)] * psi_hat_[u(i)];
  const double reflected = w + std::max(0.0, -min_workload_);
  std::vector<double> z = game_.curve(reflected);
  for (int i = 0; i < classes_; ++i) z[u(i)] -= psi_hat_[u(i)];
  return z;
}

void TrackingPolicy::decide_block(int l) {
  const auto& prev = zeta_at_a_[u(l - 1)];
  const auto& prev2 = zeta_at_a_[u(l - 2)];
  BetaRecord rec;
  rec.block = l;
  rec.norm_at_prev = norm_at_a_[u(l - 1)];
  const double coef = scheme_.bn / std::sqrt(scheme_.n);
  double sum = 0.0;
  for (int i = 0; i < classes_; ++i) {
    rec.F.push_back(coef / game_.params.mu[u(i)] * (prev[u(i)] - prev2[u(i)]) / grid_.v_tilde);
    rec.beta.push_back(std::max(0.0, rho_[u(i)] - rec.F.back()));
    sum += rec.beta.back();
  }
  if (!(sum <= 1.0 + 1e-12 && rec.norm_at_prev < grid_.M + 2.0)) {
    rec.beta = rho_;
    rec.capped = true;
  }
  block_fractions_[u(l)] = rec.beta;
  history_.push_back(std::move(rec));
}

void TrackingPolicy::allocate(const SystemView& view, std::span<long long> out) {
  observe(view);
  std::fill(out.begin(), out.end(), 0);
  if (view.t >= grid_.horizon) return;  // B(T) = 0
  const auto [l, j] = grid_.locate(view.t);
  for (int k = 2; k <= l; ++k)
    if (block_fractions_[u(k)].empty()) {
      require(static_cast<int>(zeta_at_a_.size()) >= k, "tracking policy: macro boundary was skipped");
      decide_block(k);
    }
  for (int i = 1; i <= classes_; ++i) {
    if (view.t >= slot_boundary(l, j, i - 1) && view.t < slot_boundary(l, j, i)) {
      out[u(i - 1)] = std::min(view.servers, view.X[u(i - 1)]);
      break;
    }
  }
}

double TrackingPolicy::next_trigger(double t) const {
  if (t >= grid_.horizon) return kInf;
  const auto [l, j] = grid_.locate(t);
  if (!block_fractions_[u(l)].empty())
    for (int i = 1; i <= classes_; ++i) {
      const double c = slot_boundary(l, j, i);
      if (c > t) return c;
    }
  const double next = grid_.b(l, j + 1);
  return next < grid_.horizon ? next : kInf;
}

void TrackingPolicy::write_audit_csv(std::ostream& out) const {
  out.precision(17);
  out << "# L=" << grid_.L << " v_tilde=" << grid_.v_tilde << " alpha_n=" << grid_.alpha_n << " H=" << grid_.H
      << " delta_n=" << grid_.delta_n << " M=" << grid_.M << " gamma_capped=" << gamma_capped_ << "\n";
  out << "block,a,source,capped";
  for (int i = 1; i <= classes_; ++i) out << ",frac" << i;
  for (int i = 1; i <= classes_; ++i) out << ",F" << i;
  out << ",norm\n";
  for (int l = 0; l < grid_.blocks(); ++l) {
    if (block_fractions_[u(l)].empty()) continue;
    const BetaRecord* rec = nullptr;
    for (const auto& r : history_)
      if (r.block == l) rec = &r;
    out << l << "," << grid_.a(l) << "," << (l == 0 ? "gamma" : l == 1 ? "rho" : "beta") << ","
        << (l == 0 ? gamma_capped_ : rec != nullptr && rec->capped);
    for (double f : block_fractions_[u(l)]) out << "," << f;
    for (int i = 0; i < classes_; ++i) out << "," << (rec != nullptr ? rec->F[u(i)] : 0.0);
    out << "," << (rec != nullptr ? rec->norm_at_prev : 0.0) << "\n";
  }
}

}  // namespace mdq
