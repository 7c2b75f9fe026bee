#include "mdq/scaling.hpp"

#include <cmath>
#include <sstream>

#include "mdq/errors.hpp"

namespace mdq {

using detail::require;

namespace {
std::size_t u(int i) { return static_cast<std::size_t>(i); }
}  // namespace

double BnRule::eval(double n) const {
  if (kind == Kind::log) return std::max(1.0, std::log(n));
  return std::pow(n, p);
}

std::string BnRule::describe() const {
  std::ostringstream out;
  if (kind == Kind::log)
    out << "b_n = max(1, ln n)";
  else
    out << "b_n = n^" << p;
  return out.str();
}

long long NnRule::eval(double n) const {
  const double raw = kind == Kind::power ? std::pow(n, q) : fraction * n;
  // guard floor() against n^0.5 landing a hair below an integer
  return std::max(1LL, static_cast<long long>(std::floor(raw * (1.0 + 1e-12))));
}

std::string NnRule::describe() const {
  std::ostringstream out;
  if (kind == Kind::power)
    out << "N^n = floor(n^" << q << ")";
  else
    out << "N^n = floor(" << fraction << " n)";
  return out.str();
}

double ScalingScheme::scale() const { return bn * std::sqrt(n); }

double ScalingScheme::theta_n(int i) const { return n / (static_cast<double>(servers) * mu_n[u(i)]); }

double ScalingScheme::y_n(int i) const { return lambda_tilde_n[u(i)] - rho(i) * mu_tilde_n[u(i)]; }

void ScalingScheme::validate() const {
  params.validate();
  require(n >= 1.0 && std::isfinite(n), "ScalingScheme: n must be >= 1");
  require(bn >= 1.0 && std::isfinite(bn), "ScalingScheme: b_n must be >= 1");
  require(servers >= 1, "ScalingScheme: need at least one server");
  require(lambda_n.size() == u(params.classes()) && mu_n.size() == u(params.classes()),
          "ScalingScheme: per-class rate vectors must match the class count");
  for (int i = 0; i < classes(); ++i) {
    require(lambda_n[u(i)] >= 0.0 && std::isfinite(lambda_n[u(i)]), "ScalingScheme: lambda^n_i must be >= 0");
    require(mu_n[u(i)] > 0.0 && std::isfinite(mu_n[u(i)]), "ScalingScheme: mu^n_i must be > 0");
  }
}

namespace {

void fill_tilde(ScalingScheme& s) {
  const double scale = s.scale();
  s.lambda_tilde_n.resize(s.mu_n.size());
  s.mu_tilde_n.resize(s.mu_n.size());
  for (int i = 0; i < s.classes(); ++i) {
    s.lambda_tilde_n[u(i)] = (s.lambda_n[u(i)] - s.n * s.params.lambda[u(i)]) / scale;
    s.mu_tilde_n[u(i)] = (static_cast<double>(s.servers) * s.mu_n[u(i)] - s.n * s.params.mu[u(i)]) / scale;
  }
}

}  // namespace

ScalingScheme build_scaling(const ClassParams& params, double n, const BnRule& bn_rule, const NnRule& n_rule) {
  params.validate();
  require(n >= 1.0 && std::isfinite(n), "build_scaling: n must be >= 1");
  ScalingScheme s;
  s.params = params;
  s.n = n;

  RegimeReport& r = s.regime;
  if (bn_rule.kind == BnRule::Kind::power) {
    require(bn_rule.p > 0.0 && bn_rule.p < 0.5, "build_scaling: power rule for b_n needs 0 < p < 1/2");
    r.bn_diverges = true;
    r.bn_over_sqrt_n_vanishes = true;
  } else {
    r.bn_diverges = true;
    r.bn_over_sqrt_n_vanishes = true;
  }
  double bn_growth = bn_rule.kind == BnRule::Kind::power ? bn_rule.p : 0.0;  // log counts as exponent 0+
  if (n_rule.kind == NnRule::Kind::power) {
    require(n_rule.q > 0.0 && n_rule.q <= 1.0, "build_scaling: power rule for N^n needs 0 < q <= 1");
    r.servers_over_n_vanish = n_rule.q < 1.0;
    r.servers_over_bn_sqrt_n_vanish = n_rule.q < 0.5 + bn_growth || (n_rule.q == 0.5 && bn_rule.kind == BnRule::Kind::log);
  } else {
    require(n_rule.fraction > 0.0 && n_rule.fraction <= 1.0, "build_scaling: server fraction must lie in (0, 1]");
    r.servers_over_n_vanish = false;
    r.servers_over_bn_sqrt_n_vanish = false;
  }

  s.bn = std::max(1.0, bn_rule.eval(n));
  s.servers = n_rule.eval(n);
  const double scale = s.scale();
  for (int i = 0; i < params.classes(); ++i) {
    s.lambda_n.push_back(n * params.lambda[u(i)] + scale * params.lambda_tilde[u(i)]);
    s.mu_n.push_back((n * params.mu[u(i)] + scale * params.mu_tilde[u(i)]) / static_cast<double>(s.servers));
    require(s.lambda_n.back() > 0.0, "build_scaling: lambda^n_i must be > 0 (second-order drift too negative)");
    require(s.mu_n.back() > 0.0, "build_scaling: mu^n_i must be > 0 (second-order drift too negative)");
  }
  fill_tilde(s);

  if (s.bn / std::sqrt(n) > 0.5)
    r.warnings.push_back("b_n / sqrt(n) = " + std::to_string(s.bn / std::sqrt(n)) + " exceeds 1/2 at this n");
  if (!r.servers_over_n_vanish) r.warnings.push_back("N^n / n does not vanish under this rule");
  if (!r.servers_over_bn_sqrt_n_vanish)
    r.warnings.push_back("N^n / (b_n sqrt(n)) does not vanish: outside the unbounded-cost regime");
  s.validate();
  return s;
}

ScalingScheme manual_scaling(const ClassParams& params, double n, double bn, long long servers,
                             std::vector<double> lambda_n, std::vector<double> mu_n) {
  ScalingScheme s;
  s.params = params;
  s.n = n;
  s.bn = bn;
  s.servers = servers;
  s.lambda_n = std::move(lambda_n);
  s.mu_n = std::move(mu_n);
  s.validate();
  fill_tilde(s);
  return s;
}

InitialState initial_state(const ScalingScheme& scheme, std::span<const double> x) {
  require(static_cast<int>(x.size()) == scheme.classes(), "initial_state: x dimension must equal class count");
  InitialState out;
  const double scale = scheme.scale();
  const double servers = static_cast<double>(scheme.servers);
  for (int i = 0; i < scheme.classes(); ++i) {
    require(x[u(i)] >= 0.0 && std::isfinite(x[u(i)]), "initial_state: x must be nonnegative");
    const double target = scheme.rho(i) * servers + x[u(i)] * scale;
    // tiny relative slack so rho N = 20 does not floor to 19
    const long long X0 = static_cast<long long>(std::floor(target + 1e-9 * (1.0 + target)));
    out.X0.push_back(std::max(0LL, X0));
    const double achieved = (static_cast<double>(out.X0.back()) - scheme.rho(i) * servers) / scale;
    out.discrepancy.push_back(achieved - x[u(i)]);
    out.max_discrepancy = std::max(out.max_discrepancy, std::abs(out.discrepancy.back()));
  }
  return out;
}

}  // namespace mdq
