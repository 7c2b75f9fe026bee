#pragma once

#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mdq/game.hpp"
#include "mdq/scaling.hpp"

namespace mdq {

/// What a policy may observe at time t: current counts and the exact
/// allocation integrals. Nothing from the future.
struct SystemView {
  double t = 0.0;
  long long servers = 0;
  std::span<const long long> X;
  std::span<const long long> A;
  std::span<const long long> D;
  std::span<const long long> B;     // allocation in force just before this decision
  std::span<const double> busy;     // int_0^t B_i
};

class Policy {
 public:
  virtual ~Policy() = default;
  /// Writes the allocation to hold from t until the next decision point.
  virtual void allocate(const SystemView& view, std::span<long long> out) = 0;
  /// Next deterministic decision time strictly after t (+inf if none).
  virtual double next_trigger(double t) const {
    (void)t;
    return std::numeric_limits<double>::infinity();
  }
  virtual std::string name() const = 0;
};

/// B_1 = X_1 ^ N, B_2 = X_2 ^ (N - B_1), ... in the given priority order
/// (identity order when `order` is empty).
std::vector<long long> cmu_priority(std::span<const long long> X, long long servers,
                                    std::span<const int> order = {});
long long nonidling_single(long long X, long long servers);

/// Priority order by c_i mu_i descending, ties keep the lower index first.
std::vector<int> cmu_order(const CostFunctions& costs, const ClassParams& params);

struct TrackingConfig {
  double delta = 4.0;             // rate-level budget
  std::optional<double> v;        // macro interval length, default T/4
  std::optional<double> alpha_n;  // micro scale, default b_n / (sqrt(n) log(n+1))
};

namespace policy_spec {
struct Cmu {
  std::vector<int> order;  // empty: derived from linear costs, else identity
};
struct Tracking {
  TrackingConfig config;
};
struct Zero {};
struct NonIdlingSingle {};
/// Returns the same allocation regardless of state. Debug stub: may be infeasible.
struct Fixed {
  std::vector<long long> allocation;
};
}  // namespace policy_spec

using PolicySpec = std::variant<policy_spec::Cmu, policy_spec::Tracking, policy_spec::Zero,
                                policy_spec::NonIdlingSingle, policy_spec::Fixed>;

std::string policy_name(const PolicySpec& spec);

std::unique_ptr<Policy> make_policy(const PolicySpec& spec, const GameSpec& game, const ScalingScheme& scheme);

class CmuPolicy : public Policy {
 public:
  explicit CmuPolicy(std::vector<int> order) : order_(std::move(order)) {}
  void allocate(const SystemView& view, std::span<long long> out) override;
  std::string name() const override { return "cmu"; }

 private:
  std::vector<int> order_;
};

class ZeroPolicy : public Policy {
 public:
  void allocate(const SystemView& view, std::span<long long> out) override;
  std::string name() const override { return "zero"; }
};

class NonIdlingSinglePolicy : public Policy {
 public:
  void allocate(const SystemView& view, std::span<long long> out) override;
  std::string name() const override { return "nonidling"; }
};

class FixedPolicy : public Policy {
 public:
  explicit FixedPolicy(std::vector<long long> allocation) : allocation_(std::move(allocation)) {}
  void allocate(const SystemView& view, std::span<long long> out) override;
  std::string name() const override { return "fixed"; }

 private:
  std::vector<long long> allocation_;
};

/// Macro/micro grids of the tracking policy.
struct TrackingGrid {
  double horizon = 1.0;
  int L = 0;              // floor(T / v)
  double v_tilde = 0.0;   // T / (L + 1)
  double alpha_n = 0.0;
  int H = 0;              // max(2, floor(v_tilde / alpha_n))
  double delta_n = 0.0;   // v_tilde / (H + 1)
  double M = 0.0;         // sup-norm cap on the level set {I <= delta}

  int blocks() const { return L + 1; }
  double a(int l) const;        // a^l, with a^{L+1} = T
  double b(int l, int j) const;  // b^{lj}, with b^{l(H+1)} = a^{l+1}
  /// Macro block l and micro index j containing t in [0, T).
  std::pair<int, int> locate(double t) const;
};

class TrackingPolicy : public Policy {
 public:
  TrackingPolicy(const TrackingConfig& config, const GameSpec& game, const ScalingScheme& scheme);

  void allocate(const SystemView& view, std::span<long long> out) override;
  double next_trigger(double t) const override;
  std::string name() const override { return "tracking"; }

  const TrackingGrid& grid() const { return grid_; }
  const std::vector<double>& ell_tilde() const { return ell_tilde_; }
  const std::vector<double>& gamma() const { return gamma_; }
  bool gamma_capped() const { return gamma_capped_; }

  /// Slot fractions used on block l (gamma, rho, or beta(l)); beta blocks must already be decided.
  const std::vector<double>& fractions(int l) const;
  /// c^{lj}(i) for i = 0..I+1.
  double slot_boundary(int l, int j, int i) const;
  /// Blocks l >= 2 decided so far, with beta(l), the capped flag and F(a^l).
  struct BetaRecord {
    int block = 0;
    std::vector<double> F;
    std::vector<double> beta;
    bool capped = false;
    double norm_at_prev = 0.0;  // ||P_n||* on [0, a^{l-1}]
  };
  const std::vector<BetaRecord>& beta_history() const { return history_; }
  /// zeta_hat[P_n] sampled at macro boundaries a^0, a^1, ... reached so far.
  const std::vector<std::vector<double>>& zeta_snapshots() const { return zeta_at_a_; }

  /// Grids, gamma and beta history as CSV.
  void write_audit_csv(std::ostream& out) const;

 private:
  void observe(const SystemView& view);
  void decide_block(int l);
  std::vector<double> zeta_hat_now() const;

  GameSpec game_;
  ScalingScheme scheme_;
  TrackingGrid grid_;
  int classes_ = 0;
  std::vector<double> rho_;
  std::vector<double> ell_tilde_;
  std::vector<double> gamma_;
  bool gamma_capped_ = false;

  // online state of P_n = (A~, D~) and of psi_hat
  double last_t_ = 0.0;
  bool started_ = false;
  std::vector<long long> prev_A_, prev_D_;
  std::vector<double> psi_hat_;       // psi_hat at last_t_ (right value)
  std::vector<double> sup_A_, sup_D_;  // running sup |A~_i|, |D~_i|
  double min_workload_ = 0.0;         // running min of theta . psi_hat

  std::vector<std::vector<double>> zeta_at_a_;
  std::vector<double> norm_at_a_;
  std::vector<std::vector<double>> block_fractions_;  // indexed by block
  std::vector<BetaRecord> history_;
};

}  // namespace mdq
