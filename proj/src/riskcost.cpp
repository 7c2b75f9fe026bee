#include "mdq/riskcost.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <ostream>
#include <thread>

#include "mdq/errors.hpp"

namespace mdq {

using detail::require;

double log_mean_exp(std::span<const double> z, double scale) {
  require(!z.empty(), "log_mean_exp: need at least one sample");
  require(scale > 0.0 && std::isfinite(scale), "log_mean_exp: scale must be positive");
  const double m = *std::max_element(z.begin(), z.end());
  require(std::isfinite(m), "log_mean_exp: samples must be finite");
  double acc = 0.0;
  for (double v : z) acc += std::exp(scale * (v - m));
  return m + (std::log(acc) - std::log(static_cast<double>(z.size()))) / scale;
}

CostEstimate summarize_payoffs(std::span<const double> payoffs, double scale) {
  const std::size_t R = payoffs.size();
  require(R >= 2, "summarize_payoffs: need at least two replications");
  CostEstimate est;
  est.replications = R;
  est.J = log_mean_exp(payoffs, scale);

  const double m = *std::max_element(payoffs.begin(), payoffs.end());
  std::vector<double> w(R);
  double S = 0.0, S2 = 0.0, mean = 0.0;
  for (std::size_t k = 0; k < R; ++k) {
    w[k] = std::exp(scale * (payoffs[k] - m));
    S += w[k];
    S2 += w[k] * w[k];
    mean += payoffs[k];
  }
  est.ess = S * S / S2;
  est.mean_payoff = mean / static_cast<double>(R);

  // leave-one-out values; recompute directly when one weight dominates the sum
  std::vector<double> loo(R);
  std::vector<double> rest;
  for (std::size_t k = 0; k < R; ++k) {
    double S_k = S - w[k];
    if (S_k < 1e-8 * S) {
      rest.assign(payoffs.begin(), payoffs.end());
      rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(k));
      loo[k] = log_mean_exp(rest, scale);
      continue;
    }
    loo[k] = m + (std::log(S_k) - std::log(static_cast<double>(R - 1))) / scale;
  }
  double loo_mean = 0.0;
  for (double v : loo) loo_mean += v;
  loo_mean /= static_cast<double>(R);
  double ss = 0.0;
  for (double v : loo) ss += (v - loo_mean) * (v - loo_mean);
  est.se = std::sqrt(static_cast<double>(R - 1) / static_cast<double>(R) * ss);
  return est;
}

CostEstimate estimate_cost(const GameSpec& game, const ScalingScheme& scheme, const PolicySpec& policy,
                           std::span<const InterArrivalFamily> families, const EstimateOptions& options) {
  require(options.replications >= 2, "estimate_cost: need at least two replications");
  game.validate();
  scheme.validate();
  require(static_cast<int>(families.size()) == game.classes(), "estimate_cost: need one family per class");

  const InitialState init = initial_state(scheme, game.x);
  SimOptions sim;
  sim.horizon = game.horizon;
  sim.X0 = init.X0;

  const std::size_t R = options.replications;
  std::vector<double> payoffs(R, 0.0);
  const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(R)));
  std::vector<std::exception_ptr> errors(threads);

  auto worker = [&](unsigned id) {
    try {
      for (std::size_t k = id; k < R; k += threads) {
        auto p = make_policy(policy, game, scheme);
        SimOptions local = sim;
        local.seed = derive_seed(options.master_seed, k);
        try {
          payoffs[k] = simulate_payoff(scheme, families, *p, local, game.costs, options.target);
        } catch (const NumericalError& e) {
          throw NumericalError("estimate_cost: replication " + std::to_string(k) + ": " + e.what());
        }
      }
    } catch (...) {
      errors[id] = std::current_exception();
    }
  };

  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned id = 0; id < threads; ++id) pool.emplace_back(worker, id);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  const double scale = scheme.bn * scheme.bn;
  for (std::size_t k = 0; k < R; ++k)
    if (!std::isfinite(scale * payoffs[k]))
      throw NumericalError("estimate_cost: payoff overflow in replication " + std::to_string(k));
  CostEstimate est = summarize_payoffs(payoffs, scale);
  if (options.keep_payoffs) est.payoffs = std::move(payoffs);
  return est;
}

SweepResult convergence_sweep(const GameSpec& game, const PolicySpec& policy,
                              std::span<const InterArrivalFamily> families, const SweepOptions& options) {
  require(!options.n_list.empty(), "convergence_sweep: n list must not be empty");
  SweepResult result;
  result.V = solve_value(game, options.solve).value;
  for (int i = 0; i < game.classes(); ++i) {
    const double declared = game.params.sigma2[static_cast<std::size_t>(i)];
    const double actual = families[static_cast<std::size_t>(i)].variance();
    if (std::abs(declared - actual) > 1e-9 * (1.0 + declared))
      result.warnings.push_back("class " + std::to_string(i + 1) + ": inter-arrival variance " +
                                std::to_string(actual) + " differs from declared sigma2 " + std::to_string(declared));
  }
  for (double n : options.n_list) {
    const ScalingScheme scheme = build_scaling(game.params, n, options.bn_rule, options.n_rule);
    SweepRow row;
    row.n = n;
    row.bn = scheme.bn;
    row.servers = scheme.servers;
    row.estimate = estimate_cost(game, scheme, policy, families, options.estimate);
    row.V = result.V;
    row.gap = row.estimate.J - result.V;
    if (row.estimate.ess < 10.0)
      result.warnings.push_back("n=" + std::to_string(static_cast<long long>(n)) + ": effective sample size " +
                                std::to_string(row.estimate.ess) + " < 10, the estimate is dominated by few paths");
    for (const auto& w : scheme.regime.warnings)
      result.warnings.push_back("n=" + std::to_string(static_cast<long long>(n)) + ": " + w);
    result.rows.push_back(std::move(row));
  }
  return result;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out.precision(10);
  out << "n,bn,N,J,se,ess,V,gap\n";
  for (const auto& r : result.rows)
    out << r.n << "," << r.bn << "," << r.servers << "," << r.estimate.J << "," << r.estimate.se << ","
        << r.estimate.ess << "," << r.V << "," << r.gap << "\n";
}

}  // namespace mdq
