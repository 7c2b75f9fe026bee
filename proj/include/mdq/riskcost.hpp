#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mdq/families.hpp"
#include "mdq/game.hpp"
#include "mdq/policies.hpp"
#include "mdq/scaling.hpp"
#include "mdq/sim.hpp"

namespace mdq {

/// (1/scale) (logsumexp(scale z) - log R), shift-stable.
double log_mean_exp(std::span<const double> z, double scale);

struct CostEstimate {
  double J = 0.0;
  std::size_t replications = 0;
  double se = 0.0;   // jackknife standard error of J
  double ess = 0.0;  // (sum w)^2 / sum w^2 with w_k = exp(b^2 (z_k - max z))
  double mean_payoff = 0.0;
  std::vector<double> payoffs;  // kept only when requested
};

/// Aggregates per-replication payoffs into J, its jackknife error and the ESS.
CostEstimate summarize_payoffs(std::span<const double> payoffs, double scale);

struct EstimateOptions {
  std::size_t replications = 1000;
  std::uint64_t master_seed = 1;
  PayoffTarget target = PayoffTarget::X;
  unsigned threads = 1;
  bool keep_payoffs = false;
};

/// J^n = (1/b_n^2) log E exp(b_n^2 (int h(Y~) + g(Y~(T)))), plain Monte Carlo.
/// Replication k uses seed derive_seed(master_seed, k).
CostEstimate estimate_cost(const GameSpec& game, const ScalingScheme& scheme, const PolicySpec& policy,
                           std::span<const InterArrivalFamily> families, const EstimateOptions& options);

struct SweepRow {
  double n = 0.0;
  double bn = 0.0;
  long long servers = 0;
  CostEstimate estimate;
  double V = 0.0;
  double gap = 0.0;  // J - V
};

struct SweepOptions {
  std::vector<double> n_list;
  BnRule bn_rule;
  NnRule n_rule;
  EstimateOptions estimate;
  SolveOptions solve;
};

struct SweepResult {
  double V = 0.0;
  std::vector<SweepRow> rows;
  std::vector<std::string> warnings;
};

SweepResult convergence_sweep(const GameSpec& game, const PolicySpec& policy,
                              std::span<const InterArrivalFamily> families, const SweepOptions& options);

/// Columns n,bn,N,J,se,ess,V,gap.
void write_sweep_csv(std::ostream& out, const SweepResult& result);

}  // namespace mdq
