#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace mdq {

/// 64-bit engine used for every stochastic stream.
using Rng = std::mt19937_64;

/// Seed for stream `stream` of replication `index` under `master` (splitmix64 mixing).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, std::uint64_t stream = 0);

/// Mean-one inter-arrival distribution.
class InterArrivalFamily {
 public:
  enum class Kind { exponential, erlang, hyperexponential, deterministic };

  static InterArrivalFamily exponential();
  static InterArrivalFamily erlang(int k);
  /// Mixture: mean m1 with probability p, mean m2 otherwise; p m1 + (1-p) m2 must be 1.
  static InterArrivalFamily hyperexponential(double p, double m1, double m2);
  static InterArrivalFamily deterministic();

  Kind kind() const { return kind_; }
  double variance() const;
  std::string describe() const;

  double sample(Rng& rng) const;

  int erlang_k() const { return k_; }
  double hyper_p() const { return p_; }
  double hyper_m1() const { return m1_; }
  double hyper_m2() const { return m2_; }

 private:
  Kind kind_ = Kind::exponential;
  int k_ = 1;
  double p_ = 1.0, m1_ = 1.0, m2_ = 1.0;
};

}  // namespace mdq
