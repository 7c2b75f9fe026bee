#include "mdq/families.hpp"

#include <cmath>
#include <sstream>

#include "mdq/errors.hpp"

namespace mdq {

using detail::require;

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, std::uint64_t stream) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(master) ^ index) ^ (stream * 0xd1b54a32d192ed03ULL));
}

InterArrivalFamily InterArrivalFamily::exponential() { return {}; }

InterArrivalFamily InterArrivalFamily::erlang(int k) {
  require(k >= 1, "erlang: shape k must be >= 1");
  InterArrivalFamily f;
  f.kind_ = Kind::erlang;
  f.k_ = k;
  return f;
}

InterArrivalFamily InterArrivalFamily::hyperexponential(double p, double m1, double m2) {
  require(p > 0.0 && p < 1.0, "hyperexponential: p must lie in (0, 1)");
  require(m1 > 0.0 && m2 > 0.0, "hyperexponential: branch means must be positive");
  require(std::abs(p * m1 + (1.0 - p) * m2 - 1.0) <= 1e-9, "hyperexponential: mixture mean must equal 1");
  InterArrivalFamily f;
  f.kind_ = Kind::hyperexponential;
  f.p_ = p;
  f.m1_ = m1;
  f.m2_ = m2;
  return f;
}

InterArrivalFamily InterArrivalFamily::deterministic() {
  InterArrivalFamily f;
  f.kind_ = Kind::deterministic;
  return f;
}

double InterArrivalFamily::variance() const {
  switch (kind_) {
    case Kind::exponential: return 1.0;
    case Kind::erlang: return 1.0 / k_;
    case Kind::hyperexponential: return 2.0 * (p_ * m1_ * m1_ + (1.0 - p_) * m2_ * m2_) - 1.0;
    case Kind::deterministic: return 0.0;
  }
  return 0.0;
}

std::string InterArrivalFamily::describe() const {
  std::ostringstream out;
  switch (kind_) {
    case Kind::exponential: out << "exponential"; break;
    case Kind::erlang: out << "erlang(" << k_ << ")"; break;
    case Kind::hyperexponential: out << "hyperexponential(" << p_ << "," << m1_ << "," << m2_ << ")"; break;
    case Kind::deterministic: out << "deterministic"; break;
  }
  return out.str();
}

double InterArrivalFamily::sample(Rng& rng) const {
  switch (kind_) {
    case Kind::exponential: return std::exponential_distribution<double>(1.0)(rng);
    case Kind::erlang: return std::gamma_distribution<double>(k_, 1.0 / k_)(rng);
    case Kind::hyperexponential: {
      const bool first = std::bernoulli_distribution(p_)(rng);
      return std::exponential_distribution<double>(1.0 / (first ? m1_ : m2_))(rng);
    }
    case Kind::deterministic: return 1.0;
  }
  return 1.0;
}

}  // namespace mdq
