#include <doctest.h>

#include <cmath>

#include "mdq/errors.hpp"
#include "mdq/families.hpp"
#include "mdq/scaling.hpp"

using namespace mdq;

TEST_CASE("rule arithmetic at n = 10^4") {
  const auto s = build_scaling(ClassParams::single(1.0, 1.0, 1.0), 1e4, BnRule::power(0.25), NnRule::power(0.5));
  CHECK(s.bn == doctest::Approx(10.0));
  CHECK(s.servers == 100);
  CHECK(static_cast<double>(s.servers) / s.scale() == doctest::Approx(0.1));
  CHECK(s.regime.bn_diverges);
  CHECK(s.regime.servers_over_bn_sqrt_n_vanish);
  CHECK(s.regime.warnings.empty());
}

TEST_CASE("n = 1 is allowed with a warning") {
  const auto s = build_scaling(ClassParams::single(1.0, 1.0, 1.0), 1.0);
  CHECK(s.bn == 1.0);
  CHECK(s.servers == 1);
  CHECK_FALSE(s.regime.warnings.empty());
}

TEST_CASE("second-order drift enters the prelimit rates") {
  auto p = ClassParams::single(1.0, 1.0, 1.0);
  p.lambda_tilde = {1.0};
  const auto s = build_scaling(p, 1e4, BnRule::power(0.25), NnRule::power(0.5));
  CHECK(s.lambda_n[0] == doctest::Approx(1.1e4));
  CHECK(s.lambda_tilde_n[0] == doctest::Approx(1.0));
  CHECK(s.mu_n[0] * static_cast<double>(s.servers) == doctest::Approx(1e4));
  CHECK(s.y_n(0) == doctest::Approx(1.0));
  CHECK(s.theta_n(0) == doctest::Approx(1.0));
}

TEST_CASE("rule validation") {
  const auto p = ClassParams::single(1.0, 1.0, 1.0);
  CHECK_THROWS_AS(build_scaling(p, 100.0, BnRule::power(0.5)), InvalidArgument);
  CHECK_THROWS_AS(build_scaling(p, 100.0, BnRule::power(0.25), NnRule::fixed_fraction(0.0)), InvalidArgument);
  CHECK_THROWS_AS(build_scaling(p, 0.5), InvalidArgument);
  const auto f = build_scaling(p, 100.0, BnRule::power(0.25), NnRule::fixed_fraction(0.5));
  CHECK(f.servers == 50);
  CHECK_FALSE(f.regime.servers_over_n_vanish);
  CHECK(BnRule::log().eval(2.0) == 1.0);
  CHECK(BnRule::log().eval(std::exp(3.0)) == doctest::Approx(3.0));
}

TEST_CASE("initial state lands on rho N for x = 0") {
  ClassParams p{{0.5, 0.5}, {1.0, 1.0}, {1.0, 1.0}, {0.0, 0.0}, {0.0, 0.0}};
  const auto s = build_scaling(p, 400.0);
  const std::vector<double> zero{0.0, 0.0};
  const auto st = initial_state(s, zero);
  CHECK(st.X0 == std::vector<long long>{10, 10});
  CHECK(st.max_discrepancy == 0.0);
  const std::vector<double> x{1.0, 0.0};
  const auto st2 = initial_state(s, x);
  CHECK(st2.X0[0] == 10 + static_cast<long long>(std::floor(s.scale())));
  CHECK(st2.max_discrepancy < 1.0 / s.scale());
}

TEST_CASE("seed derivation separates indices and streams") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0, 1) != derive_seed(1, 0, 2));
  CHECK(derive_seed(1, 5, 1) == derive_seed(1, 5, 1));
  CHECK(derive_seed(2, 0) != derive_seed(1, 0));
}

TEST_CASE("inter-arrival families have mean one and the declared variance") {
  const std::vector<InterArrivalFamily> fams{InterArrivalFamily::exponential(), InterArrivalFamily::erlang(4),
                                             InterArrivalFamily::hyperexponential(0.25, 2.5, 0.5),
                                             InterArrivalFamily::deterministic()};
  for (const auto& f : fams) {
    CAPTURE(f.describe());
    Rng rng(derive_seed(9, 0));
    const int n = 200000;
    double s = 0.0, s2 = 0.0;
    for (int k = 0; k < n; ++k) {
      const double v = f.sample(rng);
      s += v;
      s2 += v * v;
    }
    const double mean = s / n;
    const double var = s2 / n - mean * mean;
    CHECK(mean == doctest::Approx(1.0).epsilon(0.01));
    CHECK(var == doctest::Approx(f.variance()).epsilon(0.03).scale(0.01));
  }
  CHECK(InterArrivalFamily::erlang(4).variance() == doctest::Approx(0.25));
  CHECK(InterArrivalFamily::hyperexponential(0.25, 2.5, 0.5).variance() ==
        doctest::Approx(2.0 * (0.25 * 6.25 + 0.75 * 0.25) - 1.0));
  CHECK_THROWS_AS(InterArrivalFamily::hyperexponential(0.5, 1.0, 2.0), InvalidArgument);
  CHECK_THROWS_AS(InterArrivalFamily::erlang(0), InvalidArgument);
}
