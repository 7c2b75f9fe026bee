#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "fixtures.hpp"
#include "mdq/errors.hpp"
#include "mdq/policies.hpp"
#include "mdq/scaling.hpp"
#include "mdq/sim.hpp"
#include "replay.hpp"

using namespace mdq;

namespace {

GameSpec two_class_game(std::vector<double> x) {
  GameSpec g;
  g.params = ClassParams{{0.5, 0.5}, {1.0, 1.0}, {1.0, 1.0}, {0.0, 0.0}, {0.0, 0.0}};
  g.x = std::move(x);
  g.costs = CostFunctions::linear({2.0, 1.0}, {2.0, 1.0});  // cheapest class is 2
  g.curve = min_curve_linear(g.costs, g.params);
  return g;
}

// A ~ lambda^n t, D = mu^n busy + kappa_i * scale * t, X large enough to saturate the servers.
replay::StateFn drifting(const ScalingScheme& s, std::vector<double> kappa, long long X) {
  return [&s, kappa, X](double t, const std::vector<double>& busy) {
    replay::State st;
    for (int i = 0; i < s.classes(); ++i) {
      const auto iu = static_cast<std::size_t>(i);
      st.X.push_back(X);
      st.A.push_back(static_cast<long long>(std::floor(s.lambda_n[iu] * t)));
      st.D.push_back(static_cast<long long>(std::llround(s.mu_n[iu] * busy[iu] + kappa[iu] * s.scale() * t)));
    }
    return st;
  };
}

}  // namespace

TEST_CASE("cmu priority table") {
  CHECK(cmu_priority(std::vector<long long>{3, 4}, 5) == std::vector<long long>{3, 2});
  CHECK(cmu_priority(std::vector<long long>{0, 0}, 5) == std::vector<long long>{0, 0});
  CHECK(cmu_priority(std::vector<long long>{7, 2}, 5) == std::vector<long long>{5, 0});
  const std::vector<int> rev{1, 0};
  CHECK(cmu_priority(std::vector<long long>{3, 4}, 5, rev) == std::vector<long long>{1, 4});
}

TEST_CASE("cmu priority is work conserving") {
  for (long long a = 0; a < 8; ++a)
    for (long long b = 0; b < 8; ++b)
      for (long long N : {0LL, 1LL, 5LL, 20LL}) {
        const auto B = cmu_priority(std::vector<long long>{a, b}, N);
        CHECK(B[0] + B[1] == std::min(N, a + b));
        CHECK(B[0] <= a);
        CHECK(B[1] <= b);
      }
}

TEST_CASE("cmu order follows c mu") {
  ClassParams p{{0.5, 1.0}, {1.0, 2.0}, {1.0, 1.0}, {0.0, 0.0}, {0.0, 0.0}};
  CHECK(cmu_order(CostFunctions::linear({1.0, 1.0}, {0.0, 0.0}), p) == std::vector<int>{1, 0});
  CHECK(cmu_order(CostFunctions::linear({3.0, 1.0}, {0.0, 0.0}), p) == std::vector<int>{0, 1});
  CHECK(cmu_order(CostFunctions::linear({2.0, 1.0}, {0.0, 0.0}), p) == std::vector<int>{0, 1});
}

TEST_CASE("non-idling single class") {
  CHECK(nonidling_single(3, 5) == 3);
  CHECK(nonidling_single(7, 5) == 5);
  CHECK(nonidling_single(0, 5) == 0);
}

TEST_CASE("tracking grids partition the horizon") {
  const auto g = two_class_game({0.0, 0.0});
  const auto s = build_scaling(g.params, 400.0);
  for (double v : {0.25, 0.3, 1.0}) {
    TrackingConfig cfg;
    cfg.v = v;
    TrackingPolicy p(cfg, g, s);
    const auto& G = p.grid();
    CHECK(G.a(0) == 0.0);
    CHECK(G.a(G.L + 1) == g.horizon);
    CHECK(G.H >= 2);
    for (int l = 0; l <= G.L; ++l) {
      CHECK(G.b(l, 0) == G.a(l));
      CHECK(G.b(l, G.H + 1) == G.a(l + 1));
      for (int j = 0; j <= G.H; ++j) {
        CHECK(G.b(l, j + 1) > G.b(l, j));
        const double mid = 0.5 * (G.b(l, j) + G.b(l, j + 1));
        CHECK(G.locate(mid) == std::pair<int, int>{l, j});
        CHECK(G.locate(G.b(l, j)) == std::pair<int, int>{l, j});
      }
    }
  }
}

TEST_CASE("gamma on and off the minimizing curve") {
  const auto s = build_scaling(two_class_game({0.0, 0.0}).params, 400.0);
  {
    TrackingPolicy p({}, two_class_game({0.0, 0.7}), s);
    CHECK(p.gamma() == std::vector<double>{0.5, 0.5});
    CHECK_FALSE(p.gamma_capped());
  }
  {
    // small excess of class 1 is drained through a larger class-1 slot
    TrackingPolicy p({}, two_class_game({0.02, 0.0}), s);
    const double corr = s.bn / std::sqrt(s.n) * 0.02 / p.grid().v_tilde;
    CHECK_FALSE(p.gamma_capped());
    CHECK(p.gamma()[0] == doctest::Approx(0.5 + corr));
    CHECK(p.gamma()[1] == doctest::Approx(0.5 - corr));
  }
  {
    TrackingPolicy p({}, two_class_game({2.0, 0.0}), s);
    CHECK(p.gamma_capped());
    CHECK(p.gamma() == std::vector<double>{0.5, 0.5});
  }
}

TEST_CASE("slot boundaries within a micro interval") {
  const auto g = two_class_game({0.02, 0.0});
  const auto s = build_scaling(g.params, 400.0);
  TrackingPolicy p({}, g, s);
  const auto& G = p.grid();
  for (int j = 0; j <= G.H; ++j) {
    CHECK(p.slot_boundary(0, j, 0) == G.b(0, j));
    CHECK(p.slot_boundary(0, j, 3) == G.b(0, j + 1));
    for (int i = 0; i < 3; ++i) CHECK(p.slot_boundary(0, j, i + 1) >= p.slot_boundary(0, j, i));
    CHECK(p.slot_boundary(0, j, 2) - p.slot_boundary(0, j, 0) <= G.delta_n * (1 + 1e-12));
  }
}

TEST_CASE("flat zeta keeps beta at rho") {
  const auto g = two_class_game({0.0, 0.0});
  const auto s = build_scaling(g.params, 400.0);
  TrackingPolicy p({}, g, s);
  replay::run(p, 2, s.servers, g.horizon, drifting(s, {0.0, 0.0}, 1000));
  REQUIRE(p.beta_history().size() == static_cast<std::size_t>(p.grid().L - 1));
  for (const auto& rec : p.beta_history()) {
    CHECK_FALSE(rec.capped);
    for (int i = 0; i < 2; ++i) {
      CHECK(std::abs(rec.F[static_cast<std::size_t>(i)]) < 0.05);
      CHECK(rec.beta[static_cast<std::size_t>(i)] == doctest::Approx(0.5).epsilon(0.1));
    }
  }
}

TEST_CASE("uncapped beta and time-average allocation on a saturated trace") {
  const auto g = two_class_game({0.0, 0.0});
  const auto s = build_scaling(g.params, 400.0);
  TrackingPolicy p({}, g, s);
  // class-1 departures run ahead of mu^n busy: zeta_1 grows at rate kappa, F_1 = coef kappa / mu_1
  const double kappa = 0.4;
  const auto res = replay::run(p, 2, s.servers, g.horizon, drifting(s, {kappa, 0.0}, 1000));
  const double coef = s.bn / std::sqrt(s.n);
  const auto& G = p.grid();
  REQUIRE(!p.beta_history().empty());
  for (const auto& rec : p.beta_history()) {
    CAPTURE(rec.block);
    CHECK_FALSE(rec.capped);
    CHECK(rec.F[0] == doctest::Approx(coef * kappa).epsilon(0.05));
    CHECK(rec.beta[0] == doctest::Approx(0.5 - coef * kappa).epsilon(0.05));
    const double len = G.a(rec.block + 1) - G.a(rec.block);
    for (int i = 0; i < 2; ++i) {
      const double frac = res.integral(i, G.a(rec.block), G.a(rec.block + 1)) / (static_cast<double>(s.servers) * len);
      CHECK(std::abs(frac - rec.beta[static_cast<std::size_t>(i)]) <= 2 * G.delta_n / G.v_tilde);
    }
  }
}

TEST_CASE("norm cap forces beta = rho") {
  const auto g = two_class_game({0.0, 0.0});
  const auto s = build_scaling(g.params, 400.0);
  TrackingConfig cfg;
  cfg.delta = 1e-3;
  TrackingPolicy p(cfg, g, s);
  REQUIRE(p.grid().M + 2.0 < 3.0);
  auto base = drifting(s, {0.0, 0.0}, 1000);
  auto jumpy = [&](double t, const std::vector<double>& busy) {
    auto st = base(t, busy);
    if (t >= 0.01) st.A[0] += static_cast<long long>(std::ceil(3.0 * s.scale()));
    return st;
  };
  replay::run(p, 2, s.servers, g.horizon, jumpy);
  REQUIRE(!p.beta_history().empty());
  for (const auto& rec : p.beta_history()) {
    CHECK(rec.norm_at_prev >= p.grid().M + 2.0);
    CHECK(rec.capped);
    CHECK(rec.beta == std::vector<double>{0.5, 0.5});
  }
}

TEST_CASE("sum cap forces beta = rho") {
  const auto g = two_class_game({0.0, 0.0});
  const auto s = build_scaling(g.params, 400.0);
  TrackingPolicy p({}, g, s);
  const double coef = s.bn / std::sqrt(s.n);
  const double kappa = -1.2 * 0.5 / coef;  // class 1 falls behind: F_2 > rho_2, F_1 < 0
  replay::run(p, 2, s.servers, g.horizon, drifting(s, {kappa, 0.0}, 1000));
  REQUIRE(!p.beta_history().empty());
  for (const auto& rec : p.beta_history()) {
    CHECK(rec.norm_at_prev < p.grid().M + 2.0);
    const double sum = std::max(0.0, 0.5 - rec.F[0]) + std::max(0.0, 0.5 - rec.F[1]);
    CHECK(sum > 1.0);
    CHECK(rec.capped);
    CHECK(rec.beta == std::vector<double>{0.5, 0.5});
  }
}

TEST_CASE("beta matches its definition on a simulated run") {
  const auto g = two_class_game({0.3, 0.2});
  const auto s = build_scaling(g.params, 400.0);
  TrackingPolicy p({}, g, s);
  const std::vector<InterArrivalFamily> fam(2, InterArrivalFamily::exponential());
  SimOptions o;
  o.horizon = g.horizon;
  o.seed = 4;
  o.X0 = initial_state(s, g.x).X0;
  simulate(s, fam, p, o);
  const double coef = s.bn / std::sqrt(s.n);
  const auto& z = p.zeta_snapshots();
  for (const auto& rec : p.beta_history()) {
    double sum = 0.0;
    std::vector<double> expect;
    for (int i = 0; i < 2; ++i) {
      const auto iu = static_cast<std::size_t>(i);
      const double F = coef / g.params.mu[iu] *
                       (z[static_cast<std::size_t>(rec.block - 1)][iu] - z[static_cast<std::size_t>(rec.block - 2)][iu]) /
                       p.grid().v_tilde;
      CHECK(rec.F[iu] == doctest::Approx(F));
      expect.push_back(std::max(0.0, 0.5 - F));
      sum += expect.back();
    }
    const bool cap = sum > 1.0 + 1e-12 || rec.norm_at_prev >= p.grid().M + 2.0;
    CHECK(rec.capped == cap);
    if (cap) expect = {0.5, 0.5};
    CHECK(rec.beta[0] == doctest::Approx(expect[0]));
    CHECK(rec.beta[1] == doctest::Approx(expect[1]));
  }
  std::ostringstream audit;
  p.write_audit_csv(audit);
  CHECK(audit.str().find("block,a,source,capped") != std::string::npos);
}

TEST_CASE("policy factory") {
  const auto g = two_class_game({0.0, 0.0});
  const auto s = build_scaling(g.params, 400.0);
  CHECK(make_policy(policy_spec::Cmu{}, g, s)->name() == "cmu");
  CHECK(make_policy(policy_spec::Tracking{}, g, s)->name() == "tracking");
  CHECK(make_policy(policy_spec::Zero{}, g, s)->name() == "zero");
  CHECK_THROWS_AS(make_policy(policy_spec::NonIdlingSingle{}, g, s), InvalidArgument);
  CHECK_THROWS_AS(make_policy(policy_spec::Fixed{{1}}, g, s), InvalidArgument);
  CHECK(policy_name(policy_spec::Fixed{{1, 1}}) == "fixed");
}
