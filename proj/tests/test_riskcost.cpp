#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fixtures.hpp"
#include "mdq/errors.hpp"
#include "mdq/riskcost.hpp"

using namespace mdq;

namespace {
const std::vector<InterArrivalFamily> kExp1{InterArrivalFamily::exponential()};
}

TEST_CASE("log mean exp identities") {
  const std::vector<double> c(7, 0.37);
  CHECK(log_mean_exp(c, 5.0) == doctest::Approx(0.37).epsilon(1e-14));
  const std::vector<double> two{0.0, std::log(4.0)};
  CHECK(log_mean_exp(two, 1.0) == doctest::Approx(std::log(2.5)));
  const std::vector<double> atoms{0.0, 1.0};
  CHECK(log_mean_exp(atoms, 1e6) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(log_mean_exp(atoms, 1e6) <= 1.0);
  const std::vector<double> z{-1.0, 0.5, 2.0, 0.1};
  std::vector<double> shifted = z;
  for (double& v : shifted) v += 3.0;
  CHECK(log_mean_exp(shifted, 2.0) == doctest::Approx(log_mean_exp(z, 2.0) + 3.0).epsilon(1e-13));
  const double j = log_mean_exp(z, 2.0);
  CHECK(j >= -1.0);
  CHECK(j <= 2.0);
}

TEST_CASE("summary statistics") {
  const std::vector<double> flat(10, 1.0);
  const auto a = summarize_payoffs(flat, 3.0);
  CHECK(a.J == doctest::Approx(1.0));
  CHECK(a.se == doctest::Approx(0.0).scale(1e-12));
  CHECK(a.ess == doctest::Approx(10.0));
  const std::vector<double> spread{0.0, 0.0, 0.0, 5.0};
  const auto b = summarize_payoffs(spread, 10.0);
  CHECK(b.ess == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(b.se > 0.0);
  CHECK(b.ess <= 4.0);
}

TEST_CASE("degenerate system has zero cost") {
  auto game = fixture::one_third();
  const auto s = manual_scaling(game.params, 400.0, std::pow(400.0, 0.25), 20, {0.0}, {20.0});
  EstimateOptions o;
  o.replications = 8;
  const auto est = estimate_cost(game, s, policy_spec::Zero{}, kExp1, o);
  CHECK(est.J == 0.0);
}

TEST_CASE("estimates are deterministic and thread-count independent") {
  const auto game = fixture::one_third();
  const auto s = build_scaling(game.params, 100.0);
  EstimateOptions o;
  o.replications = 64;
  o.master_seed = 12;
  const auto a = estimate_cost(game, s, policy_spec::Cmu{}, kExp1, o);
  o.threads = 3;
  const auto b = estimate_cost(game, s, policy_spec::Cmu{}, kExp1, o);
  CHECK(a.J == b.J);
  CHECK(a.se == b.se);
}

TEST_CASE("zero policy dominates cmu on matched seeds") {
  const auto game = fixture::one_third();
  const auto s = build_scaling(game.params, 400.0);
  EstimateOptions o;
  o.replications = 20;
  o.keep_payoffs = true;
  const auto z = estimate_cost(game, s, policy_spec::Zero{}, kExp1, o);
  const auto c = estimate_cost(game, s, policy_spec::Cmu{}, kExp1, o);
  for (std::size_t k = 0; k < z.payoffs.size(); ++k) CHECK(z.payoffs[k] >= c.payoffs[k]);
  CHECK(z.J >= c.J);
}

TEST_CASE("doubling replications stays within three standard errors") {
  const auto game = fixture::one_third();
  const auto s = build_scaling(game.params, 100.0);
  EstimateOptions o;
  o.replications = 400;
  const auto a = estimate_cost(game, s, policy_spec::Cmu{}, kExp1, o);
  o.replications = 800;
  const auto b = estimate_cost(game, s, policy_spec::Cmu{}, kExp1, o);
  CHECK(std::abs(a.J - b.J) <= 3.0 * std::max(a.se, b.se));
}

TEST_CASE("sweep with trivial costs is identically zero") {
  const auto game = fixture::zero_cost();
  SweepOptions o;
  o.n_list = {16.0, 64.0};
  o.estimate.replications = 10;
  const auto r = convergence_sweep(game, policy_spec::Cmu{}, kExp1, o);
  CHECK(r.V == 0.0);
  REQUIRE(r.rows.size() == 2);
  for (const auto& row : r.rows) {
    CHECK(row.estimate.J == 0.0);
    CHECK(row.gap == 0.0);
  }
  std::ostringstream csv;
  write_sweep_csv(csv, r);
  CHECK(csv.str().rfind("n,bn,N,J,se,ess,V,gap\n", 0) == 0);
}

TEST_CASE("fewer than two replications is rejected") {
  const auto game = fixture::one_third();
  const auto s = build_scaling(game.params, 100.0);
  EstimateOptions o;
  o.replications = 1;
  CHECK_THROWS_AS(estimate_cost(game, s, policy_spec::Cmu{}, kExp1, o), InvalidArgument);
}
