#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mdq/errors.hpp"
#include "mdq/game.hpp"
#include "mdq/paths.hpp"
#include "mdq/policies.hpp"
#include "mdq/rate.hpp"
#include "mdq/riskcost.hpp"
#include "mdq/scaling.hpp"

namespace py = pybind11;
using namespace mdq;

namespace {

using Rows = std::vector<std::vector<double>>;

// rows[k] holds the d values at node k of a uniform grid on [0, horizon]
SampledPath to_path(const Rows& rows, double horizon) {
  if (rows.size() < 2) throw InvalidArgument("a path needs at least two nodes");
  const auto dim = rows.front().size();
  std::vector<double> flat;
  flat.reserve(rows.size() * dim);
  for (const auto& r : rows) {
    if (r.size() != dim) throw InvalidArgument("all rows must have the same length");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return SampledPath(TimeGrid(horizon, static_cast<int>(rows.size()) - 1), static_cast<int>(dim), std::move(flat));
}

SampledPath to_scalar(const std::vector<double>& v, double horizon) {
  if (v.size() < 2) throw InvalidArgument("a path needs at least two nodes");
  return SampledPath::scalar(TimeGrid(horizon, static_cast<int>(v.size()) - 1), v);
}

std::vector<double> column(const SampledPath& p) { return p.column(0); }

Rows to_rows(const SampledPath& p) {
  Rows out(static_cast<std::size_t>(p.nodes()));
  for (int k = 0; k < p.nodes(); ++k) {
    const auto r = p.row(k);
    out[static_cast<std::size_t>(k)].assign(r.begin(), r.end());
  }
  return out;
}

ClassParams make_params(std::vector<double> lambda, std::vector<double> mu, std::vector<double> sigma2,
                        std::optional<std::vector<double>> lambda_tilde, std::optional<std::vector<double>> mu_tilde) {
  const auto I = lambda.size();
  ClassParams p{std::move(lambda), std::move(mu), std::move(sigma2),
                lambda_tilde.value_or(std::vector<double>(I, 0.0)), mu_tilde.value_or(std::vector<double>(I, 0.0))};
  p.validate();
  return p;
}

GameSpec make_game(const ClassParams& params, std::vector<double> x, std::vector<double> c, std::vector<double> d,
                   double horizon) {
  GameSpec g;
  g.params = params;
  g.x = std::move(x);
  g.horizon = horizon;
  g.costs = CostFunctions::linear(std::move(c), std::move(d));
  g.curve = min_curve_linear(g.costs, g.params);
  g.validate();
  return g;
}

PolicySpec policy_from_name(const std::string& name) {
  if (name == "cmu") return policy_spec::Cmu{};
  if (name == "tracking") return policy_spec::Tracking{};
  if (name == "zero") return policy_spec::Zero{};
  if (name == "nonidling") return policy_spec::NonIdlingSingle{};
  throw InvalidArgument("unknown policy '" + name + "' (expected cmu, tracking, zero or nonidling)");
}

py::dict estimate_dict(const CostEstimate& e) {
  py::dict d;
  d["J"] = e.J;
  d["se"] = e.se;
  d["ess"] = e.ess;
  d["replications"] = e.replications;
  d["mean_payoff"] = e.mean_payoff;
  if (!e.payoffs.empty()) d["payoffs"] = e.payoffs;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Moderate-deviation laboratory for many-server queues";

  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);
  py::register_exception<InfeasibleAllocation>(m, "InfeasibleAllocation", PyExc_RuntimeError);

  m.def(
      "reflect", [](const std::vector<double>& v) { return skorokhod_reflect(std::span<const double>(v)); },
      py::arg("values"), "One-dimensional Skorokhod reflection of a path given by its node values.");

  m.def(
      "drift_reflect",
      [](double x0, double y, double kappa, const std::vector<double>& psi1, const std::vector<double>& psi2,
         double horizon) {
        return column(drift_reflect_ode(x0, y, kappa, to_scalar(psi1, horizon), to_scalar(psi2, horizon)));
      },
      py::arg("x0"), py::arg("y"), py::arg("kappa"), py::arg("psi1"), py::arg("psi2"), py::arg("horizon") = 1.0,
      "Solution of xi = x0 + y t - kappa int xi^+ + psi1 - psi2 at the grid nodes.");

  py::class_<ClassParams>(m, "ClassParams")
      .def(py::init(&make_params), py::arg("lambda_"), py::arg("mu"), py::arg("sigma2"),
           py::arg("lambda_tilde") = py::none(), py::arg("mu_tilde") = py::none())
      .def_readonly("lambda_", &ClassParams::lambda)
      .def_readonly("mu", &ClassParams::mu)
      .def_readonly("sigma2", &ClassParams::sigma2)
      .def_property_readonly("rho", &ClassParams::rho_vector)
      .def_property_readonly("theta", &ClassParams::theta_vector)
      .def_property_readonly("y", &ClassParams::y_vector);

  m.def(
      "action_arrivals",
      [](const Rows& psi, const ClassParams& p, double horizon) { return action_arrivals(to_path(psi, horizon), p); },
      py::arg("psi"), py::arg("params"), py::arg("horizon") = 1.0);
  m.def(
      "action_services",
      [](const Rows& psi, const ClassParams& p, double horizon) { return action_services(to_path(psi, horizon), p); },
      py::arg("psi"), py::arg("params"), py::arg("horizon") = 1.0);

  m.def(
      "min_split_rate",
      [](double mdot, double a, double b) {
        const auto s = min_split_rate(mdot, a, b);
        return py::make_tuple(s.u, s.v, s.cost);
      },
      py::arg("mdot"), py::arg("a"), py::arg("b"), "Returns (u, v, cost) minimizing u^2/(2a) + v^2/(2b) with u - v = mdot.");

  m.def(
      "single_class_rate",
      [](const std::vector<double>& target, double lambda, double mu, double sigma2, double r, double x,
         const std::string& regime, double horizon) {
        if (regime != "ode" && regime != "reflected") throw InvalidArgument("regime must be 'ode' or 'reflected'");
        SingleClassParams p{lambda, mu, sigma2, r, x};
        return single_class_rate(to_scalar(target, horizon), p,
                                 regime == "ode" ? RateRegime::ode : RateRegime::reflected);
      },
      py::arg("target"), py::arg("lambda_"), py::arg("mu"), py::arg("sigma2"), py::arg("r"), py::arg("x"),
      py::arg("regime") = "reflected", py::arg("horizon") = 1.0);

  py::class_<GameSpec>(m, "Game")
      .def(py::init(&make_game), py::arg("params"), py::arg("x"), py::arg("c"), py::arg("d"), py::arg("horizon") = 1.0,
           "Game with linear running cost c.x and terminal cost d.x.")
      .def_readonly("params", &GameSpec::params)
      .def_readonly("x", &GameSpec::x)
      .def_readonly("horizon", &GameSpec::horizon);

  m.def(
      "solve_value",
      [](const GameSpec& g, int steps) {
        SolveOptions o;
        o.steps_K = steps;
        const auto r = solve_value(g, o);
        py::dict d;
        d["value"] = r.value;
        d["argmax"] = column(r.argmax);
        d["w0"] = r.reduced.w0;
        d["drift"] = r.reduced.drift;
        d["sigma_bar_sq"] = r.reduced.sigma_bar_sq;
        return d;
      },
      py::arg("game"), py::arg("steps") = 200);

  m.def(
      "minimizing_strategy",
      [](const GameSpec& g, const Rows& psi1, const Rows& psi2) {
        const auto out = strategy_zeta(g, to_path(psi1, g.horizon), to_path(psi2, g.horizon));
        return py::make_tuple(to_rows(out.zeta), to_rows(out.phi));
      },
      py::arg("game"), py::arg("psi1"), py::arg("psi2"), "Returns (zeta, phi) as per-node rows.");

  m.def(
      "cmu_priority",
      [](const std::vector<long long>& X, long long servers, const std::vector<int>& order) {
        return cmu_priority(X, servers, order);
      },
      py::arg("X"), py::arg("servers"), py::arg("order") = std::vector<int>{});

  m.def(
      "log_mean_exp", [](const std::vector<double>& z, double scale) { return log_mean_exp(z, scale); }, py::arg("z"),
      py::arg("scale"));

  m.def(
      "estimate_cost",
      [](const GameSpec& g, double n, const std::string& policy, std::size_t replications, std::uint64_t seed,
         double bn_power, unsigned threads, bool keep_payoffs) {
        const auto scheme = build_scaling(g.params, n, BnRule::power(bn_power));
        const std::vector<InterArrivalFamily> fam(static_cast<std::size_t>(g.classes()),
                                                  InterArrivalFamily::exponential());
        EstimateOptions o;
        o.replications = replications;
        o.master_seed = seed;
        o.threads = threads;
        o.keep_payoffs = keep_payoffs;
        py::gil_scoped_release release;
        auto est = estimate_cost(g, scheme, policy_from_name(policy), fam, o);
        py::gil_scoped_acquire acquire;
        auto d = estimate_dict(est);
        d["bn"] = scheme.bn;
        d["servers"] = scheme.servers;
        return d;
      },
      py::arg("game"), py::arg("n"), py::arg("policy") = "cmu", py::arg("replications") = 1000, py::arg("seed") = 1,
      py::arg("bn_power") = 0.25, py::arg("threads") = 1, py::arg("keep_payoffs") = false,
      "Risk-sensitive cost estimate with exponential inter-arrival times.");
}
