#include "mdq/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "mdq/errors.hpp"

namespace mdq {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError("config: " + where + ": " + what);
}

void only_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  for (const auto& item : j.items()) {
    const bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return item.key() == k; });
    if (!ok) fail(where, "unknown key '" + item.key() + "'");
  }
}

const json& need(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) fail(where, std::string("missing key '") + key + "'");
  return j.at(key);
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

double number_or(const json& j, const char* key, double fallback, const std::string& where) {
  return j.contains(key) ? number(j.at(key), where + "." + key) : fallback;
}

std::uint64_t seed_value(const json& j, const std::string& where) {
  if (!j.is_number_integer() || j.get<long long>() < 0) fail(where, "expected a nonnegative integer");
  return j.get<std::uint64_t>();
}

long long integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<long long>();
}

std::string text(const json& j, const std::string& where) {
  if (!j.is_string()) fail(where, "expected a string");
  return j.get<std::string>();
}

std::vector<double> numbers(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(number(j[k], where + "[" + std::to_string(k) + "]"));
  return out;
}

std::vector<long long> integers(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of integers");
  std::vector<long long> out;
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(integer(j[k], where + "[" + std::to_string(k) + "]"));
  return out;
}

ClassParams parse_params(const json& j) {
  const std::string where = "params";
  only_keys(j, {"lambda", "mu", "sigma2", "lambda_tilde", "mu_tilde"}, where);
  ClassParams p;
  p.lambda = numbers(need(j, "lambda", where), where + ".lambda");
  p.mu = numbers(need(j, "mu", where), where + ".mu");
  p.sigma2 = numbers(need(j, "sigma2", where), where + ".sigma2");
  const std::size_t n = p.lambda.size();
  p.lambda_tilde = j.contains("lambda_tilde") ? numbers(j.at("lambda_tilde"), where + ".lambda_tilde")
                                              : std::vector<double>(n, 0.0);
  p.mu_tilde = j.contains("mu_tilde") ? numbers(j.at("mu_tilde"), where + ".mu_tilde") : std::vector<double>(n, 0.0);
  try {
    p.validate();
  } catch (const InvalidArgument& e) {
    fail(where, e.what());
  }
  return p;
}

CostFunctions parse_costs(const json& j) {
  const std::string where = "game.costs";
  only_keys(j, {"kind", "c", "d"}, where);
  const std::string kind = text(need(j, "kind", where), where + ".kind");
  auto c = numbers(need(j, "c", where), where + ".c");
  auto d = numbers(need(j, "d", where), where + ".d");
  try {
    if (kind == "linear") return CostFunctions::linear(std::move(c), std::move(d));
    if (kind == "max_linear") return CostFunctions::max_linear(std::move(c), std::move(d));
  } catch (const InvalidArgument& e) {
    fail(where, e.what());
  }
  fail(where + ".kind", "expected 'linear' or 'max_linear', got '" + kind + "'");
}

MinCurve parse_curve(const json& j, const CostFunctions& costs, const ClassParams& params) {
  const std::string where = "game.curve";
  only_keys(j, {"kind", "index", "w_max", "points"}, where);
  const std::string kind = text(need(j, "kind", where), where + ".kind");
  try {
    if (kind == "linear") {
      if (j.contains("index")) {
        const long long i = integer(j.at("index"), where + ".index") - 1;
        if (i < 0 || i >= params.classes()) fail(where + ".index", "class index out of range");
        return MinCurve::linear(params.classes(), static_cast<int>(i), params.mu[static_cast<std::size_t>(i)]);
      }
      return min_curve_linear(costs, params);
    }
    if (kind == "numeric") {
      const double w_max = number_or(j, "w_max", 8.0, where);
      const long long points = j.contains("points") ? integer(j.at("points"), where + ".points") : 33;
      if (w_max <= 0.0 || points < 2) fail(where, "need w_max > 0 and points >= 2");
      std::vector<double> w;
      for (long long k = 0; k < points; ++k) w.push_back(w_max * static_cast<double>(k) / static_cast<double>(points - 1));
      return min_curve_numeric(costs, params, w);
    }
  } catch (const InvalidArgument& e) {
    fail(where, e.what());
  }
  fail(where + ".kind", "expected 'linear' or 'numeric', got '" + kind + "'");
}

GameSpec parse_game(const json& j, const ClassParams& params) {
  const std::string where = "game";
  only_keys(j, {"x", "T", "costs", "curve"}, where);
  GameSpec g;
  g.params = params;
  g.x = numbers(need(j, "x", where), where + ".x");
  g.horizon = number(need(j, "T", where), where + ".T");
  g.costs = parse_costs(need(j, "costs", where));
  g.curve = j.contains("curve") ? parse_curve(j.at("curve"), g.costs, params)
                                : parse_curve(json{{"kind", "linear"}}, g.costs, params);
  try {
    g.validate();
    g.costs.spot_check(g.classes());
  } catch (const InvalidArgument& e) {
    fail(where, e.what());
  }
  return g;
}

void parse_solver(const json& j, ExperimentConfig& cfg) {
  const std::string where = "solver";
  only_keys(j, {"K", "restarts", "ascent_steps", "step_scale", "seed", "max_slope", "brute_force", "brute_K",
                "brute_restarts", "brute_ascent_steps"},
            where);
  if (j.contains("K")) cfg.solve.steps_K = static_cast<int>(integer(j.at("K"), where + ".K"));
  if (j.contains("restarts")) cfg.solve.restarts = static_cast<int>(integer(j.at("restarts"), where + ".restarts"));
  if (j.contains("ascent_steps"))
    cfg.solve.ascent_steps = static_cast<int>(integer(j.at("ascent_steps"), where + ".ascent_steps"));
  cfg.solve.step_scale = number_or(j, "step_scale", cfg.solve.step_scale, where);
  if (j.contains("seed")) cfg.solve.seed = seed_value(j.at("seed"), where + ".seed");
  if (j.contains("max_slope")) cfg.solve.max_slope = number(j.at("max_slope"), where + ".max_slope");
  if (j.contains("brute_force")) {
    if (!j.at("brute_force").is_boolean()) fail(where + ".brute_force", "expected a boolean");
    cfg.brute_force = j.at("brute_force").get<bool>();
  }
  if (j.contains("brute_K")) cfg.brute.steps_K = static_cast<int>(integer(j.at("brute_K"), where + ".brute_K"));
  if (j.contains("brute_restarts"))
    cfg.brute.restarts = static_cast<int>(integer(j.at("brute_restarts"), where + ".brute_restarts"));
  if (j.contains("brute_ascent_steps"))
    cfg.brute.ascent_steps = static_cast<int>(integer(j.at("brute_ascent_steps"), where + ".brute_ascent_steps"));
  if (cfg.solve.steps_K < 16) fail(where + ".K", "must be >= 16");
  if (cfg.solve.restarts < 1 || cfg.solve.ascent_steps < 1) fail(where, "restarts and ascent_steps must be >= 1");
}

ScalingSection parse_scaling(const json& j) {
  const std::string where = "scaling";
  only_keys(j, {"n", "bn", "N"}, where);
  ScalingSection s;
  s.n = number_or(j, "n", s.n, where);
  if (j.contains("bn")) {
    const json& b = j.at("bn");
    only_keys(b, {"rule", "p"}, where + ".bn");
    const std::string rule = text(need(b, "rule", where + ".bn"), where + ".bn.rule");
    if (rule == "power")
      s.bn_rule = BnRule::power(number_or(b, "p", 0.25, where + ".bn"));
    else if (rule == "log")
      s.bn_rule = BnRule::log();
    else
      fail(where + ".bn.rule", "expected 'power' or 'log'");
  }
  if (j.contains("N")) {
    const json& b = j.at("N");
    only_keys(b, {"rule", "q", "fraction"}, where + ".N");
    const std::string rule = text(need(b, "rule", where + ".N"), where + ".N.rule");
    if (rule == "power")
      s.n_rule = NnRule::power(number_or(b, "q", 0.5, where + ".N"));
    else if (rule == "fixed_fraction")
      s.n_rule = NnRule::fixed_fraction(number(need(b, "fraction", where + ".N"), where + ".N.fraction"));
    else
      fail(where + ".N.rule", "expected 'power' or 'fixed_fraction'");
  }
  return s;
}

InterArrivalFamily parse_family(const json& j, const std::string& where) {
  if (j.is_string()) return parse_family(json{{"kind", j}}, where);
  only_keys(j, {"kind", "k", "p", "m1", "m2"}, where);
  const std::string kind = text(need(j, "kind", where), where + ".kind");
  try {
    if (kind == "exponential") return InterArrivalFamily::exponential();
    if (kind == "deterministic") return InterArrivalFamily::deterministic();
    if (kind == "erlang") return InterArrivalFamily::erlang(static_cast<int>(integer(need(j, "k", where), where + ".k")));
    if (kind == "hyperexponential")
      return InterArrivalFamily::hyperexponential(number(need(j, "p", where), where + ".p"),
                                                  number(need(j, "m1", where), where + ".m1"),
                                                  number(need(j, "m2", where), where + ".m2"));
  } catch (const InvalidArgument& e) {
    fail(where, e.what());
  }
  fail(where + ".kind", "unknown inter-arrival family '" + kind + "'");
}

PolicySpec parse_policy(const json& j, const std::string& where) {
  if (j.is_string()) return parse_policy(json{{"kind", j}}, where);
  only_keys(j, {"kind", "order", "delta", "v", "alpha_n", "allocation"}, where);
  const std::string kind = text(need(j, "kind", where), where + ".kind");
  if (kind == "cmu") {
    policy_spec::Cmu c;
    if (j.contains("order"))
      for (long long i : integers(j.at("order"), where + ".order")) c.order.push_back(static_cast<int>(i - 1));
    return c;
  }
  if (kind == "tracking") {
    policy_spec::Tracking t;
    t.config.delta = number_or(j, "delta", t.config.delta, where);
    if (j.contains("v")) t.config.v = number(j.at("v"), where + ".v");
    if (j.contains("alpha_n")) t.config.alpha_n = number(j.at("alpha_n"), where + ".alpha_n");
    return t;
  }
  if (kind == "zero") return policy_spec::Zero{};
  if (kind == "nonidling") return policy_spec::NonIdlingSingle{};
  if (kind == "fixed") return policy_spec::Fixed{integers(need(j, "allocation", where), where + ".allocation")};
  fail(where + ".kind", "expected cmu, tracking, zero, nonidling or fixed, got '" + kind + "'");
}

PayoffTarget parse_target(const json& j, const std::string& where) {
  const std::string t = text(j, where);
  if (t == "X") return PayoffTarget::X;
  if (t == "Q") return PayoffTarget::Q;
  fail(where, "expected 'X' or 'Q'");
}

EstimateSection parse_estimate(const json& j, const std::string& where, bool sweep) {
  if (sweep)
    only_keys(j, {"n", "replications", "seed", "threads", "target"}, where);
  else
    only_keys(j, {"n", "replications", "seed", "threads", "target", "policies"}, where);
  EstimateSection s;
  if (sweep) {
    s.n_list = numbers(need(j, "n", where), where + ".n");
    if (s.n_list.empty()) fail(where + ".n", "n list must not be empty");
  } else {
    s.n = number_or(j, "n", s.n, where);
    const json& list = need(j, "policies", where);
    if (!list.is_array() || list.empty()) fail(where + ".policies", "expected a nonempty array");
    for (std::size_t k = 0; k < list.size(); ++k)
      s.policies.push_back(parse_policy(list[k], where + ".policies[" + std::to_string(k) + "]"));
  }
  if (j.contains("replications")) {
    const long long r = integer(j.at("replications"), where + ".replications");
    if (r < 2) fail(where + ".replications", "must be >= 2");
    s.replications = static_cast<std::size_t>(r);
  }
  if (j.contains("seed")) s.seed = seed_value(j.at("seed"), where + ".seed");
  if (j.contains("threads")) s.threads = static_cast<unsigned>(std::max(1LL, integer(j.at("threads"), where + ".threads")));
  if (j.contains("target")) s.target = parse_target(j.at("target"), where + ".target");
  return s;
}

RateSection parse_rate(const json& j, const std::filesystem::path& base) {
  const std::string where = "rate";
  only_keys(j, {"input", "lambda", "mu", "sigma2", "r", "x", "regime"}, where);
  RateSection r;
  r.input = base / text(need(j, "input", where), where + ".input");
  if (!std::filesystem::exists(r.input)) fail(where + ".input", "file not found: " + r.input.string());
  r.params.lambda = number_or(j, "lambda", 1.0, where);
  r.params.mu = number_or(j, "mu", r.params.lambda, where);
  r.params.sigma2 = number_or(j, "sigma2", 1.0, where);
  r.params.r = number_or(j, "r", 0.0, where);
  r.params.x = number_or(j, "x", 0.0, where);
  if (j.contains("regime")) {
    const std::string regime = text(j.at("regime"), where + ".regime");
    if (regime == "ode")
      r.regime = RateRegime::ode;
    else if (regime == "reflected")
      r.regime = RateRegime::reflected;
    else
      fail(where + ".regime", "expected 'ode' or 'reflected'");
  }
  try {
    r.params.validate();
  } catch (const InvalidArgument& e) {
    fail(where, e.what());
  }
  return r;
}

}  // namespace

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentConfig parse_config(const std::string& source, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(source);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  only_keys(j, {"version", "params", "game", "solver", "scaling", "families", "policy", "sim", "sweep", "compare",
                "rate", "output"},
            "top level");
  ExperimentConfig cfg;
  cfg.base_dir = base_dir;
  cfg.hash = fnv1a_hex(j.dump());
  cfg.version = static_cast<int>(integer(need(j, "version", "top level"), "version"));
  if (cfg.version != kConfigVersion)
    fail("version", "unsupported schema version " + std::to_string(cfg.version));

  std::optional<ClassParams> params;
  if (j.contains("params")) params = parse_params(j.at("params"));
  if (j.contains("game")) {
    if (!params) fail("game", "requires a params section");
    cfg.game = parse_game(j.at("game"), *params);
  }
  if (j.contains("solver")) parse_solver(j.at("solver"), cfg);
  if (j.contains("scaling")) cfg.scaling = parse_scaling(j.at("scaling"));
  if (j.contains("families")) {
    const json& f = j.at("families");
    if (!f.is_array()) fail("families", "expected an array with one entry per class");
    for (std::size_t k = 0; k < f.size(); ++k)
      cfg.families.push_back(parse_family(f[k], "families[" + std::to_string(k) + "]"));
  } else if (params) {
    cfg.families.assign(static_cast<std::size_t>(params->classes()), InterArrivalFamily::exponential());
  }
  if (params && static_cast<int>(cfg.families.size()) != params->classes())
    fail("families", "need one entry per class");
  if (j.contains("policy")) cfg.policy = parse_policy(j.at("policy"), "policy");
  if (j.contains("sim")) {
    const json& s = j.at("sim");
    only_keys(s, {"seed", "X0"}, "sim");
    if (s.contains("seed")) cfg.sim.seed = seed_value(s.at("seed"), "sim.seed");
    if (s.contains("X0")) cfg.sim.X0 = integers(s.at("X0"), "sim.X0");
  }
  if (j.contains("sweep")) cfg.sweep = parse_estimate(j.at("sweep"), "sweep", true);
  if (j.contains("compare")) cfg.compare = parse_estimate(j.at("compare"), "compare", false);
  if (j.contains("rate")) cfg.rate = parse_rate(j.at("rate"), base_dir);
  if (j.contains("output")) {
    only_keys(j.at("output"), {"dir"}, "output");
    cfg.output_dir = std::filesystem::path(text(need(j.at("output"), "dir", "output"), "output.dir"));
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

}  // namespace mdq
