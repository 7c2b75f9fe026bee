#include "mdq/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "mdq/config.hpp"
#include "mdq/errors.hpp"
#include "mdq/game.hpp"
#include "mdq/paths.hpp"
#include "mdq/policies.hpp"
#include "mdq/rate.hpp"
#include "mdq/riskcost.hpp"
#include "mdq/sim.hpp"

namespace mdq::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed_override;
};

ExperimentConfig load(const Common& c) {
  if (c.config.empty()) throw ConfigError("--config is required for this command");
  return load_config(c.config);
}

fs::path output_dir(const Common& c, const ExperimentConfig& cfg) {
  fs::path dir = !c.out.empty() ? fs::path(c.out) : cfg.output_dir.value_or(fs::path("mdq_out"));
  fs::create_directories(dir);
  return dir;
}

const GameSpec& need_game(const ExperimentConfig& cfg) {
  if (!cfg.game) throw ConfigError("config: this command needs params and game sections");
  return *cfg.game;
}

const ScalingSection& need_scaling(const ExperimentConfig& cfg) {
  if (!cfg.scaling) throw ConfigError("config: this command needs a scaling section");
  return *cfg.scaling;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << j.dump(2) << "\n";
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path.string());
  return f;
}

json estimate_json(const CostEstimate& e) {
  return {{"J", e.J}, {"se", e.se}, {"ess", e.ess}, {"replications", e.replications}, {"mean_payoff", e.mean_payoff}};
}

// --------------------------------------------------------------------------

int cmd_reflect(const std::string& input, const std::string& out_path, std::ostream& out) {
  std::ifstream in(input);
  if (!in) throw ConfigError("cannot open " + input);
  const SampledPath path = read_csv(in);
  if (path.dim() != 1) throw ConfigError(input + ": reflect expects a single value column");
  const SampledPath reflected = skorokhod_reflect(path);
  if (out_path.empty()) {
    write_csv(out, reflected);
  } else {
    auto f = open_out(out_path);
    write_csv(f, reflected);
  }
  return kExitOk;
}

int cmd_rate(const Common& c, std::ostream& out) {
  const ExperimentConfig cfg = load(c);
  if (!cfg.rate) throw ConfigError("config: rate command needs a rate section");
  std::ifstream in(cfg.rate->input);
  const SampledPath target = read_csv(in);
  if (target.dim() != 1) throw ConfigError("rate: target CSV must have one value column");
  const double value = single_class_rate(target, cfg.rate->params, cfg.rate->regime);
  json j = {{"rate", std::isfinite(value) ? json(value) : json("inf")},
            {"regime", cfg.rate->regime == RateRegime::ode ? "ode" : "reflected"},
            {"config_hash", cfg.hash}};
  out << j.dump(2) << "\n";
  return kExitOk;
}

int cmd_game_solve(const Common& c, bool brute, std::ostream& out) {
  const ExperimentConfig cfg = load(c);
  const GameSpec& game = need_game(cfg);
  SolveOptions opts = cfg.solve;
  if (c.seed_override) opts.seed = *c.seed_override;
  const SolveResult res = solve_value(game, opts);
  const fs::path dir = output_dir(c, cfg);
  const fs::path csv = dir / "argmax.csv";
  {
    auto f = open_out(csv);
    write_csv(f, res.argmax);
  }
  json j = {{"V", res.value},
            {"sigma_bar_sq", res.reduced.sigma_bar_sq},
            {"w0", res.reduced.w0},
            {"drift", res.reduced.drift},
            {"start_values", res.start_values},
            {"argmax_csv_path", csv.string()},
            {"config_hash", cfg.hash}};
  if (brute || cfg.brute_force) {
    const double b = brute_force_value(game, cfg.brute);
    j["brute_force_V"] = b;
    j["brute_force_gap"] = res.value - b;
  }
  write_json(dir / "game_solve.json", j);
  out << j.dump(2) << "\n";
  return kExitOk;
}

int cmd_sim_run(const Common& c, std::ostream& out) {
  const ExperimentConfig cfg = load(c);
  const GameSpec& game = need_game(cfg);
  const ScalingSection& sc = need_scaling(cfg);
  if (!cfg.policy) throw ConfigError("config: sim-run needs a policy section");
  const ScalingScheme scheme = build_scaling(game.params, sc.n, sc.bn_rule, sc.n_rule);
  const InitialState init = initial_state(scheme, game.x);
  SimOptions opts;
  opts.horizon = game.horizon;
  opts.seed = c.seed_override.value_or(cfg.sim.seed);
  opts.X0 = cfg.sim.X0.value_or(init.X0);
  if (static_cast<int>(opts.X0.size()) != scheme.classes()) throw ConfigError("config: sim.X0 needs one entry per class");

  auto policy = make_policy(*cfg.policy, game, scheme);
  const EventTrace trace = simulate(scheme, cfg.families, *policy, opts);
  const fs::path dir = output_dir(c, cfg);
  {
    auto f = open_out(dir / "trace.csv");
    write_trace_csv(f, trace);
  }
  json j = {{"policy", policy->name()},
            {"n", scheme.n},
            {"bn", scheme.bn},
            {"N", scheme.servers},
            {"seed", opts.seed},
            {"X0", opts.X0},
            {"initial_discrepancy", init.max_discrepancy},
            {"events", trace.size()},
            {"arrivals", trace.count(EventKind::arrival)},
            {"departures", trace.count(EventKind::departure)},
            {"reallocations", trace.count(EventKind::reallocation)},
            {"payoff_X", payoff(trace, scheme, game.costs, PayoffTarget::X)},
            {"payoff_Q", payoff(trace, scheme, game.costs, PayoffTarget::Q)},
            {"conservation_ok", check_conservation(trace, scheme).ok()},
            {"regime_warnings", scheme.regime.warnings},
            {"trace_csv_path", (dir / "trace.csv").string()},
            {"config_hash", cfg.hash}};
  if (const auto* tracking = dynamic_cast<const TrackingPolicy*>(policy.get())) {
    auto f = open_out(dir / "tracking_audit.csv");
    tracking->write_audit_csv(f);
    j["tracking_audit_csv_path"] = (dir / "tracking_audit.csv").string();
  }
  write_json(dir / "sim_run.json", j);
  out << j.dump(2) << "\n";
  return kExitOk;
}

EstimateOptions estimate_options(const EstimateSection& s, const Common& c) {
  EstimateOptions e;
  e.replications = s.replications;
  e.master_seed = c.seed_override.value_or(s.seed);
  e.threads = s.threads;
  e.target = s.target;
  return e;
}

int cmd_cost_sweep(const Common& c, std::ostream& out) {
  const ExperimentConfig cfg = load(c);
  const GameSpec& game = need_game(cfg);
  if (!cfg.sweep) throw ConfigError("config: cost-sweep needs a sweep section with an n list");
  if (!cfg.policy) throw ConfigError("config: cost-sweep needs a policy section");
  SweepOptions opts;
  opts.n_list = cfg.sweep->n_list;
  if (cfg.scaling) {
    opts.bn_rule = cfg.scaling->bn_rule;
    opts.n_rule = cfg.scaling->n_rule;
  }
  opts.estimate = estimate_options(*cfg.sweep, c);
  opts.solve = cfg.solve;
  const SweepResult res = convergence_sweep(game, *cfg.policy, cfg.families, opts);
  const fs::path dir = output_dir(c, cfg);
  {
    auto f = open_out(dir / "sweep.csv");
    write_sweep_csv(f, res);
  }
  json rows = json::array();
  for (const auto& r : res.rows) {
    json row = estimate_json(r.estimate);
    row["n"] = r.n;
    row["bn"] = r.bn;
    row["N"] = r.servers;
    row["V"] = r.V;
    row["gap"] = r.gap;
    rows.push_back(row);
  }
  json j = {{"instance_hash", cfg.hash},
            {"policy", policy_name(*cfg.policy)},
            {"V", res.V},
            {"rows", rows},
            {"warnings", res.warnings},
            {"sweep_csv_path", (dir / "sweep.csv").string()}};
  write_json(dir / "sweep.json", j);
  out << j.dump(2) << "\n";
  return kExitOk;
}

int cmd_policy_compare(const Common& c, std::ostream& out) {
  const ExperimentConfig cfg = load(c);
  const GameSpec& game = need_game(cfg);
  if (!cfg.compare) throw ConfigError("config: policy-compare needs a compare section");
  const BnRule bn = cfg.scaling ? cfg.scaling->bn_rule : BnRule{};
  const NnRule nn = cfg.scaling ? cfg.scaling->n_rule : NnRule{};
  const ScalingScheme scheme = build_scaling(game.params, cfg.compare->n, bn, nn);
  const EstimateOptions opts = estimate_options(*cfg.compare, c);
  const fs::path dir = output_dir(c, cfg);
  auto csv = open_out(dir / "compare.csv");
  csv.precision(10);
  csv << "policy,J,se,ess\n";
  json rows = json::array();
  for (const auto& p : cfg.compare->policies) {
    const CostEstimate e = estimate_cost(game, scheme, p, cfg.families, opts);
    csv << policy_name(p) << "," << e.J << "," << e.se << "," << e.ess << "\n";
    json row = estimate_json(e);
    row["policy"] = policy_name(p);
    rows.push_back(row);
  }
  json j = {{"instance_hash", cfg.hash}, {"n", scheme.n},       {"bn", scheme.bn},
            {"N", scheme.servers},       {"rows", rows},        {"compare_csv_path", (dir / "compare.csv").string()}};
  write_json(dir / "compare.json", j);
  out << j.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"mdq: moderate-deviation laboratory for many-server queues"};
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* sub, bool with_out = true) {
    sub->add_option("--config", common.config, "experiment JSON file");
    sub->add_option("--seed-override", common.seed_override, "replace the master seed from the config");
    if (with_out) sub->add_option("--out", common.out, "output directory");
  };

  std::string reflect_input, reflect_out;
  auto* reflect = app.add_subcommand("reflect", "apply the Skorokhod map to a CSV path");
  reflect->add_option("input", reflect_input, "input CSV (t,v1)")->required();
  reflect->add_option("--out", reflect_out, "output CSV (stdout if omitted)");

  auto* rate = app.add_subcommand("rate", "single-class rate of a target path");
  add_common(rate, false);

  bool brute = false;
  auto* solve = app.add_subcommand("game-solve", "compute the game value V(x)");
  add_common(solve);
  solve->add_flag("--brute-force", brute, "cross-check against the full-dimensional oracle");

  auto* sim = app.add_subcommand("sim-run", "simulate one replication and dump the trace");
  add_common(sim);
  auto* sweep = app.add_subcommand("cost-sweep", "risk-sensitive cost across n");
  add_common(sweep);
  auto* compare = app.add_subcommand("policy-compare", "risk-sensitive cost of several policies at one n");
  add_common(compare);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "mdq: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (reflect->parsed()) return cmd_reflect(reflect_input, reflect_out, out);
    if (rate->parsed()) return cmd_rate(common, out);
    if (solve->parsed()) return cmd_game_solve(common, brute, out);
    if (sim->parsed()) return cmd_sim_run(common, out);
    if (sweep->parsed()) return cmd_cost_sweep(common, out);
    if (compare->parsed()) return cmd_policy_compare(common, out);
  } catch (const ConfigError& e) {
    err << "mdq: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InvalidArgument& e) {
    err << "mdq: invalid input: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InfeasibleAllocation& e) {
    err << "mdq: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const NumericalError& e) {
    err << "mdq: numerical diagnostic: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const fs::filesystem_error& e) {
    err << "mdq: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace mdq::cli
