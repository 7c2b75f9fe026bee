#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mdq/families.hpp"
#include "mdq/game.hpp"
#include "mdq/policies.hpp"
#include "mdq/rate.hpp"
#include "mdq/riskcost.hpp"
#include "mdq/scaling.hpp"
#include "mdq/sim.hpp"

namespace mdq {

inline constexpr int kConfigVersion = 1;

struct ScalingSection {
  double n = 400.0;
  BnRule bn_rule;
  NnRule n_rule;
};

struct SimSection {
  std::uint64_t seed = 1;
  std::optional<std::vector<long long>> X0;
};

struct EstimateSection {
  std::vector<double> n_list;  // sweep only
  double n = 400.0;            // compare only
  std::size_t replications = 1000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  PayoffTarget target = PayoffTarget::X;
  std::vector<PolicySpec> policies;  // compare only
};

struct RateSection {
  std::filesystem::path input;
  SingleClassParams params;
  RateRegime regime = RateRegime::reflected;
};

/// Parsed experiment file. Sections absent from the file stay empty.
struct ExperimentConfig {
  int version = kConfigVersion;
  std::string hash;  // FNV-1a of the canonical JSON text
  std::filesystem::path base_dir;

  std::optional<GameSpec> game;
  SolveOptions solve;
  bool brute_force = false;
  BruteForceOptions brute;
  std::optional<ScalingSection> scaling;
  std::vector<InterArrivalFamily> families;
  std::optional<PolicySpec> policy;
  SimSection sim;
  std::optional<EstimateSection> sweep;
  std::optional<EstimateSection> compare;
  std::optional<RateSection> rate;
  std::optional<std::filesystem::path> output_dir;
};

/// Throws ConfigError on malformed JSON, unknown keys, missing version,
/// wrong types or missing referenced files.
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = ".");
ExperimentConfig load_config(const std::filesystem::path& path);

std::string fnv1a_hex(const std::string& text);

}  // namespace mdq
