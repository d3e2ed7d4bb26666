#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "cwalk/collapse.hpp"
#include "cwalk/scenario.hpp"
#include "cwalk/sequencer.hpp"
#include "cwalk/tolerances.hpp"

namespace cwalk {

struct OutputConfig {
  std::string dir = "out";
  bool traces = false;
};

struct ScaleConfig {
  double particles_low = 1e10;
  double particles_high = 1e11;
  double safety_low = 10.0;
  double safety_high = 100.0;
  double grw_lambda = 1e-16;
  double grw_collapse_time_s = 0.01;
};

struct ExperimentConfig {
  ScenarioSpec scenario;
  ShiftParams shift;
  uint64_t trials = 1;
  uint64_t master_seed = 0;
  bool seed_given = false;  // run refuses to proceed without an explicit seed
  ExtensionPolicy sequencer_policy = ExtensionPolicy::kUniformExtension;
  int parallelism = 0;  // 0 = COLLAPSE_WALK_THREADS env or hardware default
  OutputConfig output;
  double sigma_factor = kSigmaFactor;
  ScaleConfig scale;

  // Full validation including the scenario; throws ValidationError.
  void validate(bool require_seed) const;
};

// Throws ValidationError on malformed JSON or invalid values.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

// Canonical JSON echo of the parsed config (alphabetical keys, defaults
// materialized) for embedding in reports.
nlohmann::json config_to_json(const ExperimentConfig& cfg);

}  // namespace cwalk
