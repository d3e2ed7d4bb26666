#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "cwalk/config.hpp"
#include "cwalk/scenario.hpp"

namespace cwalk {

struct TrialSummary {
  uint64_t trial = 0;
  int outcome = -1;  // index into the scenario's branches; -1 = no absorption
  uint64_t steps = 0;
  uint64_t clamps = 0;
  double final_p = 0.0;  // walked density when the trial ended
  double metric = 0.0;   // kind-specific per-trial quantity (see report)
};

struct RunResult {
  nlohmann::json report;
  std::vector<TrialSummary> summaries;
  bool check_pass = true;
  double wall_time_s = 0.0;
};

// Thread count: COLLAPSE_WALK_THREADS env wins, then the config value,
// then hardware concurrency. Always >= 1.
int resolve_parallelism(int configured);

// One trial of the compiled scenario. Exposed so tests can pin the scalar
// fast paths against the generic engine.
TrialSummary run_one_trial(const Scenario& scenario, const ExperimentConfig& cfg,
                           uint64_t trial);

// Runs cfg.trials trials in parallel with per-trial RNG streams; results are
// accumulated in trial order, so the report does not depend on the thread
// count. With check, tolerance verdicts are added and check_pass is set.
RunResult run_experiment(const ExperimentConfig& cfg, bool check);

// report.json, summary.csv, and (if enabled) traces.jsonl under cfg.output.dir.
void write_artifacts(const RunResult& result, const ExperimentConfig& cfg);

// Closed-form numbers for the configured scenario plus the scale-estimate
// chain; no trials are run.
nlohmann::json predict_report(const ExperimentConfig& cfg);

// Extension-sampling frequencies against exact enumeration and, for bell-epr,
// outcome homogeneity across wing orders with matched per-trial draws.
nlohmann::json sequence_test_report(const ExperimentConfig& cfg);

// CSV rows (rule, k, state_id, basis_id, gap) for the candidate-rule
// witnesses and the
// power-law grid; also returns a JSON summary.
nlohmann::json signal_scan_report(uint64_t n_states, uint64_t seed,
                                  std::vector<std::string>* csv_lines);

}  // namespace cwalk
