#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cwalk/config.hpp"
#include "cwalk/errors.hpp"
#include "cwalk/oracle.hpp"
#include "cwalk/runner.hpp"
#include "cwalk/sequencer.hpp"
#include "cwalk/version.hpp"

namespace {

// Exit codes: 0 success, 1 invalid input or internal failure, 2 a --check
// tolerance verdict failed.
constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitCheckFailed = 2;

std::complex<double> to_amplitude(const std::vector<double>& parts) {
  if (parts.empty() || parts.size() > 2) {
    throw cwalk::ValidationError("amplitudes take one or two numbers (re [im])");
  }
  return {parts[0], parts.size() > 1 ? parts[1] : 0.0};
}

void print_report(const nlohmann::json& j) { std::cout << j.dump(2) << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"density-shift collapse walks: run, predict, and cross-check"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(cwalk::kVersion));

  // --- run ---------------------------------------------------------------
  auto* run = app.add_subcommand("run", "run trials of a configured scenario");
  std::string run_config;
  uint64_t run_seed = 0;
  uint64_t run_trials = 0;
  std::string run_out;
  bool run_check = false;
  bool run_traces = false;
  run->add_option("--config", run_config, "experiment config JSON")->required();
  auto* run_seed_opt = run->add_option("--seed", run_seed, "override master seed");
  auto* run_trials_opt = run->add_option("--trials", run_trials, "override trial count");
  auto* run_out_opt = run->add_option("--out", run_out, "override output directory");
  run->add_flag("--check", run_check, "verify tolerances; exit 2 on failure");
  run->add_flag("--traces", run_traces, "also write per-trial traces.jsonl");

  // --- predict -----------------------------------------------------------
  auto* predict = app.add_subcommand("predict", "closed-form numbers, no trials");
  std::string predict_config;
  predict->add_option("--config", predict_config, "experiment config JSON")->required();

  // --- oracle ------------------------------------------------------------
  auto* oracle_cmd = app.add_subcommand("oracle", "exact cross-check computations");
  oracle_cmd->require_subcommand(1);

  auto* markov = oracle_cmd->add_subcommand(
      "markov", "absorption probability and expected steps on the walk lattice");
  double markov_p0 = 0.5;
  double markov_d = 0.01;
  markov->add_option("--p0", markov_p0, "starting density")->required();
  markov->add_option("--d", markov_d, "step size")->required();

  auto* extensions = oracle_cmd->add_subcommand(
      "extensions", "enumerate linear extensions of a config's causal order");
  std::string extensions_config;
  extensions->add_option("--config", extensions_config, "experiment config JSON")
      ->required();

  auto* moments = oracle_cmd->add_subcommand(
      "eraser-moments", "exact fixed-step ensemble moments of the deviant density");
  double moments_p0 = 0.5;
  double moments_d = 0.02;
  uint64_t moments_steps = 50;
  moments->add_option("--p0", moments_p0, "starting density")->required();
  moments->add_option("--d", moments_d, "step size")->required();
  moments->add_option("--steps", moments_steps, "number of steps")->required();

  auto* joint = oracle_cmd->add_subcommand(
      "joint-table", "exact joint table of the anti-correlated pair readout");
  std::vector<double> joint_a{1.0 / std::sqrt(2.0)};
  std::vector<double> joint_b{1.0 / std::sqrt(2.0)};
  std::vector<double> joint_gamma{1.0 / std::sqrt(2.0)};
  std::vector<double> joint_delta{1.0 / std::sqrt(2.0)};
  joint->add_option("--a", joint_a, "first pair amplitude (re [im])")
      ->expected(1, 2);
  joint->add_option("--b", joint_b, "second pair amplitude (re [im])")
      ->expected(1, 2);
  joint->add_option("--gamma", joint_gamma, "basis gamma (re [im])")->expected(1, 2);
  joint->add_option("--delta", joint_delta, "basis delta (re [im])")->expected(1, 2);

  // --- signal-scan -------------------------------------------------------
  auto* scan = app.add_subcommand(
      "signal-scan", "marginal-gap witnesses and the power-law uniqueness scan");
  uint64_t scan_states = 200;
  uint64_t scan_seed = 20260822;
  std::string scan_out;
  scan->add_option("--states", scan_states, "random states per power grid point");
  scan->add_option("--seed", scan_seed, "seed for the random-state sample");
  scan->add_option("--out", scan_out, "directory for signal_scan.csv");

  // --- sequence-test -----------------------------------------------------
  auto* seqtest = app.add_subcommand(
      "sequence-test", "extension sampling frequencies and order invariance");
  std::string seqtest_config;
  uint64_t seqtest_seed = 0;
  uint64_t seqtest_trials = 0;
  std::string seqtest_policy;
  seqtest->add_option("--config", seqtest_config, "experiment config JSON")->required();
  auto* seqtest_seed_opt =
      seqtest->add_option("--seed", seqtest_seed, "override master seed");
  auto* seqtest_trials_opt =
      seqtest->add_option("--trials", seqtest_trials, "override trial count");
  auto* seqtest_policy_opt = seqtest->add_option(
      "--policy", seqtest_policy, "uniform-extension or ready-tie-break");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      cwalk::ExperimentConfig cfg = cwalk::load_config(run_config);
      if (run_seed_opt->count() > 0) {
        cfg.master_seed = run_seed;
        cfg.seed_given = true;
      }
      if (run_trials_opt->count() > 0) cfg.trials = run_trials;
      if (run_out_opt->count() > 0) cfg.output.dir = run_out;
      if (run_traces) cfg.output.traces = true;
      const cwalk::RunResult result = cwalk::run_experiment(cfg, run_check);
      cwalk::write_artifacts(result, cfg);
      print_report(result.report);
      if (run_check && !result.check_pass) return kExitCheckFailed;
      return kExitOk;
    }

    if (*predict) {
      print_report(cwalk::predict_report(cwalk::load_config(predict_config)));
      return kExitOk;
    }

    if (*markov) {
      const cwalk::oracle::MarkovAbsorption m =
          cwalk::oracle::markov_absorption(markov_p0, markov_d);
      print_report(nlohmann::json{{"p0", markov_p0},
                                  {"d", markov_d},
                                  {"prob_upper", m.prob_upper},
                                  {"expected_steps", m.expected_steps},
                                  {"interior_states", m.interior_states}});
      return kExitOk;
    }

    if (*extensions) {
      const cwalk::ExperimentConfig cfg = cwalk::load_config(extensions_config);
      const cwalk::Scenario scenario = cwalk::build_scenario(cfg.scenario, cfg.shift);
      const std::vector<cwalk::SpacetimeEvent>& events =
          scenario.events.empty() ? cfg.scenario.events : scenario.events;
      if (events.empty()) {
        throw cwalk::ValidationError("config has no spacetime events");
      }
      const auto preds = cwalk::predecessor_masks(events);
      nlohmann::json orders = nlohmann::json::array();
      for (const auto& idx : cwalk::oracle::enumerate_linear_extensions(preds)) {
        std::vector<std::string> ids;
        for (int i : idx) ids.push_back(events[size_t(i)].id);
        orders.push_back(ids);
      }
      print_report(nlohmann::json{
          {"count", cwalk::oracle::count_linear_extensions(preds)},
          {"orders", std::move(orders)}});
      return kExitOk;
    }

    if (*moments) {
      const cwalk::oracle::EraserMoments m =
          cwalk::oracle::eraser_moments(moments_p0, moments_d, moments_steps);
      print_report(nlohmann::json{{"p0", moments_p0},
                                  {"d", moments_d},
                                  {"steps", moments_steps},
                                  {"mean_sq_displacement", m.mean_sq_displacement},
                                  {"mean_deviant_per_term", m.mean_deviant_per_term},
                                  {"var_deviant_per_term", m.var_deviant_per_term},
                                  {"absorbed_mass", m.absorbed_mass}});
      return kExitOk;
    }

    if (*joint) {
      const auto table = cwalk::oracle::anti_correlated_joint_table(
          to_amplitude(joint_a), to_amplitude(joint_b), to_amplitude(joint_gamma),
          to_amplitude(joint_delta));
      print_report(nlohmann::json{{"p_0u", table[0]},
                                  {"p_0v", table[1]},
                                  {"p_1u", table[2]},
                                  {"p_1v", table[3]}});
      return kExitOk;
    }

    if (*scan) {
      std::vector<std::string> csv;
      const nlohmann::json report =
          cwalk::signal_scan_report(scan_states, scan_seed, &csv);
      if (!scan_out.empty()) {
        std::filesystem::create_directories(scan_out);
        const auto path = std::filesystem::path(scan_out) / "signal_scan.csv";
        std::ofstream f(path, std::ios::binary);
        if (!f) throw cwalk::ValidationError("cannot write " + path.string());
        for (const std::string& line : csv) f << line << '\n';
      }
      print_report(report);
      return kExitOk;
    }

    if (*seqtest) {
      cwalk::ExperimentConfig cfg = cwalk::load_config(seqtest_config);
      if (seqtest_seed_opt->count() > 0) {
        cfg.master_seed = seqtest_seed;
        cfg.seed_given = true;
      }
      if (seqtest_trials_opt->count() > 0) cfg.trials = seqtest_trials;
      if (seqtest_policy_opt->count() > 0) {
        cfg.sequencer_policy = cwalk::extension_policy_from_string(seqtest_policy);
      }
      print_report(cwalk::sequence_test_report(cfg));
      return kExitOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
