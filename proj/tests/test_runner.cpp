#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cwalk/collapse.hpp"
#include "cwalk/config.hpp"
#include "cwalk/errors.hpp"
#include "cwalk/runner.hpp"
#include "cwalk/scenario.hpp"
#include "cwalk/stats.hpp"

using namespace cwalk;
using nlohmann::json;

namespace {

ExperimentConfig binary_config(double p0, double d, uint64_t trials, uint64_t seed) {
  ExperimentConfig cfg;
  cfg.scenario.kind = ScenarioKind::kBinary;
  cfg.scenario.amplitudes = {Amplitude{std::sqrt(p0), 0.0},
                             Amplitude{std::sqrt(1.0 - p0), 0.0}};
  cfg.shift.d = d;
  cfg.trials = trials;
  cfg.master_seed = seed;
  cfg.seed_given = true;
  cfg.parallelism = 1;
  return cfg;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(bool(in));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config parsing covers amplitude forms and nested blocks") {
  const json j = {
      {"scenario",
       {{"kind", "bell-epr"},
        {"amplitudes", json::array({0.6, json::array({-0.8})})},
        {"wing_basis",
         {{"gamma", json::array({0.447213595499958, 0.0})},
          {"delta", json::array({0.0, 0.894427190999916})}}},
        {"wing_order", json::array({1, 0})}}},
      {"shift", {{"d", 0.02}, {"variable_step", true}}},
      {"trials", 5000},
      {"master_seed", 99},
      {"sequencer", {{"policy", "ready-tie-break"}}},
      {"parallelism", 2},
      {"output", {{"dir", "scratch"}, {"traces", true}}},
      {"tolerances", {{"sigma_factor", 5.0}}},
      {"scale", {{"particles_low", 1e9}}},
  };
  const ExperimentConfig cfg = parse_config(j);
  CHECK(cfg.scenario.kind == ScenarioKind::kBellEpr);
  REQUIRE(cfg.scenario.amplitudes.size() == 2);
  CHECK(cfg.scenario.amplitudes[0] == Amplitude{0.6, 0.0});
  CHECK(cfg.scenario.amplitudes[1] == Amplitude{-0.8, 0.0});
  CHECK(cfg.scenario.wing_basis.subsystem == 1);
  CHECK(cfg.scenario.wing_basis.delta.imag() == doctest::Approx(0.894427190999916));
  CHECK(cfg.scenario.wing_order == std::vector<int>{1, 0});
  CHECK(cfg.shift.d == 0.02);
  CHECK(cfg.shift.variable_step);
  CHECK(cfg.trials == 5000);
  CHECK(cfg.master_seed == 99);
  CHECK(cfg.seed_given);
  CHECK(cfg.sequencer_policy == ExtensionPolicy::kReadyTieBreak);
  CHECK(cfg.parallelism == 2);
  CHECK(cfg.output.dir == "scratch");
  CHECK(cfg.output.traces);
  CHECK(cfg.sigma_factor == 5.0);
  CHECK(cfg.scale.particles_low == 1e9);
  CHECK(cfg.scale.particles_high == 1e11);  // untouched default
  CHECK_NOTHROW(cfg.validate(true));
}

TEST_CASE("config errors carry usable messages") {
  CHECK_THROWS_AS(parse_config(json{{"trials", 10}}), ValidationError);
  CHECK_THROWS_AS(parse_config(json{{"scenario", {{"kind", "septenary"}}}}),
                  ValidationError);
  // Wrong JSON type is wrapped, not passed through raw.
  CHECK_THROWS_WITH_AS(parse_config(json{{"scenario", {{"kind", 7}}}}),
                       doctest::Contains("config parse error"), ValidationError);

  ExperimentConfig no_seed = binary_config(0.3, 0.01, 10, 0);
  no_seed.seed_given = false;
  CHECK_NOTHROW(no_seed.validate(false));
  CHECK_THROWS_WITH_AS(no_seed.validate(true),
                       doctest::Contains("master_seed is required"), ValidationError);

  ExperimentConfig zero_trials = binary_config(0.3, 0.01, 0, 7);
  CHECK_THROWS_AS(zero_trials.validate(false), ValidationError);
}

TEST_CASE("config echo is canonical and round trips exactly") {
  ExperimentConfig cfg = binary_config(0.36, 0.05, 123, 20260822);
  cfg.output.traces = true;
  cfg.sigma_factor = 4.5;
  const json echo = config_to_json(cfg);
  const ExperimentConfig back = parse_config(echo);
  CHECK(config_to_json(back) == echo);
  CHECK(echo.at("trials") == 123);
  CHECK(echo.at("master_seed") == 20260822);
  CHECK(echo.at("shift").at("d") == 0.05);

  ExperimentConfig unseeded = cfg;
  unseeded.seed_given = false;
  CHECK_FALSE(config_to_json(unseeded).contains("master_seed"));
}

TEST_CASE("binary run matches its closed-form targets") {
  const ExperimentConfig cfg = binary_config(0.3, 0.02, 4000, 20260822);
  const RunResult r = run_experiment(cfg, true);
  CHECK(r.check_pass);
  CHECK(r.report.at("check_pass").get<bool>());
  CHECK(r.report.at("kind") == "binary");
  CHECK(r.report.at("trials") == 4000);
  REQUIRE(r.report.at("outcomes").size() == 2);
  CHECK(r.report.at("outcomes")[0].at("id") == "0");
  CHECK(r.report.at("outcomes")[0].at("expected").get<double>() ==
        doctest::Approx(0.3).epsilon(1e-10));
  CHECK(r.report.contains("chi_square"));
  CHECK(r.report.at("no_outcome") == 0);
  // Mean duration p0 q0 / d^2 = 525, loosely.
  const double mean_steps = r.report.at("steps").at("mean").get<double>();
  CHECK(mean_steps > 400.0);
  CHECK(mean_steps < 650.0);
  REQUIRE(r.summaries.size() == 4000);
  uint64_t upper = 0;
  for (const auto& s : r.summaries) {
    if (s.outcome == 0) ++upper;
  }
  CHECK(double(upper) / 4000.0 ==
        doctest::Approx(r.report.at("outcomes")[0].at("frequency").get<double>())
            .epsilon(1e-12));
}

TEST_CASE("reports are independent of the thread count") {
  ExperimentConfig cfg = binary_config(0.42, 0.03, 600, 777);
  cfg.parallelism = 1;
  const RunResult serial = run_experiment(cfg, true);
  cfg.parallelism = 3;
  const RunResult threaded = run_experiment(cfg, true);

  json a = serial.report;
  json b = threaded.report;
  a.erase("wall_time_s");
  b.erase("wall_time_s");
  a.erase("config");  // echoes differ only in the parallelism field
  b.erase("config");
  CHECK(a.dump() == b.dump());

  REQUIRE(serial.summaries.size() == threaded.summaries.size());
  for (size_t i = 0; i < serial.summaries.size(); ++i) {
    CHECK(serial.summaries[i].outcome == threaded.summaries[i].outcome);
    CHECK(serial.summaries[i].steps == threaded.summaries[i].steps);
    CHECK(serial.summaries[i].clamps == threaded.summaries[i].clamps);
    CHECK(serial.summaries[i].final_p == threaded.summaries[i].final_p);
    CHECK(serial.summaries[i].metric == threaded.summaries[i].metric);
  }
}

TEST_CASE("pair-measurement fast path reproduces the generic engine") {
  for (const std::vector<int>& order : {std::vector<int>{0, 1}, std::vector<int>{1, 0}}) {
    ExperimentConfig cfg;
    cfg.scenario.kind = ScenarioKind::kBellEpr;
    cfg.scenario.amplitudes = {Amplitude{std::sqrt(0.3), 0.0},
                               Amplitude{-std::sqrt(0.7), 0.0}};
    BasisRotation basis;
    basis.subsystem = 1;
    basis.gamma = Amplitude{std::sqrt(0.2), 0.0};
    basis.delta = Amplitude{std::sqrt(0.8), 0.0};
    cfg.scenario.wing_basis = basis;
    cfg.scenario.wing_order = order;
    cfg.shift.d = 0.02;
    cfg.trials = 30;
    cfg.master_seed = 31415;
    cfg.seed_given = true;

    const Scenario scenario = build_scenario(cfg.scenario, cfg.shift);
    for (uint64_t t = 0; t < cfg.trials; ++t) {
      const TrialSummary fast = run_one_trial(scenario, cfg, t);
      const TrialRng rng(cfg.master_seed, uint32_t(t));
      auto stream = scenario.make_stream();
      const WalkResult slow =
          run_collapse(scenario.initial, *stream, cfg.shift, rng, scenario.branches);
      REQUIRE(slow.trace.outcome.has_value());
      REQUIRE(fast.outcome >= 0);
      CHECK(scenario.branches[size_t(fast.outcome)].id == *slow.trace.outcome);
      CHECK(fast.steps == slow.trace.step_count);
      // Outcome and step count are exact cross-engine invariants. The clamp
      // tally is not: whether a near-boundary draw needs truncation is
      // decided at one-ulp scale, the amplitude-rescaling and
      // density-walking routes round those densities differently, and on the
      // off-lattice conditional walks here a truncation can fire without
      // absorbing, so single-flag differences accumulate.
    }
  }
}

TEST_CASE("chain run reports deviant statistics against the exact ensemble") {
  ExperimentConfig cfg;
  cfg.scenario.kind = ScenarioKind::kEraserChain;
  cfg.scenario.amplitudes = {Amplitude{1.0 / std::sqrt(2.0), 0.0},
                             Amplitude{1.0 / std::sqrt(2.0), 0.0}};
  cfg.scenario.interactions = 50;
  cfg.shift.d = 0.02;
  cfg.trials = 3000;
  cfg.master_seed = 606060;
  cfg.seed_given = true;
  cfg.parallelism = 1;
  const RunResult r = run_experiment(cfg, true);
  CHECK(r.check_pass);
  const auto& dev = r.report.at("deviant");
  CHECK(dev.at("mean_total").get<double>() ==
        doctest::Approx(2.0 * dev.at("mean_per_term").get<double>()).epsilon(1e-12));
  CHECK(dev.contains("oracle"));
  // Displacement variance is d^2 per step actually taken; absorption before
  // step N pulls the exact value slightly below N d^2.
  const double msd = dev.at("oracle").at("mean_sq_displacement").get<double>();
  CHECK(msd < 50.0 * 0.02 * 0.02);
  CHECK(msd == doctest::Approx(50.0 * 0.02 * 0.02).epsilon(1e-3));
  CHECK(dev.at("oracle").at("absorbed_mass").get<double>() > 0.0);
  CHECK(dev.at("prediction").at("per_term_leading").get<double>() ==
        doctest::Approx(0.01).epsilon(1e-9));
  // The sampled mean should be in the oracle's neighborhood (check enforces
  // the sigma band; this pins the rough magnitude for a human reader).
  CHECK(dev.at("mean_per_term").get<double>() > 0.005);
  CHECK(dev.at("mean_per_term").get<double>() < 0.02);
}

TEST_CASE("single-shot run reports the correlation-loss split") {
  ExperimentConfig cfg;
  cfg.scenario.kind = ScenarioKind::kAmplifiedAlpha;
  cfg.shift.d = 0.01;
  cfg.trials = 4000;
  cfg.master_seed = 9090;
  cfg.seed_given = true;
  cfg.parallelism = 1;
  const RunResult r = run_experiment(cfg, true);
  CHECK(r.check_pass);
  const auto& dev = r.report.at("deviation");
  const double doubled = dev.at("doubled_fraction").get<double>();
  CHECK(std::abs(doubled - 0.5) < 4.0 * stats::binomial_sigma(0.5, 4000));
  const double mean = dev.at("mean_correlation_loss").get<double>();
  const double lo = dev.at("prediction").at("case_doubled_exact").get<double>();
  const double hi = dev.at("prediction").at("case_absorbed_exact").get<double>();
  CHECK(mean > lo);
  CHECK(mean < hi);
}

TEST_CASE("zero step size refuses absorption walks but runs fixed-step chains") {
  ExperimentConfig walk = binary_config(0.3, 0.0, 10, 5);
  CHECK_THROWS_AS(run_experiment(walk, false), ValidationError);

  ExperimentConfig chain;
  chain.scenario.kind = ScenarioKind::kEraserChain;
  chain.scenario.amplitudes = {Amplitude{1.0 / std::sqrt(2.0), 0.0},
                               Amplitude{1.0 / std::sqrt(2.0), 0.0}};
  chain.scenario.interactions = 10;
  chain.shift.d = 0.0;
  chain.trials = 100;
  chain.master_seed = 8;
  chain.seed_given = true;
  chain.parallelism = 1;
  const RunResult r = run_experiment(chain, true);
  CHECK(r.check_pass);
  // Every trial sits exactly at the baseline metric.
  const double baseline = r.report.at("deviant").at("oracle").at("mean_per_term").get<double>();
  CHECK(r.report.at("deviant").at("mean_per_term").get<double>() ==
        doctest::Approx(baseline).epsilon(1e-15));
  CHECK(r.report.at("deviant").at("sample_var_per_term").get<double>() ==
        doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("artifact files land beside each other and stay parseable") {
  ExperimentConfig cfg = binary_config(0.3, 0.1, 8, 42);
  const auto dir = std::filesystem::temp_directory_path() / "cwalk_test_artifacts";
  std::filesystem::remove_all(dir);
  cfg.output.dir = dir.string();
  cfg.output.traces = true;
  const RunResult r = run_experiment(cfg, false);
  write_artifacts(r, cfg);

  const json report = json::parse(slurp(dir / "report.json"));
  CHECK(report == r.report);

  const std::string csv = slurp(dir / "summary.csv");
  std::istringstream lines(csv);
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(lines, line)) rows.push_back(line);
  REQUIRE(rows.size() == 9);
  CHECK(rows[0] == "trial,outcome,steps,clamps,final_p");
  CHECK(rows[1].rfind("0,", 0) == 0);

  const std::string jsonl = slurp(dir / "traces.jsonl");
  std::istringstream tlines(jsonl);
  size_t n_lines = 0;
  while (std::getline(tlines, line)) {
    const json t = json::parse(line);
    CHECK(t.contains("trial"));
    CHECK(t.contains("outcome"));
    ++n_lines;
  }
  CHECK(n_lines == 8);
  std::filesystem::remove_all(dir);
}

TEST_CASE("summary CSV bytes match the frozen golden run") {
  ExperimentConfig cfg = binary_config(0.3, 0.1, 8, 42);
  const auto dir = std::filesystem::temp_directory_path() / "cwalk_test_golden";
  std::filesystem::remove_all(dir);
  cfg.output.dir = dir.string();
  const RunResult r = run_experiment(cfg, false);
  write_artifacts(r, cfg);
  CHECK(slurp(dir / "summary.csv") == slurp("tests/golden/summary_binary.csv"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("thread-count resolution prefers the environment") {
  unsetenv("COLLAPSE_WALK_THREADS");
  CHECK(resolve_parallelism(3) == 3);
  CHECK(resolve_parallelism(0) >= 1);
  setenv("COLLAPSE_WALK_THREADS", "7", 1);
  CHECK(resolve_parallelism(3) == 7);
  setenv("COLLAPSE_WALK_THREADS", "not-a-number", 1);
  CHECK(resolve_parallelism(3) == 3);
  setenv("COLLAPSE_WALK_THREADS", "0", 1);
  CHECK(resolve_parallelism(3) == 3);
  unsetenv("COLLAPSE_WALK_THREADS");
}

TEST_CASE("prediction report carries closed forms and the scale chain") {
  ExperimentConfig cfg = binary_config(0.3, 0.01, 1, 1);
  const json p = predict_report(cfg);
  CHECK(p.at("p0").get<double>() == doctest::Approx(0.3).epsilon(1e-10));
  CHECK(p.at("expected_steps").get<double>() == doctest::Approx(2100.0).epsilon(1e-9));
  const auto& scale = p.at("scale");
  CHECK(scale.at("steps_nominal").get<double>() == doctest::Approx(1e9).epsilon(1e-9));
  CHECK(scale.at("steps_to_collapse").get<uint64_t>() == 1000000000ull);
  CHECK(scale.at("grw_system_size").get<double>() == doctest::Approx(1e18).epsilon(1e-9));
  CHECK(scale == json::parse(slurp("tests/golden/scale_estimate.json")));

  ExperimentConfig bell;
  bell.scenario.kind = ScenarioKind::kBellEpr;
  bell.shift.d = 0.02;
  const json bp = predict_report(bell);
  double total = 0.0;
  for (const auto& o : bp.at("joint")) total += o.at("probability").get<double>();
  CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
  const double w0 = bp.at("joint")[0].at("probability").get<double>() +
                    bp.at("joint")[1].at("probability").get<double>();
  CHECK(bp.at("wing_marginals").at("wing0_up").get<double>() ==
        doctest::Approx(w0).epsilon(1e-12));
}

TEST_CASE("sequencing report ties sampling to enumeration and outcome tallies") {
  ExperimentConfig cfg;
  cfg.scenario.kind = ScenarioKind::kBellEpr;
  cfg.shift.d = 0.05;
  cfg.trials = 2000;
  cfg.master_seed = 445566;
  cfg.seed_given = true;
  const json rep = sequence_test_report(cfg);
  CHECK(rep.at("extension_count") == 2);
  REQUIRE(rep.at("orders").size() == 2);
  uint64_t total = 0;
  for (const auto& o : rep.at("orders")) {
    const uint64_t c = o.at("count").get<uint64_t>();
    total += c;
    CHECK(std::abs(double(c) / 2000.0 - 0.5) <
          4.0 * stats::binomial_sigma(0.5, 2000));
    CHECK(o.at("uniform_probability").get<double>() == doctest::Approx(0.5));
  }
  CHECK(total == 2000);
  CHECK(rep.contains("chi_square_vs_uniform"));

  REQUIRE(rep.contains("order_invariance"));
  const auto& inv = rep.at("order_invariance");
  REQUIRE(inv.at("table").size() == 2);
  for (const auto& row : inv.at("table")) {
    REQUIRE(row.size() == 4);
    uint64_t row_total = 0;
    for (const auto& c : row) row_total += c.get<uint64_t>();
    CHECK(row_total == 2000);
  }
  const double p_hom = inv.at("chi_square").at("p_value").get<double>();
  CHECK(p_hom >= 0.0);
  CHECK(p_hom <= 1.0);
  CHECK(p_hom > 1e-4);  // matched-trial outcomes are homogeneous across orders
}

TEST_CASE("signal scan emits witnesses, the power grid, and CSV rows") {
  std::vector<std::string> csv;
  const json rep = signal_scan_report(25, 20260822, &csv);
  CHECK(rep.at("born_max_gap").get<double>() <= 1e-12);
  CHECK(rep.at("born_gap_on_witnesses").get<double>() <= 1e-12);
  CHECK(rep.at("states_sampled") == 26);  // 25 random plus the pinned anchor
  REQUIRE(rep.at("witnesses").size() == 4);
  for (const auto& w : rep.at("witnesses")) {
    CHECK(w.at("gap").get<double>() > 1e-3);
  }
  REQUIRE(rep.at("power_scan").size() == 6);
  for (const auto& point : rep.at("power_scan")) {
    if (point.at("k").get<double>() == 2.0) {
      CHECK(point.at("max_gap").get<double>() <= 1e-12);
    } else {
      CHECK(point.at("max_gap").get<double>() > 1e-4);
    }
  }
  REQUIRE(csv.size() == 13);
  CHECK(csv[0] == "rule,k,state_id,basis_id,gap");
  for (size_t i = 1; i < csv.size(); ++i) {
    CHECK(std::count(csv[i].begin(), csv[i].end(), ',') == 4);
  }
}
