#include "cwalk/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "cwalk/errors.hpp"
#include "cwalk/oracle.hpp"
#include "cwalk/signaling.hpp"
#include "cwalk/stats.hpp"
#include "cwalk/version.hpp"

namespace cwalk {

namespace {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// Joint outcome index (digit0 * 2 + digit1) of one pair measurement, walking
// the wings in wing_seq order over the closed-form joint table. Interaction
// ids embed the wing, so a given wing's k-th direction draw is the same under
// either order; only the walked densities change.
size_t bell_trial(const std::vector<double>& joint, const std::vector<int>& wing_seq,
                  const ShiftParams& shift, const TrialRng& rng, uint64_t* steps,
                  uint64_t* clamps) {
  int digits[2] = {-1, -1};
  for (int wing : wing_seq) {
    double p = 0.0;  // density of this wing's 0-branch
    if (wing == 0) {
      if (digits[1] < 0) {
        p = joint[0] + joint[1];
      } else {
        const double den = joint[digits[1]] + joint[2 + digits[1]];
        p = den > 0.0 ? joint[digits[1]] / den : 0.0;
      }
    } else {
      if (digits[0] < 0) {
        p = joint[0] + joint[2];
      } else {
        const double den = joint[size_t(digits[0]) * 2] + joint[size_t(digits[0]) * 2 + 1];
        p = den > 0.0 ? joint[size_t(digits[0]) * 2] / den : 0.0;
      }
    }
    const ScalarWalkResult r =
        scalar_collapse(p, shift, rng, uint32_t(wing) << 24);
    if (steps) *steps += r.steps;
    if (clamps) *clamps += r.clamps;
    digits[wing] = r.upper ? 0 : 1;
  }
  return size_t(digits[0]) * 2 + size_t(digits[1]);
}

std::vector<int> bell_wing_sequence(const Scenario& scenario,
                                    const ExperimentConfig& cfg,
                                    const TrialRng& rng) {
  if (!cfg.scenario.wing_order.empty()) return cfg.scenario.wing_order;
  if (scenario.events.size() != 2) {
    throw ValidationError("pair sequencing needs exactly two events, one per wing");
  }
  const auto order = sequence_events(scenario.events, rng, cfg.sequencer_policy);
  std::vector<int> wings;
  for (const auto& id : order) {
    for (size_t j = 0; j < scenario.events.size(); ++j) {
      if (scenario.events[j].id == id) wings.push_back(int(j));
    }
  }
  return wings;
}

std::vector<double> selection_weights(const ExperimentConfig& cfg) {
  if (!cfg.scenario.detector_weights.empty()) return cfg.scenario.detector_weights;
  return std::vector<double>(cfg.scenario.densities.size(), 1.0);
}

nlohmann::json chi_square_json(const stats::ChiSquare& c) {
  return nlohmann::json{
      {"statistic", c.statistic}, {"dof", c.dof}, {"p_value", c.p_value}};
}

nlohmann::json scale_json(const ScaleEstimate& s) {
  return nlohmann::json{{"particles_low", s.particles_low},
                        {"particles_high", s.particles_high},
                        {"safety_low", s.safety_low},
                        {"safety_high", s.safety_high},
                        {"steps_low", s.steps_low},
                        {"steps_high", s.steps_high},
                        {"steps_nominal", s.steps_nominal},
                        {"d_bar", s.d_bar},
                        {"steps_to_collapse", s.steps_to_collapse},
                        {"grw_lambda", s.grw_lambda},
                        {"grw_collapse_time_s", s.grw_collapse_time_s},
                        {"grw_system_size", s.grw_system_size}};
}

nlohmann::json eraser_prediction_json(const EraserPrediction& p) {
  return nlohmann::json{{"baseline_per_term", p.baseline_per_term},
                        {"per_term_leading", p.per_term_leading},
                        {"total_leading", p.total_leading},
                        {"cross_amp_leading", p.cross_amp_leading},
                        {"regime_warning", p.regime_warning}};
}

nlohmann::json amplified_prediction_json(const AmplifiedPrediction& p) {
  return nlohmann::json{{"case_absorbed_exact", p.case_absorbed_exact},
                        {"case_doubled_exact", p.case_doubled_exact},
                        {"average_exact", p.average_exact},
                        {"case_absorbed_leading", p.case_absorbed_leading},
                        {"case_doubled_leading", p.case_doubled_leading},
                        {"average_leading", p.average_leading},
                        {"case_absorbed_round", p.case_absorbed_round},
                        {"case_doubled_round", p.case_doubled_round},
                        {"average_round", p.average_round},
                        {"regime_warning", p.regime_warning}};
}

}  // namespace

int resolve_parallelism(int configured) {
  if (const char* env = std::getenv("COLLAPSE_WALK_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) {
      return int(std::min<long>(v, 256));
    }
  }
  if (configured >= 1) return configured;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw >= 1 ? int(hw) : 1;
}

TrialSummary run_one_trial(const Scenario& scenario, const ExperimentConfig& cfg,
                           uint64_t trial) {
  TrialSummary out;
  out.trial = trial;
  const TrialRng rng(cfg.master_seed, uint32_t(trial));
  switch (scenario.kind) {
    case ScenarioKind::kBinary: {
      const ScalarWalkResult r =
          scalar_collapse(scenario.expected_frequencies[0], cfg.shift, rng);
      out.outcome = r.upper ? 0 : 1;
      out.steps = r.steps;
      out.clamps = r.clamps;
      out.final_p = r.p;
      break;
    }
    case ScenarioKind::kMultiOutcome: {
      const MultiWalkResult r = multi_outcome_walk(
          scenario.expected_frequencies, selection_weights(cfg), cfg.shift, rng);
      out.outcome = r.outcome;
      out.steps = r.steps;
      out.clamps = r.clamps;
      out.final_p = r.outcome >= 0 ? r.densities[size_t(r.outcome)] : 0.0;
      break;
    }
    case ScenarioKind::kBellEpr: {
      const std::vector<int> wings = bell_wing_sequence(scenario, cfg, rng);
      const size_t joint = bell_trial(scenario.expected_frequencies, wings,
                                      cfg.shift, rng, &out.steps, &out.clamps);
      out.outcome = int(joint);
      out.final_p = 1.0;
      out.metric = double(wings.front());
      break;
    }
    case ScenarioKind::kEraserChain: {
      const double p0 = std::norm(scenario.initial.amp(0));
      const ScalarWalkResult r =
          scalar_fixed_steps(p0, cfg.shift, rng, scenario.fixed_steps);
      out.outcome = r.absorbed_early ? (r.upper ? 0 : 1) : -1;
      out.steps = r.steps;
      out.clamps = r.clamps;
      out.final_p = r.p;
      out.metric = oracle::cross_term_density_per_term(r.p);
      break;
    }
    case ScenarioKind::kAmplifiedAlpha: {
      const double p0 = std::norm(scenario.initial.amp(0));
      const ScalarWalkResult r = scalar_fixed_steps(p0, cfg.shift, rng, 1);
      out.steps = r.steps;
      out.clamps = r.clamps;
      out.final_p = r.p;
      const AmplifiedPrediction pred = predict_amplified_deviation(cfg.shift.d);
      if (r.p <= cfg.shift.absorb_tol) {
        out.outcome = 1;  // interacting branch emptied; the complement absorbed
        out.metric = pred.case_absorbed_exact;
      } else {
        out.outcome = -1;  // branch doubled, no absorption
        out.metric = pred.case_doubled_exact;
      }
      break;
    }
  }
  return out;
}

RunResult run_experiment(const ExperimentConfig& cfg, bool check) {
  cfg.validate(true);
  const Scenario scenario = build_scenario(cfg.scenario, cfg.shift);
  if (cfg.shift.d == 0.0 && scenario.fixed_steps == 0) {
    throw ValidationError(
        "d = 0 disables shifts, so a walk-to-absorption scenario never ends; "
        "use d > 0 or a fixed-step scenario");
  }
  const auto t0 = std::chrono::steady_clock::now();

  const uint64_t n = cfg.trials;
  std::vector<TrialSummary> summaries(n);
  const int threads = resolve_parallelism(cfg.parallelism);
  if (threads <= 1 || n < 2) {
    for (uint64_t t = 0; t < n; ++t) summaries[t] = run_one_trial(scenario, cfg, t);
  } else {
    const uint64_t workers = std::min<uint64_t>(uint64_t(threads), n);
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (uint64_t w = 0; w < workers; ++w) {
      const uint64_t lo = n * w / workers;
      const uint64_t hi = n * (w + 1) / workers;
      pool.emplace_back([&, lo, hi] {
        try {
          for (uint64_t t = lo; t < hi; ++t) {
            summaries[t] = run_one_trial(scenario, cfg, t);
          }
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  std::vector<uint64_t> counts(scenario.branches.size(), 0);
  uint64_t none = 0;
  uint64_t steps_total = 0;
  uint64_t clamp_total = 0;
  double metric_sum = 0.0;
  double metric_sq_sum = 0.0;
  uint64_t wing_first[2] = {0, 0};
  for (const TrialSummary& s : summaries) {
    if (s.outcome >= 0) {
      ++counts[size_t(s.outcome)];
    } else {
      ++none;
    }
    steps_total += s.steps;
    clamp_total += s.clamps;
    metric_sum += s.metric;
    metric_sq_sum += s.metric * s.metric;
    if (scenario.kind == ScenarioKind::kBellEpr) ++wing_first[size_t(s.metric)];
  }
  const double metric_mean = metric_sum / double(n);
  const double metric_var =
      std::max(0.0, metric_sq_sum / double(n) - metric_mean * metric_mean);

  nlohmann::json report;
  report["version"] = kVersion;
  report["config"] = config_to_json(cfg);
  report["kind"] = to_string(scenario.kind);
  report["trials"] = n;

  nlohmann::json outcomes = nlohmann::json::array();
  const auto& expected = scenario.expected_frequencies;
  for (size_t i = 0; i < scenario.branches.size(); ++i) {
    nlohmann::json o;
    o["id"] = scenario.branches[i].id;
    o["count"] = counts[i];
    o["frequency"] = double(counts[i]) / double(n);
    if (!expected.empty()) {
      o["expected"] = expected[i];
      if (expected[i] > 0.0 && expected[i] < 1.0) {
        o["z"] = stats::z_score(counts[i], n, expected[i]);
      }
    }
    outcomes.push_back(std::move(o));
  }
  report["outcomes"] = std::move(outcomes);
  report["no_outcome"] = none;
  report["steps"] = {{"total", steps_total}, {"mean", double(steps_total) / double(n)}};
  report["clamps"] = clamp_total;
  if (!expected.empty() && none == 0) {
    report["chi_square"] = chi_square_json(stats::chi_square_goodness(counts, expected));
  }
  if (scenario.kind == ScenarioKind::kBellEpr) {
    report["wing_first_counts"] = {wing_first[0], wing_first[1]};
  }

  bool pass = true;
  nlohmann::json checks = nlohmann::json::array();
  const auto add_check = [&](const std::string& name, double observed,
                             double target, double tolerance) {
    const bool ok = std::abs(observed - target) <= tolerance;
    pass = pass && ok;
    checks.push_back(nlohmann::json{{"name", name},
                                    {"observed", observed},
                                    {"target", target},
                                    {"tolerance", tolerance},
                                    {"pass", ok}});
  };

  if (check && !expected.empty()) {
    for (size_t i = 0; i < scenario.branches.size(); ++i) {
      const double freq = double(counts[i]) / double(n);
      const double exp = expected[i];
      double tol = 0.0;
      if (exp > 0.0 && exp < 1.0) {
        tol = cfg.sigma_factor * stats::binomial_sigma(exp, n);
      }
      add_check("frequency:" + scenario.branches[i].id, freq, exp, tol);
    }
  }

  if (scenario.kind == ScenarioKind::kEraserChain) {
    const double p0 = std::norm(scenario.initial.amp(0));
    nlohmann::json dev;
    dev["mean_per_term"] = metric_mean;
    dev["mean_total"] = 2.0 * metric_mean;
    dev["sample_var_per_term"] = metric_var;
    dev["excess_per_term"] =
        metric_mean - oracle::cross_term_density_per_term(p0);
    double oracle_mean = oracle::cross_term_density_per_term(p0);
    double oracle_var = 0.0;
    bool have_oracle = true;
    if (cfg.shift.variable_step) {
      have_oracle = false;  // no exact lattice for a stepsize mixture
    } else if (cfg.shift.d > 0.0) {
      try {
        const oracle::EraserMoments m =
            oracle::eraser_moments(p0, cfg.shift.d, scenario.fixed_steps);
        oracle_mean = m.mean_deviant_per_term;
        oracle_var = m.var_deviant_per_term;
        dev["oracle"] = {{"mean_per_term", m.mean_deviant_per_term},
                         {"var_per_term", m.var_deviant_per_term},
                         {"mean_sq_displacement", m.mean_sq_displacement},
                         {"absorbed_mass", m.absorbed_mass}};
      } catch (const ValidationError&) {
        have_oracle = false;  // start off the step lattice: no exact chain
      }
    } else {
      dev["oracle"] = {{"mean_per_term", oracle_mean},
                       {"var_per_term", 0.0},
                       {"mean_sq_displacement", 0.0},
                       {"absorbed_mass", 0.0}};
    }
    dev["prediction"] = eraser_prediction_json(predict_eraser_deviation(
        uint32_t(scenario.fixed_steps), cfg.shift.d, scenario.initial.amp(0)));
    report["deviant"] = std::move(dev);
    if (check && have_oracle) {
      const double tol = oracle_var > 0.0
                             ? cfg.sigma_factor * std::sqrt(oracle_var / double(n))
                             : kAlgebraicTol;
      add_check("deviant_mean_per_term", metric_mean, oracle_mean, tol);
    }
  }

  if (scenario.kind == ScenarioKind::kAmplifiedAlpha) {
    const AmplifiedPrediction pred = predict_amplified_deviation(cfg.shift.d);
    nlohmann::json dev;
    dev["mean_correlation_loss"] = metric_mean;
    dev["doubled_fraction"] = double(none) / double(n);
    dev["prediction"] = amplified_prediction_json(pred);
    report["deviation"] = std::move(dev);
    if (check) {
      const double spread = (pred.case_absorbed_exact - pred.case_doubled_exact) / 2.0;
      const double case_var = spread * spread;
      const double tol = case_var > 0.0
                             ? cfg.sigma_factor * std::sqrt(case_var / double(n))
                             : kAlgebraicTol;
      add_check("mean_correlation_loss", metric_mean, pred.average_exact, tol);
    }
  }

  if (check) {
    report["checks"] = std::move(checks);
    report["check_pass"] = pass;
  }

  RunResult result;
  result.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report["wall_time_s"] = result.wall_time_s;
  result.report = std::move(report);
  result.summaries = std::move(summaries);
  result.check_pass = pass;
  return result;
}

void write_artifacts(const RunResult& result, const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.output.dir, ec);
  if (ec) {
    throw ValidationError("cannot create output directory " + cfg.output.dir + ": " +
                          ec.message());
  }
  const fs::path dir(cfg.output.dir);

  {
    std::ofstream f(dir / "report.json", std::ios::binary);
    if (!f) throw ValidationError("cannot write " + (dir / "report.json").string());
    f << result.report.dump(2) << '\n';
  }

  std::vector<std::string> branch_ids;
  for (const auto& o : result.report.at("outcomes")) {
    branch_ids.push_back(o.at("id").get<std::string>());
  }
  const auto outcome_name = [&](int outcome) -> std::string {
    if (outcome < 0 || size_t(outcome) >= branch_ids.size()) return "-";
    return branch_ids[size_t(outcome)];
  };

  {
    std::ofstream f(dir / "summary.csv", std::ios::binary);
    if (!f) throw ValidationError("cannot write " + (dir / "summary.csv").string());
    f << "trial,outcome,steps,clamps,final_p\n";
    for (const TrialSummary& s : result.summaries) {
      f << s.trial << ',' << outcome_name(s.outcome) << ',' << s.steps << ','
        << s.clamps << ',' << format_double(s.final_p) << '\n';
    }
  }

  if (cfg.output.traces) {
    std::ofstream f(dir / "traces.jsonl", std::ios::binary);
    if (!f) throw ValidationError("cannot write " + (dir / "traces.jsonl").string());
    for (const TrialSummary& s : result.summaries) {
      nlohmann::json line;
      line["trial"] = s.trial;
      if (s.outcome >= 0) {
        line["outcome"] = outcome_name(s.outcome);
      } else {
        line["outcome"] = nullptr;
      }
      line["steps"] = s.steps;
      line["clamps"] = s.clamps;
      line["final_p"] = s.final_p;
      line["metric"] = s.metric;
      f << line.dump() << '\n';
    }
  }
}

nlohmann::json predict_report(const ExperimentConfig& cfg) {
  cfg.validate(false);
  const Scenario scenario = build_scenario(cfg.scenario, cfg.shift);
  nlohmann::json out;
  out["version"] = kVersion;
  out["config"] = config_to_json(cfg);
  out["kind"] = to_string(scenario.kind);
  switch (scenario.kind) {
    case ScenarioKind::kBinary: {
      const double p0 = scenario.expected_frequencies[0];
      nlohmann::json freq = nlohmann::json::array();
      for (size_t i = 0; i < scenario.branches.size(); ++i) {
        freq.push_back({{"id", scenario.branches[i].id},
                        {"probability", scenario.expected_frequencies[i]}});
      }
      out["frequencies"] = std::move(freq);
      out["p0"] = p0;
      if (cfg.shift.d > 0.0) {
        out["expected_steps"] = p0 * (1.0 - p0) / (cfg.shift.d * cfg.shift.d);
      }
      break;
    }
    case ScenarioKind::kMultiOutcome: {
      nlohmann::json freq = nlohmann::json::array();
      for (size_t i = 0; i < scenario.branches.size(); ++i) {
        freq.push_back({{"id", scenario.branches[i].id},
                        {"probability", scenario.expected_frequencies[i]}});
      }
      out["frequencies"] = std::move(freq);
      break;
    }
    case ScenarioKind::kBellEpr: {
      nlohmann::json joint = nlohmann::json::array();
      for (size_t i = 0; i < scenario.branches.size(); ++i) {
        joint.push_back({{"id", scenario.branches[i].id},
                         {"probability", scenario.expected_frequencies[i]}});
      }
      out["joint"] = std::move(joint);
      const auto& e = scenario.expected_frequencies;
      out["wing_marginals"] = {{"wing0_up", e[0] + e[1]}, {"wing1_up", e[0] + e[2]}};
      break;
    }
    case ScenarioKind::kEraserChain: {
      out["deviant"] = eraser_prediction_json(predict_eraser_deviation(
          uint32_t(scenario.fixed_steps), cfg.shift.d, scenario.initial.amp(0)));
      break;
    }
    case ScenarioKind::kAmplifiedAlpha: {
      out["deviation"] =
          amplified_prediction_json(predict_amplified_deviation(cfg.shift.d));
      break;
    }
  }
  out["scale"] = scale_json(estimate_scale(
      cfg.scale.particles_low, cfg.scale.particles_high, cfg.scale.safety_low,
      cfg.scale.safety_high, cfg.scale.grw_lambda, cfg.scale.grw_collapse_time_s));
  return out;
}

nlohmann::json sequence_test_report(const ExperimentConfig& cfg) {
  cfg.validate(true);
  const Scenario scenario = build_scenario(cfg.scenario, cfg.shift);
  const std::vector<SpacetimeEvent>& events =
      scenario.events.empty() ? cfg.scenario.events : scenario.events;
  if (events.empty()) {
    throw ValidationError("sequence test needs a scenario with spacetime events");
  }
  const std::vector<uint32_t> preds = predecessor_masks(events);
  const uint64_t total = oracle::count_linear_extensions(preds);
  const std::vector<std::vector<int>> index_orders =
      oracle::enumerate_linear_extensions(preds);

  std::vector<std::vector<std::string>> id_orders;
  std::map<std::string, size_t> order_slot;
  const auto join = [](const std::vector<std::string>& ids) {
    std::string key;
    for (const auto& id : ids) {
      if (!key.empty()) key += '>';
      key += id;
    }
    return key;
  };
  for (const auto& idx : index_orders) {
    std::vector<std::string> ids;
    for (int i : idx) ids.push_back(events[size_t(i)].id);
    order_slot[join(ids)] = id_orders.size();
    id_orders.push_back(std::move(ids));
  }

  std::vector<uint64_t> counts(id_orders.size(), 0);
  for (uint64_t t = 0; t < cfg.trials; ++t) {
    const TrialRng rng(cfg.master_seed, uint32_t(t));
    const auto order = sequence_events(events, rng, cfg.sequencer_policy);
    const auto it = order_slot.find(join(order));
    if (it == order_slot.end()) {
      throw DomainError("sampled order is not a listed linear extension");
    }
    ++counts[it->second];
  }

  nlohmann::json out;
  out["version"] = kVersion;
  out["policy"] = to_string(cfg.sequencer_policy);
  out["extension_count"] = total;
  out["trials"] = cfg.trials;
  nlohmann::json orders = nlohmann::json::array();
  for (size_t i = 0; i < id_orders.size(); ++i) {
    orders.push_back({{"order", id_orders[i]},
                      {"count", counts[i]},
                      {"frequency", double(counts[i]) / double(cfg.trials)},
                      {"uniform_probability", 1.0 / double(total)}});
  }
  out["orders"] = std::move(orders);
  out["chi_square_vs_uniform"] = chi_square_json(stats::chi_square_goodness(
      counts, std::vector<double>(id_orders.size(), 1.0 / double(total))));

  if (scenario.kind == ScenarioKind::kBellEpr && events.size() == 2) {
    const std::vector<double>& joint = scenario.expected_frequencies;
    const ShiftParams shift = cfg.shift;
    const auto run_trial = [&events, &joint, &shift](
                               const std::vector<std::string>& order,
                               const TrialRng& rng) -> size_t {
      std::vector<int> wings;
      for (const auto& id : order) {
        for (size_t j = 0; j < events.size(); ++j) {
          if (events[j].id == id) wings.push_back(int(j));
        }
      }
      return bell_trial(joint, wings, shift, rng, nullptr, nullptr);
    };
    const OrderInvarianceReport inv = order_invariance_test(
        events, id_orders, cfg.trials, cfg.master_seed, 4, run_trial);
    nlohmann::json table = nlohmann::json::array();
    for (const auto& row : inv.table) table.push_back(row);
    out["order_invariance"] = {{"table", std::move(table)},
                               {"chi_square", chi_square_json(inv.homogeneity)}};
  }
  return out;
}

nlohmann::json signal_scan_report(uint64_t n_states, uint64_t seed,
                                  std::vector<std::string>* csv_lines) {
  if (csv_lines) csv_lines->push_back("rule,k,state_id,basis_id,gap");
  nlohmann::json out;
  out["version"] = kVersion;

  double born_on_witnesses = 0.0;
  nlohmann::json witnesses = nlohmann::json::array();
  for (const RuleWitness& w : pinned_witnesses()) {
    const SignalingReport rep =
        marginal_gap(w.rule, w.state, w.observed_wing, w.probes);
    nlohmann::json jw;
    jw["rule"] = w.rule.name();
    jw["gap"] = rep.max_marginal_gap;
    jw["witness_probe"] = rep.witness_probe;
    jw["unconditioned"] = rep.unconditioned;
    jw["averaged"] = rep.averaged;
    jw["note"] = w.note;
    witnesses.push_back(std::move(jw));
    if (csv_lines) {
      csv_lines->push_back(w.rule.name() + ",,witness,probe-" +
                           std::to_string(rep.witness_probe) + "," +
                           format_double(rep.max_marginal_gap));
    }
    const SignalingReport born =
        marginal_gap(ProbabilityRule::born(), w.state, w.observed_wing, w.probes);
    born_on_witnesses = std::max(born_on_witnesses, born.max_marginal_gap);
  }
  out["witnesses"] = std::move(witnesses);
  out["born_gap_on_witnesses"] = born_on_witnesses;
  if (csv_lines) {
    csv_lines->push_back("born,2,witness,all," + format_double(born_on_witnesses));
  }

  const UniquenessScan scan = born_uniqueness_scan(
      {0.5, 1.0, 1.5, 2.0, 2.5, 3.0}, n_states, seed);
  nlohmann::json points = nlohmann::json::array();
  for (const PowerScanPoint& p : scan.points) {
    points.push_back({{"k", p.k}, {"max_gap", p.max_gap}});
    if (csv_lines) {
      csv_lines->push_back("power-law," + format_double(p.k) + ",scan,max," +
                           format_double(p.max_gap));
    }
  }
  out["power_scan"] = std::move(points);
  out["born_max_gap"] = scan.born_max_gap;
  out["states_sampled"] = scan.states_sampled;
  if (csv_lines) {
    csv_lines->push_back("born,2,scan,max," + format_double(scan.born_max_gap));
  }
  return out;
}

}  // namespace cwalk
