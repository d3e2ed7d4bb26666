#include "cwalk/config.hpp"

#include <fstream>

#include "cwalk/errors.hpp"

namespace cwalk {

namespace {

using nlohmann::json;

Amplitude parse_amplitude(const json& v, const char* what) {
  if (v.is_number()) return Amplitude{v.get<double>(), 0.0};
  if (v.is_array() && (v.size() == 1 || v.size() == 2) && v[0].is_number() &&
      (v.size() == 1 || v[1].is_number())) {
    return Amplitude{v[0].get<double>(), v.size() == 2 ? v[1].get<double>() : 0.0};
  }
  throw ValidationError(std::string(what) + ": amplitude must be a number or [re, im]");
}

BasisRotation parse_basis(const json& j, int default_subsystem) {
  BasisRotation rot;
  rot.subsystem = j.value("subsystem", default_subsystem);
  if (j.contains("gamma")) rot.gamma = parse_amplitude(j.at("gamma"), "basis gamma");
  if (j.contains("delta")) rot.delta = parse_amplitude(j.at("delta"), "basis delta");
  rot.up_label = j.value("up_label", std::string("u"));
  rot.down_label = j.value("down_label", std::string("v"));
  rot.validate();
  return rot;
}

ScenarioSpec parse_scenario(const json& j) {
  ScenarioSpec spec;
  if (!j.contains("kind")) throw ValidationError("scenario.kind is required");
  spec.kind = scenario_kind_from_string(j.at("kind").get<std::string>());
  if (j.contains("amplitudes")) {
    for (const auto& v : j.at("amplitudes")) {
      spec.amplitudes.push_back(parse_amplitude(v, "scenario.amplitudes"));
    }
  }
  if (j.contains("densities")) {
    spec.densities = j.at("densities").get<std::vector<double>>();
  }
  if (j.contains("detector_weights")) {
    spec.detector_weights = j.at("detector_weights").get<std::vector<double>>();
  }
  if (j.contains("wing_basis")) {
    spec.wing_basis = parse_basis(j.at("wing_basis"), 1);
  }
  spec.interactions = j.value("interactions", 0u);
  spec.eraser_mode = j.value("eraser_mode", std::string("compact"));
  if (j.contains("wing_order")) {
    spec.wing_order = j.at("wing_order").get<std::vector<int>>();
  }
  if (j.contains("events")) {
    for (const auto& e : j.at("events")) {
      SpacetimeEvent ev;
      ev.id = e.at("id").get<std::string>();
      ev.t = e.at("t").get<double>();
      ev.x = e.at("x").get<double>();
      ev.detector_id = e.value("detector", std::string());
      ev.system_id = e.value("system", std::string());
      spec.events.push_back(std::move(ev));
    }
  }
  return spec;
}

}  // namespace

void ExperimentConfig::validate(bool require_seed) const {
  scenario.validate();
  shift.validate();
  if (trials < 1) throw ValidationError("trials must be >= 1");
  if (require_seed && !seed_given) {
    throw ValidationError("master_seed is required; runs must be reproducible");
  }
  if (parallelism < 0) throw ValidationError("parallelism must be >= 0");
  if (!(sigma_factor > 0.0)) throw ValidationError("sigma_factor must be positive");
}

ExperimentConfig parse_config(const nlohmann::json& j) {
  try {
    ExperimentConfig cfg;
    if (!j.contains("scenario")) throw ValidationError("scenario block is required");
    cfg.scenario = parse_scenario(j.at("scenario"));
    if (j.contains("shift")) {
      const auto& s = j.at("shift");
      cfg.shift.d = s.value("d", cfg.shift.d);
      cfg.shift.variable_step = s.value("variable_step", cfg.shift.variable_step);
      cfg.shift.absorb_tol = s.value("absorb_tol", cfg.shift.absorb_tol);
    }
    cfg.trials = j.value("trials", cfg.trials);
    if (j.contains("master_seed")) {
      cfg.master_seed = j.at("master_seed").get<uint64_t>();
      cfg.seed_given = true;
    }
    if (j.contains("sequencer")) {
      cfg.sequencer_policy = extension_policy_from_string(
          j.at("sequencer").value("policy", std::string("uniform-extension")));
    }
    cfg.parallelism = j.value("parallelism", 0);
    if (j.contains("output")) {
      cfg.output.dir = j.at("output").value("dir", cfg.output.dir);
      cfg.output.traces = j.at("output").value("traces", cfg.output.traces);
    }
    if (j.contains("tolerances")) {
      cfg.sigma_factor = j.at("tolerances").value("sigma_factor", cfg.sigma_factor);
    }
    if (j.contains("scale")) {
      const auto& s = j.at("scale");
      cfg.scale.particles_low = s.value("particles_low", cfg.scale.particles_low);
      cfg.scale.particles_high = s.value("particles_high", cfg.scale.particles_high);
      cfg.scale.safety_low = s.value("safety_low", cfg.scale.safety_low);
      cfg.scale.safety_high = s.value("safety_high", cfg.scale.safety_high);
      cfg.scale.grw_lambda = s.value("grw_lambda", cfg.scale.grw_lambda);
      cfg.scale.grw_collapse_time_s =
          s.value("grw_collapse_time_s", cfg.scale.grw_collapse_time_s);
    }
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config parse error: ") + e.what());
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("config is not valid JSON: " + std::string(e.what()));
  }
  return parse_config(j);
}

namespace {

nlohmann::json amplitude_to_json(const Amplitude& a) {
  return nlohmann::json::array({a.real(), a.imag()});
}

}  // namespace

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  nlohmann::json sc;
  sc["kind"] = to_string(cfg.scenario.kind);
  if (!cfg.scenario.amplitudes.empty()) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& a : cfg.scenario.amplitudes) arr.push_back(amplitude_to_json(a));
    sc["amplitudes"] = arr;
  }
  if (!cfg.scenario.densities.empty()) sc["densities"] = cfg.scenario.densities;
  if (!cfg.scenario.detector_weights.empty()) {
    sc["detector_weights"] = cfg.scenario.detector_weights;
  }
  if (cfg.scenario.kind == ScenarioKind::kBellEpr) {
    sc["wing_basis"] = {{"subsystem", cfg.scenario.wing_basis.subsystem},
                        {"gamma", amplitude_to_json(cfg.scenario.wing_basis.gamma)},
                        {"delta", amplitude_to_json(cfg.scenario.wing_basis.delta)},
                        {"up_label", cfg.scenario.wing_basis.up_label},
                        {"down_label", cfg.scenario.wing_basis.down_label}};
  }
  if (cfg.scenario.interactions > 0) sc["interactions"] = cfg.scenario.interactions;
  if (cfg.scenario.kind == ScenarioKind::kEraserChain) {
    sc["eraser_mode"] = cfg.scenario.eraser_mode;
  }
  if (!cfg.scenario.wing_order.empty()) sc["wing_order"] = cfg.scenario.wing_order;
  if (!cfg.scenario.events.empty()) {
    nlohmann::json evs = nlohmann::json::array();
    for (const auto& e : cfg.scenario.events) {
      evs.push_back({{"id", e.id},
                     {"t", e.t},
                     {"x", e.x},
                     {"detector", e.detector_id},
                     {"system", e.system_id}});
    }
    sc["events"] = evs;
  }
  j["scenario"] = sc;
  j["shift"] = {{"d", cfg.shift.d},
                {"variable_step", cfg.shift.variable_step},
                {"absorb_tol", cfg.shift.absorb_tol}};
  j["trials"] = cfg.trials;
  if (cfg.seed_given) j["master_seed"] = cfg.master_seed;
  j["sequencer"] = {{"policy", to_string(cfg.sequencer_policy)}};
  j["parallelism"] = cfg.parallelism;
  j["output"] = {{"dir", cfg.output.dir}, {"traces", cfg.output.traces}};
  j["tolerances"] = {{"sigma_factor", cfg.sigma_factor}};
  j["scale"] = {{"particles_low", cfg.scale.particles_low},
                {"particles_high", cfg.scale.particles_high},
                {"safety_low", cfg.scale.safety_low},
                {"safety_high", cfg.scale.safety_high},
                {"grw_lambda", cfg.scale.grw_lambda},
                {"grw_collapse_time_s", cfg.scale.grw_collapse_time_s}};
  return j;
}

}  // namespace cwalk
