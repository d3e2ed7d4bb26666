#include "cwalk/scenario.hpp"

#include <bit>
#include <cmath>

#include "cwalk/errors.hpp"
#include "cwalk/oracle.hpp"

namespace cwalk {

ScenarioKind scenario_kind_from_string(const std::string& name) {
  if (name == "binary") return ScenarioKind::kBinary;
  if (name == "multi-outcome") return ScenarioKind::kMultiOutcome;
  if (name == "bell-epr") return ScenarioKind::kBellEpr;
  if (name == "eraser-chain") return ScenarioKind::kEraserChain;
  if (name == "amplified-alpha") return ScenarioKind::kAmplifiedAlpha;
  throw ValidationError("unknown scenario kind: " + name);
}

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::kBinary: return "binary";
    case ScenarioKind::kMultiOutcome: return "multi-outcome";
    case ScenarioKind::kBellEpr: return "bell-epr";
    case ScenarioKind::kEraserChain: return "eraser-chain";
    case ScenarioKind::kAmplifiedAlpha: return "amplified-alpha";
  }
  return "unknown";
}

namespace {

constexpr uint32_t kMaxFullEraser = 12;

void require_normalized_pair(const std::vector<Amplitude>& amps, const char* what) {
  if (amps.size() != 2) {
    throw ValidationError(std::string(what) + " needs exactly two amplitudes");
  }
  const double norm = std::norm(amps[0]) + std::norm(amps[1]);
  if (std::abs(norm - 1.0) > 1e-9) {
    throw ValidationError(std::string(what) + " amplitudes are not normalized");
  }
}

std::vector<Amplitude> pair_or_balanced(const std::vector<Amplitude>& amps,
                                        const char* what) {
  if (amps.empty()) {
    const double r = 1.0 / std::sqrt(2.0);
    return {Amplitude{r, 0.0}, Amplitude{r, 0.0}};
  }
  require_normalized_pair(amps, what);
  return amps;
}

}  // namespace

void ScenarioSpec::validate() const {
  switch (kind) {
    case ScenarioKind::kBinary:
      require_normalized_pair(amplitudes, "binary scenario");
      break;
    case ScenarioKind::kMultiOutcome: {
      if (densities.size() < 2) {
        throw ValidationError("multi-outcome scenario needs at least two densities");
      }
      double sum = 0.0;
      for (double p : densities) {
        if (!(p >= 0.0)) throw ValidationError("densities must be non-negative");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-9) {
        throw ValidationError("densities must sum to 1");
      }
      if (!detector_weights.empty() && detector_weights.size() != densities.size()) {
        throw ValidationError("detector weights must match the density count");
      }
      break;
    }
    case ScenarioKind::kBellEpr: {
      require_normalized_pair(pair_or_balanced(amplitudes, "bell-epr scenario"),
                              "bell-epr scenario");
      if (wing_basis.subsystem != 1) {
        throw ValidationError("bell-epr measurement basis must target subsystem 1");
      }
      wing_basis.validate();
      if (!wing_order.empty()) {
        if (wing_order.size() != 2 ||
            std::min(wing_order[0], wing_order[1]) != 0 ||
            std::max(wing_order[0], wing_order[1]) != 1) {
          throw ValidationError("wing order must be a permutation of {0, 1}");
        }
      }
      break;
    }
    case ScenarioKind::kEraserChain:
      require_normalized_pair(pair_or_balanced(amplitudes, "eraser scenario"),
                              "eraser scenario");
      if (eraser_mode != "compact" && eraser_mode != "full") {
        throw ValidationError("eraser mode must be \"compact\" or \"full\"");
      }
      if (eraser_mode == "full" && interactions > kMaxFullEraser) {
        throw SizeLimitError("full eraser chain supports at most " +
                             std::to_string(kMaxFullEraser) + " interactions");
      }
      break;
    case ScenarioKind::kAmplifiedAlpha:
      break;
  }
  if (!events.empty()) predecessor_masks(events);  // checks ids and coordinates
}

BellWingStream::BellWingStream(std::vector<int> wing_order, double absorb_tol)
    : wing_order_(std::move(wing_order)), tol_(absorb_tol) {
  if (wing_order_.empty()) throw ValidationError("wing order must be non-empty");
}

std::optional<StreamStep> BellWingStream::advance(EntangledState& state,
                                                  const TrialRng&) {
  while (stage_ < wing_order_.size()) {
    const int wing = wing_order_[stage_];
    Bifurcation bif = Bifurcation::subsystem_branch(state, wing, 0);
    if (bif.p >= 1.0 - tol_ || bif.p <= tol_) {
      // This wing's measurement has settled; make the survivor exact and
      // move on to the next wing.
      std::vector<uint8_t> mask = bif.mask;
      if (bif.p <= tol_) {
        for (auto& m : mask) m = m ? 0 : 1;
      }
      state = project_to_mask(state, mask);
      ++stage_;
      stage_steps_ = 0;
      continue;
    }
    const uint32_t id = (uint32_t(wing) << 24) | stage_steps_++;
    return StreamStep{id, std::move(bif)};
  }
  return std::nullopt;
}

EraserStream::EraserStream(uint32_t n_interactions, uint32_t id_base)
    : n_(n_interactions), id_base_(id_base) {}

std::optional<StreamStep> EraserStream::advance(EntangledState& state,
                                                const TrialRng&) {
  if (count_ >= n_) return std::nullopt;
  state = tensor_extend(state, 2, "r");
  state = correlate(state, 0, state.subsystem_count() - 1);
  Bifurcation bif = Bifurcation::subsystem_branch(state, 0, 0);
  return StreamStep{id_base_ + count_++, std::move(bif)};
}

double eraser_cross_density(const EntangledState& state) {
  EntangledState rotated = state;
  for (int s = 0; s < state.subsystem_count(); ++s) {
    if (state.dims()[s] != 2) {
      throw UnsupportedScenario("cross density readout needs qubit subsystems");
    }
    rotated = rotate_subsystem(rotated, BasisRotation::half(s));
  }
  double mass = 0.0;
  for (size_t i = 0; i < rotated.size(); ++i) {
    int parity = 0;
    for (int s = 0; s < rotated.subsystem_count(); ++s) parity ^= rotated.digit(i, s);
    if (parity) mass += std::norm(rotated.amp(i));
  }
  return mass;
}

Scenario build_scenario(const ScenarioSpec& spec, const ShiftParams& shift) {
  spec.validate();
  shift.validate();
  switch (spec.kind) {
    case ScenarioKind::kBinary: {
      EntangledState initial =
          EntangledState::qubit(spec.amplitudes[0], spec.amplitudes[1]);
      const double p0 = std::norm(spec.amplitudes[0]);
      std::vector<OutcomeBranch> branches = {
          OutcomeBranch::subsystem_value(initial, initial.label(0, 0), 0, 0),
          OutcomeBranch::subsystem_value(initial, initial.label(0, 1), 0, 1)};
      return Scenario{spec.kind,
                      std::move(initial),
                      std::move(branches),
                      [] { return std::make_unique<FixedBifurcationStream>(0, 0); },
                      spec.events,
                      {p0, 1.0 - p0},
                      0};
    }
    case ScenarioKind::kMultiOutcome: {
      std::vector<Amplitude> amps;
      std::vector<std::string> labels;
      for (size_t i = 0; i < spec.densities.size(); ++i) {
        amps.push_back(Amplitude{std::sqrt(spec.densities[i]), 0.0});
        labels.push_back("O" + std::to_string(i));
      }
      EntangledState initial = EntangledState::single(std::move(amps), std::move(labels));
      std::vector<OutcomeBranch> branches;
      for (size_t i = 0; i < spec.densities.size(); ++i) {
        branches.push_back(OutcomeBranch::subsystem_value(
            initial, initial.label(0, int(i)), 0, int(i)));
      }
      std::vector<double> weights = spec.detector_weights;
      if (weights.empty()) weights.assign(spec.densities.size(), 1.0);
      return Scenario{spec.kind,
                      std::move(initial),
                      std::move(branches),
                      [weights] { return std::make_unique<DetectorSelectionStream>(0, weights); },
                      spec.events,
                      spec.densities,
                      0};
    }
    case ScenarioKind::kBellEpr: {
      const std::vector<Amplitude> pair =
          pair_or_balanced(spec.amplitudes, "bell-epr scenario");
      const EntangledState bare(
          {2, 2}, {{"0", "1"}, {"0", "1"}},
          {Amplitude{0.0, 0.0}, pair[0], pair[1], Amplitude{0.0, 0.0}});
      EntangledState initial = rotate_subsystem(bare, spec.wing_basis);
      std::vector<OutcomeBranch> branches;
      std::vector<double> expected;
      for (size_t i = 0; i < initial.size(); ++i) {
        const std::string id = initial.label(0, initial.digit(i, 0)) +
                               initial.label(1, initial.digit(i, 1));
        branches.push_back(OutcomeBranch::from_indices(initial, id, {i}));
        expected.push_back(std::norm(initial.amp(i)));
      }
      std::vector<int> order = spec.wing_order.empty() ? std::vector<int>{0, 1}
                                                       : spec.wing_order;
      std::vector<SpacetimeEvent> events = spec.events;
      if (events.empty()) {
        events = {SpacetimeEvent{"A", 0.0, -1.0, "wing-0", "pair"},
                  SpacetimeEvent{"B", 0.0, 1.0, "wing-1", "pair"}};
      }
      const double tol = shift.absorb_tol;
      return Scenario{spec.kind,
                      std::move(initial),
                      std::move(branches),
                      [order, tol] { return std::make_unique<BellWingStream>(order, tol); },
                      std::move(events),
                      std::move(expected),
                      0};
    }
    case ScenarioKind::kEraserChain: {
      const std::vector<Amplitude> pair =
          pair_or_balanced(spec.amplitudes, "eraser scenario");
      EntangledState initial = EntangledState::qubit(pair[0], pair[1]);
      std::vector<OutcomeBranch> branches = {
          OutcomeBranch::subsystem_value(initial, initial.label(0, 0), 0, 0),
          OutcomeBranch::subsystem_value(initial, initial.label(0, 1), 0, 1)};
      const uint32_t n = spec.interactions;
      const bool full = spec.eraser_mode == "full";
      return Scenario{spec.kind,
                      std::move(initial),
                      std::move(branches),
                      [n, full]() -> std::unique_ptr<InteractionStream> {
                        if (full) return std::make_unique<EraserStream>(n);
                        return std::make_unique<FixedBifurcationStream>(0, 0, 0, n);
                      },
                      spec.events,
                      {},
                      n};
    }
    case ScenarioKind::kAmplifiedAlpha: {
      const double d = shift.d;
      EntangledState initial = EntangledState::qubit(
          Amplitude{std::sqrt(d), 0.0}, Amplitude{std::sqrt(1.0 - d), 0.0});
      std::vector<OutcomeBranch> branches = {
          OutcomeBranch::subsystem_value(initial, initial.label(0, 0), 0, 0),
          OutcomeBranch::subsystem_value(initial, initial.label(0, 1), 0, 1)};
      return Scenario{spec.kind,
                      std::move(initial),
                      std::move(branches),
                      [] { return std::make_unique<FixedBifurcationStream>(0, 0, 0, 1); },
                      spec.events,
                      {},
                      1};
    }
  }
  throw ValidationError("unhandled scenario kind");
}

EraserPrediction predict_eraser_deviation(uint32_t n, double d, Amplitude alpha) {
  const double p = std::norm(alpha);
  if (!(p > 0.0) || !(p < 1.0)) {
    throw ValidationError("alpha must put the pair in a proper superposition");
  }
  if (!(d >= 0.0) || d >= 1.0) throw ValidationError("step size out of range");
  const double q = 1.0 - p;
  EraserPrediction out;
  out.baseline_per_term = oracle::cross_term_density_per_term(p);
  out.per_term_leading = double(n) * d * d / (16.0 * std::pow(p * q, 1.5));
  out.total_leading = 2.0 * out.per_term_leading;
  out.cross_amp_leading = std::sqrt(out.per_term_leading);
  out.regime_warning = std::sqrt(double(n)) * d > 0.5 * std::min(p, q);
  return out;
}

AmplifiedPrediction predict_amplified_deviation(double d) {
  if (!(d >= 0.0) || !(d < 0.5)) {
    throw ValidationError("amplified scheme needs 0 <= d < 1/2");
  }
  AmplifiedPrediction out;
  out.case_absorbed_exact = d;  // 1 - (0 + sqrt(1-d) * 1)^2 after renormalizing
  const double overlap = std::sqrt(d) * std::sqrt(2.0 * d) +
                         std::sqrt(1.0 - d) * std::sqrt(1.0 - 2.0 * d);
  out.case_doubled_exact = 1.0 - overlap * overlap;
  out.average_exact = (out.case_absorbed_exact + out.case_doubled_exact) / 2.0;
  out.case_absorbed_leading = d;
  out.case_doubled_leading = (3.0 - 2.0 * std::sqrt(2.0)) * d;
  out.average_leading = (2.0 - std::sqrt(2.0)) * d;
  out.case_absorbed_round = d;
  out.case_doubled_round = 0.2 * d;
  out.average_round = 0.6 * d;
  out.regime_warning = d >= 0.1;
  return out;
}

ScaleEstimate estimate_scale(double particles_low, double particles_high,
                             double safety_low, double safety_high,
                             double grw_lambda, double grw_collapse_time_s) {
  if (!(particles_low > 0.0) || !(particles_high >= particles_low)) {
    throw ValidationError("particle range must be positive and ordered");
  }
  if (!(safety_low > 0.0) || !(safety_high >= safety_low)) {
    throw ValidationError("safety factor range must be positive and ordered");
  }
  if (!(grw_lambda > 0.0) || !(grw_collapse_time_s > 0.0)) {
    throw ValidationError("rate comparison needs positive lambda and time");
  }
  ScaleEstimate out;
  out.particles_low = particles_low;
  out.particles_high = particles_high;
  out.safety_low = safety_low;
  out.safety_high = safety_high;
  out.steps_low = particles_low / safety_high;
  out.steps_high = particles_high / safety_low;
  out.steps_nominal = std::sqrt(out.steps_low * out.steps_high);
  out.d_bar = 1.0 / std::sqrt(out.steps_nominal);
  out.steps_to_collapse = uint64_t(std::llround(1.0 / (out.d_bar * out.d_bar)));
  out.grw_lambda = grw_lambda;
  out.grw_collapse_time_s = grw_collapse_time_s;
  out.grw_system_size = 1.0 / (grw_lambda * grw_collapse_time_s);
  return out;
}

}  // namespace cwalk
