#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "cwalk/collapse.hpp"
#include "cwalk/sequencer.hpp"
#include "cwalk/state.hpp"

namespace cwalk {

enum class ScenarioKind {
  kBinary,         // one fixed bifurcation walked to absorption
  kMultiOutcome,   // k detectors, one weighted-selected split per step
  kBellEpr,        // anti-correlated pair, each wing measured in sequence
  kEraserChain,    // N correlating interactions, then a mixing-basis readout
  kAmplifiedAlpha  // single shift on a branch prepared with density d
};

ScenarioKind scenario_kind_from_string(const std::string& name);
std::string to_string(ScenarioKind kind);

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::kBinary;
  // binary/bell-epr/eraser-chain: the two branch amplitudes.
  std::vector<Amplitude> amplitudes;
  // multi-outcome: branch densities (sum to 1).
  std::vector<double> densities;
  // multi-outcome: per-step detector selection weights; empty = uniform.
  std::vector<double> detector_weights;
  // bell-epr: measurement basis of subsystem 1.
  BasisRotation wing_basis = BasisRotation::half(1);
  // eraser-chain: number of correlating interactions.
  uint32_t interactions = 0;
  // eraser-chain: "compact" walks the bare pair density; "full" materializes
  // the ancilla chain state (small N only).
  std::string eraser_mode = "compact";
  // bell-epr: wing measurement order as subsystem indices; default {0, 1}.
  std::vector<int> wing_order;
  std::vector<SpacetimeEvent> events;

  void validate() const;
};

// A spec compiled into runnable pieces. make_stream() returns a fresh
// per-trial stream; Scenario itself is immutable and shareable.
struct Scenario {
  ScenarioKind kind = ScenarioKind::kBinary;
  EntangledState initial;
  std::vector<OutcomeBranch> branches;
  std::function<std::unique_ptr<InteractionStream>()> make_stream;
  std::vector<SpacetimeEvent> events;
  // Closed-form absorption probabilities aligned with branches; empty for
  // fixed-step scenarios whose walks do not end in a named outcome.
  std::vector<double> expected_frequencies;
  // 0 = walk to absorption; otherwise apply exactly this many steps.
  uint64_t fixed_steps = 0;
};

// shift.d feeds the kinds whose construction depends on the step size
// (amplified-alpha prepares the interacting branch with density d).
Scenario build_scenario(const ScenarioSpec& spec, const ShiftParams& shift);

// Measures the wings one after the other, each as a run of bifurcations of
// that wing's 0-branch against its 1-branch; a wing whose density has
// saturated is projected out and the next wing starts. Interaction ids embed
// the wing ((wing << 24) | step), so direction draws for a given wing's k-th
// step match across different wing orders.
class BellWingStream : public InteractionStream {
 public:
  explicit BellWingStream(std::vector<int> wing_order, double absorb_tol = kAbsorbTol);

  std::optional<StreamStep> advance(EntangledState& state, const TrialRng& rng) override;

 private:
  std::vector<int> wing_order_;
  double tol_;
  size_t stage_ = 0;
  uint32_t stage_steps_ = 0;
};

// Correlates one fresh ancilla with subsystem 0 per step, then bifurcates
// subsystem 0's 0-branch. The ancilla chain makes the state literal; branch
// densities match the compact fixed-bifurcation walk step for step.
class EraserStream : public InteractionStream {
 public:
  explicit EraserStream(uint32_t n_interactions, uint32_t id_base = 0);

  std::optional<StreamStep> advance(EntangledState& state, const TrialRng& rng) override;

 private:
  uint32_t n_;
  uint32_t id_base_;
  uint32_t count_ = 0;
};

// Density in the all-mixing-basis readout carried by odd-parity components:
// the total "deviant" mass of a chain state (all subsystems must be qubits).
double eraser_cross_density(const EntangledState& state);

struct EraserPrediction {
  double baseline_per_term = 0.0;   // cross density per term before any shifts
  double per_term_leading = 0.0;    // leading-order mean excess per cross term
  double total_leading = 0.0;       // both cross terms together
  double cross_amp_leading = 0.0;   // rms cross amplitude, sqrt(per-term)
  bool regime_warning = false;      // sqrt(N) d not small vs. branch densities
};

// Leading-order deviant statistics after n correlating interactions of step d
// on a pair with amplitudes (alpha, beta): per-term excess
// n d^2 / (16 (p q)^{3/2}), which is (n/2) d^2 for the balanced pair.
EraserPrediction predict_eraser_deviation(uint32_t n, double d, Amplitude alpha);

struct AmplifiedPrediction {
  double case_absorbed_exact = 0.0;
  double case_doubled_exact = 0.0;
  double average_exact = 0.0;
  double case_absorbed_leading = 0.0;  // d
  double case_doubled_leading = 0.0;   // (3 - 2 sqrt(2)) d
  double average_leading = 0.0;        // (2 - sqrt(2)) d
  double case_absorbed_round = 0.0;    // d
  double case_doubled_round = 0.0;     // 0.2 d, the one-significant-figure value
  double average_round = 0.0;          // 0.6 d
  bool regime_warning = false;         // d >= 0.1
};

// Correlation loss 1 - (alpha alpha' + beta beta')^2 for the one-step scheme
// that prepares the interacting branch with density d: the down outcome
// empties the branch (loss exactly d), the up outcome doubles it.
AmplifiedPrediction predict_amplified_deviation(double d);

struct ScaleEstimate {
  double particles_low = 0.0;
  double particles_high = 0.0;
  double safety_low = 0.0;
  double safety_high = 0.0;
  double steps_low = 0.0;
  double steps_high = 0.0;
  double steps_nominal = 0.0;      // geometric mean of the range
  double d_bar = 0.0;              // 1 / sqrt(steps_nominal)
  uint64_t steps_to_collapse = 0;  // round(1 / d_bar^2)
  double grw_lambda = 0.0;         // per-particle rate per second
  double grw_collapse_time_s = 0.0;
  double grw_system_size = 0.0;    // particles needed to collapse in that time
};

// Particle-budget arithmetic: organism size over interactions-per-particle
// safety factor bounds the step count, whose square root sets the average
// shift; the GRW comparison asks how large a system that rate needs to be.
ScaleEstimate estimate_scale(double particles_low, double particles_high,
                             double safety_low, double safety_high,
                             double grw_lambda = 1e-16,
                             double grw_collapse_time_s = 0.01);

}  // namespace cwalk
