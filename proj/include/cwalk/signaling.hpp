#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cwalk/rng.hpp"
#include "cwalk/state.hpp"

namespace cwalk {

// Candidate prescriptions for turning branch amplitudes into outcome
// probabilities. kPowerLaw generalizes: weight |a|^k, with k = 2 reducing
// to the Born assignment.
enum class RuleKind {
  kBorn,
  kAbsAmplitude,
  kEqualNonzero,
  kMaxDeterministic,
  kCosineAngle,
  kPowerLaw,
};

struct ProbabilityRule {
  RuleKind kind = RuleKind::kBorn;
  double power = 2.0;  // used by kPowerLaw only

  static ProbabilityRule born() { return {RuleKind::kBorn, 2.0}; }
  static ProbabilityRule power_law(double k) { return {RuleKind::kPowerLaw, k}; }
  static ProbabilityRule from_string(const std::string& name, double k = 2.0);
  std::string name() const;
};

// Raw weights per the rule, normalized to a distribution.
//  born: |a|^2; abs-amplitude: |a|; equal-nonzero: uniform over |a| > 1e-12;
//  max-deterministic: 1 on the largest |a| (ties to the lowest index);
//  cosine-angle: (1 + cos arg a)/2; power-law: |a|^k.
// Throws DomainError when every weight vanishes.
std::vector<double> outcome_weights(const ProbabilityRule& rule,
                                    const std::vector<Amplitude>& amps);

struct SignalingReport {
  ProbabilityRule rule;
  double max_marginal_gap = 0.0;
  size_t witness_probe = 0;  // index into the probe basis list
  std::vector<double> unconditioned;  // observed-wing distribution at the witness
  std::vector<double> averaged;       // same, averaged over far-wing outcomes
};

// Exact signaling gap for a two-subsystem state: for each probe basis on the
// far wing, compares the observed wing's outcome distribution computed
// (a) directly from branch amplitudes and (b) averaged over far-wing outcomes
// obtained first under the same rule. Gap is the largest total-variation
// distance over the probes. The far wing must be a qubit. For the Born rule
// the two routes coincide identically.
SignalingReport marginal_gap(const ProbabilityRule& rule, const EntangledState& state,
                             int observed_wing,
                             const std::vector<BasisRotation>& probe_bases);

// Joint outcome distribution over (subsystem 0, subsystem 1) basis pairs when
// first_wing is measured first and the other wing second, conditioned under
// the rule. Row-major over (digit0, digit1).
std::vector<double> joint_under_rule(const ProbabilityRule& rule,
                                     const EntangledState& state, int first_wing);

struct PowerScanPoint {
  double k = 0.0;
  double max_gap = 0.0;
};

struct UniquenessScan {
  std::vector<PowerScanPoint> points;
  double born_max_gap = 0.0;  // |a|^2 over the same probes; must be ~0
  uint64_t states_sampled = 0;
};

// Evaluates the power-law family on random two-qubit states and probe bases
// plus the pinned tilted witness; the gap must vanish only at k = 2.
UniquenessScan born_uniqueness_scan(const std::vector<double>& k_grid,
                                    uint64_t n_states, uint64_t seed);

// Pinned exact-evaluation witnesses, one per non-Born rule. Each is a
// (state, probe list) pair on which the rule's gap is macroscopic.
struct RuleWitness {
  ProbabilityRule rule;
  EntangledState state;
  std::vector<BasisRotation> probes;
  int observed_wing = 1;
  std::string note;
};
std::vector<RuleWitness> pinned_witnesses();

}  // namespace cwalk
