#include "cwalk/signaling.hpp"

#include <algorithm>
#include <cmath>

#include "cwalk/errors.hpp"
#include "cwalk/stats.hpp"

namespace cwalk {

namespace {

constexpr double kSupportTol = 1e-12;

// One number standing in for a branch's component vector: the lone component
// itself (phase kept) when only one is live, otherwise the L2 norm. Zero when
// the branch carries nothing.
Amplitude effective_amplitude(const std::vector<Amplitude>& components) {
  size_t live = 0;
  size_t last = 0;
  double sum_sq = 0.0;
  for (size_t i = 0; i < components.size(); ++i) {
    sum_sq += std::norm(components[i]);
    if (std::abs(components[i]) > kSupportTol) {
      ++live;
      last = i;
    }
  }
  if (live == 0) return Amplitude{0.0, 0.0};
  if (live == 1) return components[last];
  return Amplitude{std::sqrt(sum_sq), 0.0};
}

// Components of the two-subsystem state with digit `value` at `wing`,
// ordered by the other subsystem's digit.
std::vector<Amplitude> branch_components(const EntangledState& state, int wing,
                                         int value) {
  const int other = 1 - wing;
  std::vector<Amplitude> out(size_t(state.dims()[other]));
  for (size_t i = 0; i < state.size(); ++i) {
    if (state.digit(i, wing) == value) out[size_t(state.digit(i, other))] = state.amp(i);
  }
  return out;
}

std::vector<Amplitude> wing_effective_amplitudes(const EntangledState& state, int wing) {
  std::vector<Amplitude> eff(size_t(state.dims()[wing]));
  for (int v = 0; v < state.dims()[wing]; ++v) {
    eff[size_t(v)] = effective_amplitude(branch_components(state, wing, v));
  }
  return eff;
}

void require_two_wings(const EntangledState& state) {
  if (state.subsystem_count() != 2) {
    throw UnsupportedScenario("signaling analysis requires a two-subsystem state");
  }
}

}  // namespace

ProbabilityRule ProbabilityRule::from_string(const std::string& name, double k) {
  if (name == "born") return born();
  if (name == "abs-amplitude") return {RuleKind::kAbsAmplitude, 2.0};
  if (name == "equal-nonzero") return {RuleKind::kEqualNonzero, 2.0};
  if (name == "max-deterministic") return {RuleKind::kMaxDeterministic, 2.0};
  if (name == "cosine-angle") return {RuleKind::kCosineAngle, 2.0};
  if (name == "power-law") return power_law(k);
  throw ValidationError("unknown probability rule: " + name);
}

std::string ProbabilityRule::name() const {
  switch (kind) {
    case RuleKind::kBorn: return "born";
    case RuleKind::kAbsAmplitude: return "abs-amplitude";
    case RuleKind::kEqualNonzero: return "equal-nonzero";
    case RuleKind::kMaxDeterministic: return "max-deterministic";
    case RuleKind::kCosineAngle: return "cosine-angle";
    case RuleKind::kPowerLaw: return "power-law";
  }
  return "unknown";
}

std::vector<double> outcome_weights(const ProbabilityRule& rule,
                                    const std::vector<Amplitude>& amps) {
  if (amps.empty()) throw DomainError("no amplitudes to assign probabilities to");
  std::vector<double> w(amps.size(), 0.0);
  if (rule.kind == RuleKind::kMaxDeterministic) {
    size_t best = amps.size();
    double best_mag = kSupportTol;
    for (size_t i = 0; i < amps.size(); ++i) {
      if (std::abs(amps[i]) > best_mag) {  // strict: ties keep the lowest index
        best_mag = std::abs(amps[i]);
        best = i;
      }
    }
    if (best == amps.size()) throw DomainError("zero amplitude vector");
    w[best] = 1.0;
    return w;
  }
  for (size_t i = 0; i < amps.size(); ++i) {
    const double mag = std::abs(amps[i]);
    if (mag <= kSupportTol) continue;
    switch (rule.kind) {
      case RuleKind::kBorn: w[i] = mag * mag; break;
      case RuleKind::kAbsAmplitude: w[i] = mag; break;
      case RuleKind::kEqualNonzero: w[i] = 1.0; break;
      case RuleKind::kCosineAngle: w[i] = (1.0 + std::cos(std::arg(amps[i]))) / 2.0; break;
      case RuleKind::kPowerLaw:
        if (!(rule.power > 0.0)) throw ValidationError("power-law exponent must be > 0");
        w[i] = std::pow(mag, rule.power);
        break;
      case RuleKind::kMaxDeterministic: break;  // handled above
    }
  }
  double sum = 0.0;
  for (double x : w) sum += x;
  if (!(sum > 0.0)) throw DomainError("rule assigns zero weight to every branch");
  for (double& x : w) x /= sum;
  return w;
}

SignalingReport marginal_gap(const ProbabilityRule& rule, const EntangledState& state,
                             int observed_wing,
                             const std::vector<BasisRotation>& probe_bases) {
  require_two_wings(state);
  if (observed_wing != 0 && observed_wing != 1) {
    throw ValidationError("observed wing must be 0 or 1");
  }
  const int far = 1 - observed_wing;
  if (state.dims()[far] != 2) {
    throw UnsupportedScenario("far wing must be a qubit to probe bases");
  }
  if (probe_bases.empty()) throw ValidationError("at least one probe basis is required");
  SignalingReport report;
  report.rule = rule;
  for (size_t b = 0; b < probe_bases.size(); ++b) {
    if (probe_bases[b].subsystem != far) {
      throw ValidationError("probe basis must target the far wing");
    }
    const EntangledState rotated = rotate_subsystem(state, probe_bases[b]);
    const std::vector<double> direct =
        outcome_weights(rule, wing_effective_amplitudes(rotated, observed_wing));
    const std::vector<double> far_weights =
        outcome_weights(rule, wing_effective_amplitudes(rotated, far));
    std::vector<double> averaged(direct.size(), 0.0);
    for (int i = 0; i < rotated.dims()[far]; ++i) {
      if (far_weights[size_t(i)] <= 0.0) continue;
      std::vector<Amplitude> cond = branch_components(rotated, far, i);
      double norm = 0.0;
      for (const Amplitude& c : cond) norm += std::norm(c);
      norm = std::sqrt(norm);
      if (norm <= kSupportTol) {
        throw DomainError("rule gives weight to a branch with no amplitude");
      }
      for (Amplitude& c : cond) c /= norm;
      const std::vector<double> cw = outcome_weights(rule, cond);
      for (size_t j = 0; j < averaged.size(); ++j) {
        averaged[j] += far_weights[size_t(i)] * cw[j];
      }
    }
    const double gap = stats::total_variation(direct, averaged);
    if (b == 0 || gap > report.max_marginal_gap) {
      report.max_marginal_gap = gap;
      report.witness_probe = b;
      report.unconditioned = direct;
      report.averaged = averaged;
    }
  }
  return report;
}

std::vector<double> joint_under_rule(const ProbabilityRule& rule,
                                     const EntangledState& state, int first_wing) {
  require_two_wings(state);
  if (first_wing != 0 && first_wing != 1) throw ValidationError("wing must be 0 or 1");
  const int second = 1 - first_wing;
  const std::vector<double> first_weights =
      outcome_weights(rule, wing_effective_amplitudes(state, first_wing));
  const size_t d0 = size_t(state.dims()[0]);
  const size_t d1 = size_t(state.dims()[1]);
  std::vector<double> joint(d0 * d1, 0.0);
  for (int i = 0; i < state.dims()[first_wing]; ++i) {
    if (first_weights[size_t(i)] <= 0.0) continue;
    std::vector<Amplitude> cond = branch_components(state, first_wing, i);
    double norm = 0.0;
    for (const Amplitude& c : cond) norm += std::norm(c);
    norm = std::sqrt(norm);
    if (norm <= kSupportTol) {
      throw DomainError("rule gives weight to a branch with no amplitude");
    }
    for (Amplitude& c : cond) c /= norm;
    const std::vector<double> cw = outcome_weights(rule, cond);
    for (int j = 0; j < state.dims()[second]; ++j) {
      const size_t row = size_t(first_wing == 0 ? i : j);
      const size_t col = size_t(first_wing == 0 ? j : i);
      joint[row * d1 + col] = first_weights[size_t(i)] * cw[size_t(j)];
    }
  }
  return joint;
}

namespace {

EntangledState singlet_form(Amplitude a, Amplitude b) {
  return EntangledState({2, 2}, {{"0", "1"}, {"0", "1"}},
                        {Amplitude{0.0, 0.0}, a, b, Amplitude{0.0, 0.0}});
}

BasisRotation probe(double gamma_sq, int subsystem) {
  return BasisRotation{subsystem, Amplitude{std::sqrt(gamma_sq), 0.0},
                       Amplitude{std::sqrt(1.0 - gamma_sq), 0.0}, "u", "v"};
}

}  // namespace

std::vector<RuleWitness> pinned_witnesses() {
  const double r2 = 1.0 / std::sqrt(2.0);
  const double r3 = 1.0 / std::sqrt(3.0);
  std::vector<RuleWitness> out;
  // Tilted anti-correlated pair: magnitude-proportional rules leak through
  // unequal branch weights. The balanced pair is gapless for these rules.
  out.push_back(RuleWitness{ProbabilityRule::from_string("abs-amplitude"),
                            singlet_form(std::sqrt(0.3), -std::sqrt(0.7)),
                            {probe(0.2, 0)},
                            1,
                            "tilted anti-correlated pair, far basis gamma^2=0.2"});
  // Three-component state: conditioning changes which branches are live.
  out.push_back(RuleWitness{ProbabilityRule::from_string("equal-nonzero"),
                            EntangledState({2, 2}, {{"0", "1"}, {"0", "1"}},
                                           {r3, r3, r3, Amplitude{0.0, 0.0}}),
                            {BasisRotation::identity(0)},
                            1,
                            "three-component state, conditioning kills a branch"});
  // Balanced pair: the far outcome tie resolves to a branch whose dominant
  // component differs from the dominant unconditioned branch.
  out.push_back(RuleWitness{ProbabilityRule::from_string("max-deterministic"),
                            singlet_form(r2, -r2),
                            {probe(0.8, 0)},
                            1,
                            "balanced anti-correlated pair, far basis gamma^2=0.8"});
  // Balanced pair with the sign pattern exposed to the phase-sensitive rule.
  out.push_back(RuleWitness{ProbabilityRule::from_string("cosine-angle"),
                            singlet_form(r2, -r2),
                            {BasisRotation::half(0)},
                            1,
                            "balanced anti-correlated pair, mixing far basis"});
  return out;
}

namespace {

double gaussian(const TrialRng& rng, StreamTag tag, uint32_t& idx) {
  const double u1 = 1.0 - rng.uniform(tag, idx++);
  const double u2 = rng.uniform(tag, idx++);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

Amplitude random_amp(const TrialRng& rng, uint32_t& idx) {
  const double re = gaussian(rng, StreamTag::kProbe, idx);
  const double im = gaussian(rng, StreamTag::kProbe, idx);
  return Amplitude{re, im};
}

}  // namespace

UniquenessScan born_uniqueness_scan(const std::vector<double>& k_grid,
                                    uint64_t n_states, uint64_t seed) {
  if (k_grid.empty()) throw ValidationError("empty exponent grid");
  std::vector<EntangledState> states;
  std::vector<std::vector<BasisRotation>> probes;
  // Pinned witness first so the scan is anchored by a known leaky point.
  states.push_back(singlet_form(std::sqrt(0.3), -std::sqrt(0.7)));
  probes.push_back({probe(0.2, 0), probe(0.8, 0)});
  for (uint64_t s = 0; s < n_states; ++s) {
    const TrialRng rng(seed, uint32_t(s));
    uint32_t idx = 0;
    std::vector<Amplitude> amps(4);
    double norm = 0.0;
    for (Amplitude& a : amps) {
      a = random_amp(rng, idx);
      norm += std::norm(a);
    }
    norm = std::sqrt(norm);
    for (Amplitude& a : amps) a /= norm;
    states.push_back(EntangledState({2, 2}, {{"0", "1"}, {"0", "1"}}, std::move(amps)));
    std::vector<BasisRotation> bases;
    for (int b = 0; b < 2; ++b) {
      Amplitude g = random_amp(rng, idx);
      Amplitude d = random_amp(rng, idx);
      const double n2 = std::sqrt(std::norm(g) + std::norm(d));
      g /= n2;
      d /= n2;
      bases.push_back(BasisRotation{0, g, d, "u", "v"});
    }
    probes.push_back(std::move(bases));
  }
  UniquenessScan scan;
  scan.states_sampled = states.size();
  for (double k : k_grid) {
    PowerScanPoint point{k, 0.0};
    for (size_t s = 0; s < states.size(); ++s) {
      const SignalingReport r =
          marginal_gap(ProbabilityRule::power_law(k), states[s], 1, probes[s]);
      point.max_gap = std::max(point.max_gap, r.max_marginal_gap);
    }
    scan.points.push_back(point);
  }
  for (size_t s = 0; s < states.size(); ++s) {
    const SignalingReport r =
        marginal_gap(ProbabilityRule::born(), states[s], 1, probes[s]);
    scan.born_max_gap = std::max(scan.born_max_gap, r.max_marginal_gap);
  }
  return scan;
}

}  // namespace cwalk
