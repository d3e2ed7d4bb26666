#include "cwalk/collapse.hpp"

#include <algorithm>
#include <cmath>

#include "cwalk/errors.hpp"

namespace cwalk {

void ShiftParams::validate() const {
  // d = 0 is legal and means "linear evolution, shifts disabled"; only
  // fixed-step walks terminate with it.
  if (!(d >= 0.0) || !(d < 1.0)) throw ValidationError("shift size d must be in [0, 1)");
  if (variable_step && 1.5 * d >= 1.0) {
    throw ValidationError("variable-step mode needs 3d/2 < 1");
  }
  if (!(absorb_tol > 0.0) || absorb_tol > 1e-3) {
    throw ValidationError("absorption tolerance must be in (0, 1e-3]");
  }
}

namespace {

struct StepOutcome {
  double t = 0.0;       // target density
  double eff = 0.0;     // magnitude actually applied
  bool clamped = false;
};

// One density move shared by every walk flavor: p -> p + dir*size. When the
// drawn size would cross a boundary, the effective magnitude becomes
// min(p, q) for both directions: the boundary-ward draw lands exactly on the
// nearer boundary and the opposite draw recedes by the same amount. Keeping
// the two magnitudes equal keeps E[p] exactly invariant under the fair
// direction draw for any step-size sequence; truncating only the
// boundary-ward draw would bias absorption away from the nearer boundary by
// O(d). Reaching a boundary exactly is a touch, not a truncation.
inline StepOutcome move_density(double p, int dir, double size) {
  StepOutcome s;
  s.eff = size;
  if (p - size < 0.0 || p + size > 1.0) {
    s.clamped = true;
    s.eff = std::min(p, 1.0 - p);
  }
  s.t = p + dir * s.eff;
  if (s.clamped) s.t = std::clamp(s.t, 0.0, 1.0);
  return s;
}

inline double step_size_for(const ShiftParams& params, const TrialRng& rng, uint64_t id) {
  if (!params.variable_step) return params.d;
  return params.d * (0.5 + rng.uniform(StreamTag::kStepSize, id));
}

}  // namespace

ShiftResult apply_shift(const EntangledState& state, const Bifurcation& bif,
                        int direction, const ShiftParams& params, double step_size) {
  params.validate();
  if (direction != 1 && direction != -1) throw ValidationError("direction must be +-1");
  if (bif.mask.size() != state.size()) {
    throw DomainError("bifurcation built for another state size");
  }
  const double p = bif.p;
  const double q = 1.0 - p;
  if (p <= params.absorb_tol || p >= 1.0 - params.absorb_tol) {
    return ShiftResult{state, 0.0, p, false, true};
  }
  const double size = step_size < 0.0 ? params.d : step_size;
  const StepOutcome mv = move_density(p, direction, size);
  const double fp = std::sqrt(mv.t / p);
  const double fq = std::sqrt((1.0 - mv.t) / q);
  std::vector<Amplitude> out(state.size());
  for (size_t i = 0; i < state.size(); ++i) {
    out[i] = state.amps()[i] * (bif.mask[i] ? fp : fq);
  }
  EntangledState next(state.dims(), state.labels(), std::move(out));
  return ShiftResult{std::move(next), mv.eff, mv.t, mv.clamped, false};
}

double induced_step(const EntangledState& state, const Bifurcation& bif,
                    const BasisRotation& rot, double d) {
  if (!(d > 0.0) || !(d < 1.0)) throw ValidationError("shift size d must be in (0, 1)");
  rot.validate();
  if (state.subsystem_count() != 2 || state.dims()[0] != 2 || state.dims()[1] != 2) {
    throw UnsupportedScenario("induced_step expects a two-qubit state");
  }
  if (rot.subsystem != 1) {
    throw UnsupportedScenario("induced_step expects the rotation on subsystem 1");
  }
  // Anti-correlated support: a|0>|1> + b|1>|0>.
  if (std::abs(state.amps()[0]) > kAlgebraicTol ||
      std::abs(state.amps()[3]) > kAlgebraicTol) {
    throw UnsupportedScenario("induced_step expects the anti-correlated two-qubit form");
  }
  if (bif.mask.size() != state.size()) {
    throw DomainError("bifurcation built for another state size");
  }
  int value = -1;
  for (int v = 0; v < 2; ++v) {
    const Bifurcation ref = Bifurcation::subsystem_branch(state, 0, v);
    if (ref.mask == bif.mask) {
      value = v;
      break;
    }
  }
  if (value < 0) {
    throw UnsupportedScenario("induced_step expects a basis branch of subsystem 0");
  }
  const double diff = std::norm(rot.delta) - std::norm(rot.gamma);
  return (value == 0 ? d : -d) * diff;
}

OutcomeBranch OutcomeBranch::subsystem_value(const EntangledState& state, std::string id,
                                             int subsystem, int value) {
  Bifurcation b = Bifurcation::subsystem_branch(state, subsystem, value);
  return OutcomeBranch{std::move(id), std::move(b.mask)};
}

OutcomeBranch OutcomeBranch::from_indices(const EntangledState& state, std::string id,
                                          std::vector<size_t> indices) {
  Bifurcation b = Bifurcation::from_indices(state, indices);
  return OutcomeBranch{std::move(id), std::move(b.mask)};
}

double OutcomeBranch::density(const EntangledState& state) const {
  if (mask.size() != state.size()) throw DomainError("branch built for another state size");
  double sum = 0.0;
  for (size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) sum += std::norm(state.amps()[i]);
  }
  return sum;
}

std::optional<StreamStep> FixedBifurcationStream::advance(EntangledState& state,
                                                          const TrialRng&) {
  if (count_ >= limit_) return std::nullopt;
  StreamStep s;
  s.interaction_id = uint32_t(id_base_ + count_);
  s.bifurcation = Bifurcation::subsystem_branch(state, subsystem_, value_);
  ++count_;
  return s;
}

DetectorSelectionStream::DetectorSelectionStream(int subsystem, std::vector<double> weights)
    : subsystem_(subsystem), cumulative_(cumulative_weights(weights)) {}

std::optional<StreamStep> DetectorSelectionStream::advance(EntangledState& state,
                                                           const TrialRng& rng) {
  const double u = rng.uniform(StreamTag::kSelection, count_);
  const int j = pick_weighted(u, cumulative_);
  StreamStep s;
  s.interaction_id = uint32_t(count_);
  s.bifurcation = Bifurcation::subsystem_branch(state, subsystem_, j);
  ++count_;
  return s;
}

std::vector<double> cumulative_weights(const std::vector<double>& weights) {
  if (weights.empty()) throw ValidationError("weights must be non-empty");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ValidationError("weights must be non-negative");
    sum += w;
  }
  if (!(sum > 0.0)) throw ValidationError("weights must not all be zero");
  std::vector<double> cum(weights.size());
  double acc = 0.0;
  for (size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i] / sum;
    cum[i] = acc;
  }
  cum.back() = 1.0;
  return cum;
}

int pick_weighted(double u, const std::vector<double>& cumulative) {
  for (size_t i = 0; i < cumulative.size(); ++i) {
    if (u < cumulative[i]) return int(i);
  }
  return int(cumulative.size()) - 1;
}

namespace {

// Zero everything outside the branch and renormalize the survivor exactly.
EntangledState project_to_branch(const EntangledState& state, const OutcomeBranch& branch,
                                 double density) {
  const double scale = 1.0 / std::sqrt(density);
  std::vector<Amplitude> out(state.size(), Amplitude{0.0, 0.0});
  for (size_t i = 0; i < state.size(); ++i) {
    if (branch.mask[i]) out[i] = state.amps()[i] * scale;
  }
  return EntangledState(state.dims(), state.labels(), std::move(out));
}

}  // namespace

EntangledState project_to_mask(const EntangledState& state,
                               const std::vector<uint8_t>& mask) {
  if (mask.size() != state.size()) throw ValidationError("mask length mismatch");
  double density = 0.0;
  for (size_t i = 0; i < state.size(); ++i) {
    if (mask[i]) density += std::norm(state.amps()[i]);
  }
  if (!(density > 0.0)) throw DomainError("projection mask carries no density");
  const double scale = 1.0 / std::sqrt(density);
  std::vector<Amplitude> out(state.size(), Amplitude{0.0, 0.0});
  for (size_t i = 0; i < state.size(); ++i) {
    if (mask[i]) out[i] = state.amps()[i] * scale;
  }
  return EntangledState(state.dims(), state.labels(), std::move(out));
}

WalkResult run_collapse(EntangledState state, InteractionStream& stream,
                        const ShiftParams& params, const TrialRng& rng,
                        const std::vector<OutcomeBranch>& branches,
                        const RunOptions& opts) {
  params.validate();
  if (branches.empty()) throw ValidationError("run_collapse needs at least one outcome branch");
  WalkResult r{std::move(state), {}};
  WalkTrace& tr = r.trace;
  DirectionStream dirs(rng);
  for (;;) {
    bool absorbed = false;
    for (const OutcomeBranch& b : branches) {
      const double dens = b.density(r.state);
      if (dens >= 1.0 - params.absorb_tol) {
        r.state = project_to_branch(r.state, b, dens);
        tr.outcome = b.id;
        tr.complete = true;
        absorbed = true;
        break;
      }
    }
    if (absorbed) break;
    if (tr.step_count >= opts.max_steps) break;
    auto s = stream.advance(r.state, rng);
    if (!s) break;
    const int dir = dirs.at(s->interaction_id);
    const double size = step_size_for(params, rng, s->interaction_id);
    ShiftResult res = apply_shift(r.state, s->bifurcation, dir, params, size);
    if (opts.record_steps) {
      tr.steps.push_back(WalkStep{s->interaction_id, dir, res.effective_d,
                                  s->bifurcation.p, res.clamped});
    }
    ++tr.step_count;
    if (res.noop) {
      ++tr.noop_count;
      continue;
    }
    if (res.clamped) ++tr.clamp_count;
    r.state = std::move(res.state);
  }
  for (const OutcomeBranch& b : branches) {
    tr.final_densities.emplace_back(b.id, b.density(r.state));
  }
  return r;
}

WalkResult run_fixed_steps(EntangledState state, InteractionStream& stream,
                           const ShiftParams& params, const TrialRng& rng,
                           uint64_t n_steps, const RunOptions& opts) {
  params.validate();
  WalkResult r{std::move(state), {}};
  WalkTrace& tr = r.trace;
  tr.complete = true;
  DirectionStream dirs(rng);
  for (uint64_t k = 0; k < n_steps; ++k) {
    auto s = stream.advance(r.state, rng);
    if (!s) {
      tr.complete = false;
      break;
    }
    const int dir = dirs.at(s->interaction_id);
    const double size = step_size_for(params, rng, s->interaction_id);
    ShiftResult res = apply_shift(r.state, s->bifurcation, dir, params, size);
    if (res.noop) {
      tr.absorbed_early = true;
      break;
    }
    if (opts.record_steps) {
      tr.steps.push_back(WalkStep{s->interaction_id, dir, res.effective_d,
                                  s->bifurcation.p, res.clamped});
    }
    ++tr.step_count;
    if (res.clamped) ++tr.clamp_count;
    r.state = std::move(res.state);
    if (res.p_after <= params.absorb_tol || res.p_after >= 1.0 - params.absorb_tol) {
      tr.absorbed_early = true;
      break;
    }
  }
  return r;
}

ScalarWalkResult scalar_collapse(double p0, const ShiftParams& params, const TrialRng& rng,
                                 uint32_t id_base, uint64_t max_steps) {
  params.validate();
  ScalarWalkResult r;
  r.p = p0;
  DirectionStream dirs(rng);
  const double tol = params.absorb_tol;
  for (;;) {
    if (r.p >= 1.0 - tol) {
      r.upper = true;
      r.complete = true;
      break;
    }
    if (r.p <= tol) {
      r.complete = true;
      break;
    }
    if (r.steps >= max_steps) break;
    const uint64_t id = id_base + r.steps;
    const int dir = dirs.at(id);
    const double size = step_size_for(params, rng, id);
    const StepOutcome mv = move_density(r.p, dir, size);
    if (mv.clamped) ++r.clamps;
    r.p = mv.t;
    ++r.steps;
  }
  return r;
}

ScalarWalkResult scalar_fixed_steps(double p0, const ShiftParams& params,
                                    const TrialRng& rng, uint64_t n_steps,
                                    uint32_t id_base) {
  params.validate();
  ScalarWalkResult r;
  r.p = p0;
  r.complete = true;
  DirectionStream dirs(rng);
  const double tol = params.absorb_tol;
  for (uint64_t k = 0; k < n_steps; ++k) {
    if (r.p <= tol || r.p >= 1.0 - tol) {
      r.absorbed_early = true;
      break;
    }
    const uint64_t id = id_base + k;
    const int dir = dirs.at(id);
    const double size = step_size_for(params, rng, id);
    const StepOutcome mv = move_density(r.p, dir, size);
    if (mv.clamped) ++r.clamps;
    r.p = mv.t;
    ++r.steps;
  }
  r.upper = r.p >= 1.0 - tol;
  return r;
}

MultiWalkResult multi_outcome_walk(std::vector<double> densities,
                                   const std::vector<double>& weights,
                                   const ShiftParams& params, const TrialRng& rng,
                                   uint64_t max_steps) {
  params.validate();
  if (densities.size() != weights.size()) {
    throw ValidationError("densities and selection weights must have equal length");
  }
  const std::vector<double> cum = cumulative_weights(weights);
  MultiWalkResult r;
  r.densities = std::move(densities);
  DirectionStream dirs(rng);
  const double tol = params.absorb_tol;
  for (;;) {
    for (size_t i = 0; i < r.densities.size(); ++i) {
      if (r.densities[i] >= 1.0 - tol) {
        r.outcome = int(i);
        r.complete = true;
        break;
      }
    }
    if (r.complete) break;
    if (r.steps >= max_steps) break;
    const double u = rng.uniform(StreamTag::kSelection, r.steps);
    const int j = pick_weighted(u, cum);
    const int dir = dirs.at(r.steps);
    const double size = step_size_for(params, rng, r.steps);
    const double p = r.densities[j];
    if (p <= tol || p >= 1.0 - tol) {
      ++r.noops;
      ++r.steps;
      continue;
    }
    const StepOutcome mv = move_density(p, dir, size);
    if (mv.clamped) ++r.clamps;
    const double factor = (1.0 - mv.t) / (1.0 - p);
    for (size_t i = 0; i < r.densities.size(); ++i) {
      if (int(i) != j) r.densities[i] *= factor;
    }
    r.densities[j] = mv.t;
    ++r.steps;
  }
  return r;
}

}  // namespace cwalk
