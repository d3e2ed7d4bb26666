#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cwalk/rng.hpp"
#include "cwalk/state.hpp"
#include "cwalk/tolerances.hpp"

namespace cwalk {

// Parameters of the unbiased density shift. Direction probability is fixed at
// 1/2 by construction; the clamp rule (reduce the step to min(p, q) in both
// directions whenever the drawn size would cross a boundary, so the mean of p
// is preserved exactly) is the only out-of-range policy.
struct ShiftParams {
  double d = 0.01;             // 0 disables shifts (pure linear evolution)
  bool variable_step = false;  // per-step size drawn uniformly from [d/2, 3d/2]
  double absorb_tol = kAbsorbTol;

  void validate() const;  // 0 <= d < 1, tol sane
};

struct ShiftResult {
  EntangledState state;
  double effective_d = 0.0;  // magnitude of the applied shift
  double p_after = 0.0;
  bool clamped = false;
  bool noop = false;  // p was already at a boundary; distinct from an error
};

// Move density d from one side of the bifurcation to the other: amplitudes of
// the interacting set scale by sqrt(p'/p), the complement by sqrt(q'/q), so
// phases and intra-component ratios are untouched. direction is +1 (toward
// the interacting set) or -1. step_size < 0 means "use params.d".
ShiftResult apply_shift(const EntangledState& state, const Bifurcation& bif,
                        int direction, const ShiftParams& params,
                        double step_size = -1.0);

// Shift induced on the rotated-basis density of the far subsystem when the
// near subsystem takes a +d step. Defined for the two-qubit anti-correlated
// state a|0>|1> + b|1>|0> with bif a basis branch of subsystem 0 and rot on
// subsystem 1; returns d * (|delta|^2 - |gamma|^2) for the 0-branch and the
// negative for the 1-branch. Exact: applying the shift and recomputing the
// rotated density gives the same number.
double induced_step(const EntangledState& state, const Bifurcation& bif,
                    const BasisRotation& rot, double d);

// Named absorption target: a set of basis indices whose density reaching 1
// ends the walk.
struct OutcomeBranch {
  std::string id;
  std::vector<uint8_t> mask;

  static OutcomeBranch subsystem_value(const EntangledState& state, std::string id,
                                       int subsystem, int value);
  static OutcomeBranch from_indices(const EntangledState& state, std::string id,
                                    std::vector<size_t> indices);
  double density(const EntangledState& state) const;
};

struct StreamStep {
  uint32_t interaction_id = 0;
  Bifurcation bifurcation;
};

// Produces the sequence of entangling interactions a walk consumes. advance()
// may first evolve the state by the interaction's deterministic entangling map
// (tensor_extend + correlate), then reports the bifurcation the shift acts on.
// Exhausted streams return nullopt.
class InteractionStream {
 public:
  virtual ~InteractionStream() = default;
  virtual std::optional<StreamStep> advance(EntangledState& state, const TrialRng& rng) = 0;
};

// The same basis branch of one subsystem at every step (binary scenarios).
class FixedBifurcationStream : public InteractionStream {
 public:
  FixedBifurcationStream(int subsystem, int value, uint32_t id_base = 0,
                         uint64_t limit = std::numeric_limits<uint64_t>::max())
      : subsystem_(subsystem), value_(value), id_base_(id_base), limit_(limit) {}

  std::optional<StreamStep> advance(EntangledState& state, const TrialRng& rng) override;

 private:
  int subsystem_;
  int value_;
  uint32_t id_base_;
  uint64_t limit_;
  uint64_t count_ = 0;
};

// Each step picks one detector (one basis value of a subsystem) at random with
// the given weights and bifurcates that branch against the rest.
class DetectorSelectionStream : public InteractionStream {
 public:
  DetectorSelectionStream(int subsystem, std::vector<double> weights);

  std::optional<StreamStep> advance(EntangledState& state, const TrialRng& rng) override;

 private:
  int subsystem_;
  std::vector<double> cumulative_;
  uint64_t count_ = 0;
};

struct WalkStep {
  uint32_t interaction_id = 0;
  int direction = 0;
  double effective_d = 0.0;
  double p_before = 0.0;
  bool clamped = false;
};

struct WalkTrace {
  std::vector<WalkStep> steps;  // filled only when requested
  std::optional<std::string> outcome;
  std::vector<std::pair<std::string, double>> final_densities;
  uint64_t step_count = 0;
  uint64_t clamp_count = 0;
  uint64_t noop_count = 0;
  bool complete = false;        // false = walk ran out of interactions
  bool absorbed_early = false;  // fixed-step walk absorbed before n_steps
};

struct RunOptions {
  bool record_steps = false;
  uint64_t max_steps = std::numeric_limits<uint64_t>::max();
};

struct WalkResult {
  EntangledState state;
  WalkTrace trace;
};

// Run shifts until one outcome branch's density reaches 1 (within absorb_tol;
// the complement is then zeroed and the survivor renormalized exactly), the
// stream is exhausted (trace.complete = false), or max_steps is hit.
// Deterministic given (state, stream, params, rng).
WalkResult run_collapse(EntangledState state, InteractionStream& stream,
                        const ShiftParams& params, const TrialRng& rng,
                        const std::vector<OutcomeBranch>& branches,
                        const RunOptions& opts = {});

// Apply exactly n_steps shifts, or fewer if the stream's bifurcation absorbs
// first (trace.absorbed_early).
WalkResult run_fixed_steps(EntangledState state, InteractionStream& stream,
                           const ShiftParams& params, const TrialRng& rng,
                           uint64_t n_steps, const RunOptions& opts = {});

// ---------------------------------------------------------------------------
// Scalar fast paths. These walk branch densities directly instead of scaling
// amplitude vectors, drawing from the same keyed streams as the generic
// engine, so a trial reproduces the generic walk step for step (unit tests
// pin the equivalence). Used by the runner for large trial counts.

struct ScalarWalkResult {
  double p = 0.0;
  uint64_t steps = 0;
  uint64_t clamps = 0;
  bool upper = false;     // absorbed at p = 1
  bool complete = false;
  bool absorbed_early = false;
};

ScalarWalkResult scalar_collapse(double p0, const ShiftParams& params, const TrialRng& rng,
                                 uint32_t id_base = 0,
                                 uint64_t max_steps = std::numeric_limits<uint64_t>::max());

ScalarWalkResult scalar_fixed_steps(double p0, const ShiftParams& params,
                                    const TrialRng& rng, uint64_t n_steps,
                                    uint32_t id_base = 0);

struct MultiWalkResult {
  int outcome = -1;
  uint64_t steps = 0;
  uint64_t clamps = 0;
  uint64_t noops = 0;
  std::vector<double> densities;
  bool complete = false;
};

// Walk k mutually exclusive branch densities; each step bifurcates one
// weighted-selected branch against the rest.
MultiWalkResult multi_outcome_walk(std::vector<double> densities,
                                   const std::vector<double>& weights,
                                   const ShiftParams& params, const TrialRng& rng,
                                   uint64_t max_steps = std::numeric_limits<uint64_t>::max());

// Shared weighted pick so streams and fast paths select identically.
int pick_weighted(double u, const std::vector<double>& cumulative);
std::vector<double> cumulative_weights(const std::vector<double>& weights);

// Zero every amplitude outside the mask and renormalize the survivor.
// Throws DomainError if the mask carries no density.
EntangledState project_to_mask(const EntangledState& state,
                               const std::vector<uint8_t>& mask);

}  // namespace cwalk
