#include <doctest.h>

#include <cmath>
#include <complex>
#include <memory>

#include "cwalk/collapse.hpp"
#include "cwalk/errors.hpp"
#include "cwalk/oracle.hpp"
#include "cwalk/stats.hpp"

using namespace cwalk;

namespace {

constexpr double kTol = 1e-12;

EntangledState tilted_qubit(double p0) {
  return EntangledState::qubit(Amplitude{std::sqrt(p0), 0.0},
                               Amplitude{std::sqrt(1.0 - p0), 0.0});
}

}  // namespace

TEST_CASE("shift parameters validate their ranges") {
  ShiftParams ok;
  CHECK_NOTHROW(ok.validate());
  ShiftParams zero;
  zero.d = 0.0;  // legal: shifts disabled
  CHECK_NOTHROW(zero.validate());
  ShiftParams neg;
  neg.d = -0.01;
  CHECK_THROWS_AS(neg.validate(), ValidationError);
  ShiftParams big;
  big.d = 1.0;
  CHECK_THROWS_AS(big.validate(), ValidationError);
  ShiftParams var;
  var.d = 0.7;
  var.variable_step = true;  // 3d/2 > 1
  CHECK_THROWS_AS(var.validate(), ValidationError);
  ShiftParams tol;
  tol.absorb_tol = 0.0;
  CHECK_THROWS_AS(tol.validate(), ValidationError);
}

TEST_CASE("apply_shift moves density and scales amplitudes by density ratios") {
  const EntangledState s = tilted_qubit(0.3);
  const Bifurcation bif = Bifurcation::subsystem_branch(s, 0, 0);
  ShiftParams params;
  params.d = 0.1;

  const ShiftResult up = apply_shift(s, bif, 1, params);
  CHECK(up.p_after == doctest::Approx(0.4).epsilon(kTol));
  CHECK(up.effective_d == doctest::Approx(0.1).epsilon(kTol));
  CHECK_FALSE(up.clamped);
  CHECK_FALSE(up.noop);
  CHECK(std::abs(up.state.amp(0)) ==
        doctest::Approx(std::sqrt(0.3) * std::sqrt(0.4 / 0.3)).epsilon(kTol));
  CHECK(std::abs(up.state.amp(1)) ==
        doctest::Approx(std::sqrt(0.7) * std::sqrt(0.6 / 0.7)).epsilon(kTol));
  CHECK(up.state.norm_sq() == doctest::Approx(1.0).epsilon(1e-10));

  const ShiftResult down = apply_shift(s, bif, -1, params);
  CHECK(down.p_after == doctest::Approx(0.2).epsilon(kTol));
}

TEST_CASE("apply_shift preserves phases and intra-component ratios") {
  const Amplitude a0 = std::polar(0.5, 0.3);
  const Amplitude a1 = std::polar(0.5, -1.2);
  const Amplitude b0 = std::polar(0.5, 2.0);
  const Amplitude b1 = std::polar(0.5, 0.9);
  const EntangledState s({2, 2}, {{"0", "1"}, {"0", "1"}}, {a0, a1, b0, b1});
  const Bifurcation bif = Bifurcation::subsystem_branch(s, 0, 0);
  ShiftParams params;
  params.d = 0.2;
  const ShiftResult res = apply_shift(s, bif, 1, params);
  // Ratios within the interacting set and within the complement are intact.
  CHECK(std::abs(res.state.amp(0) / res.state.amp(1) - a0 / a1) < kTol);
  CHECK(std::abs(res.state.amp(2) / res.state.amp(3) - b0 / b1) < kTol);
  // Phases of every component are untouched.
  for (size_t i = 0; i < 4; ++i) {
    CHECK(std::abs(std::arg(res.state.amp(i)) - std::arg(s.amp(i))) < kTol);
  }
}

TEST_CASE("boundary-crossing draws clamp to min(p, q)") {
  const EntangledState s = tilted_qubit(0.005);
  const Bifurcation bif = Bifurcation::subsystem_branch(s, 0, 0);
  ShiftParams params;
  params.d = 0.01;
  const ShiftResult res = apply_shift(s, bif, -1, params);
  CHECK(res.clamped);
  CHECK(res.effective_d == doctest::Approx(0.005).epsilon(kTol));
  CHECK(res.p_after == doctest::Approx(0.0).epsilon(kTol));

  // Reaching a boundary exactly is not a crossing, so no clamp.
  const EntangledState t = tilted_qubit(0.01);
  const Bifurcation tb = Bifurcation::subsystem_branch(t, 0, 0);
  const ShiftResult touch = apply_shift(t, tb, -1, params);
  CHECK_FALSE(touch.clamped);
  CHECK(touch.p_after == doctest::Approx(0.0).epsilon(kTol));

  // The truncation is symmetric: once the drawn size would cross a boundary,
  // the away-draw shrinks to min(p, q) too, which keeps the walk's mean
  // density exactly unchanged.
  const EntangledState u = tilted_qubit(0.03);
  const Bifurcation ub = Bifurcation::subsystem_branch(u, 0, 0);
  ShiftParams wide;
  wide.d = 0.05;
  const ShiftResult away = apply_shift(u, ub, 1, wide);
  CHECK(away.clamped);
  CHECK(away.effective_d == doctest::Approx(0.03).epsilon(kTol));
  CHECK(away.p_after == doctest::Approx(0.06).epsilon(kTol));
  CHECK(away.state.norm_sq() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("apply_shift on a settled bifurcation is a noop") {
  const EntangledState s = EntangledState::qubit(Amplitude{1.0, 0.0}, Amplitude{0.0, 0.0});
  const Bifurcation bif = Bifurcation::subsystem_branch(s, 0, 0);
  ShiftParams params;
  const ShiftResult res = apply_shift(s, bif, -1, params);
  CHECK(res.noop);
  CHECK(res.p_after == doctest::Approx(1.0).epsilon(kTol));
}

TEST_CASE("apply_shift validates direction and mask size") {
  const EntangledState s = tilted_qubit(0.3);
  const Bifurcation bif = Bifurcation::subsystem_branch(s, 0, 0);
  ShiftParams params;
  CHECK_THROWS_AS(apply_shift(s, bif, 0, params), ValidationError);
  const EntangledState other({2, 2}, {{"0", "1"}, {"0", "1"}},
                             {Amplitude{1.0, 0.0}, {}, {}, {}});
  CHECK_THROWS_AS(apply_shift(other, bif, 1, params), DomainError);
}

TEST_CASE("induced_step equals the recomputed rotated density shift exactly") {
  const Amplitude a = std::polar(std::sqrt(0.35), 0.4);
  const Amplitude b = std::polar(std::sqrt(0.65), -0.9);
  const EntangledState bare({2, 2}, {{"0", "1"}, {"0", "1"}},
                            {Amplitude{0.0, 0.0}, a, b, Amplitude{0.0, 0.0}});
  BasisRotation rot;
  rot.subsystem = 1;
  rot.gamma = std::polar(std::sqrt(0.2), 1.3);
  rot.delta = std::polar(std::sqrt(0.8), 0.2);
  const double d = 0.01;

  for (int value = 0; value < 2; ++value) {
    const Bifurcation bif = Bifurcation::subsystem_branch(bare, 0, value);
    const double formula = induced_step(bare, bif, rot, d);
    const double sign = value == 0 ? 1.0 : -1.0;
    CHECK(formula == doctest::Approx(sign * d * (0.8 - 0.2)).epsilon(kTol));

    ShiftParams params;
    params.d = d;
    const ShiftResult shifted = apply_shift(bare, bif, 1, params);
    const EntangledState before = rotate_subsystem(bare, rot);
    const EntangledState after = rotate_subsystem(shifted.state, rot);
    const Bifurcation ub = Bifurcation::subsystem_branch(before, 1, 0);
    const Bifurcation ua = Bifurcation::subsystem_branch(after, 1, 0);
    CHECK(std::abs((ua.p - ub.p) - formula) < kTol);
  }
  CHECK_THROWS_AS(
      induced_step(bare, Bifurcation::subsystem_branch(bare, 0, 0), rot, 0.0),
      ValidationError);
}

TEST_CASE("scalar binary walk reproduces the generic engine draw for draw") {
  ShiftParams params;
  params.d = 0.05;
  const double p0 = 0.37;  // off the step lattice on purpose
  for (uint32_t trial = 0; trial < 30; ++trial) {
    const TrialRng rng(424242, trial);
    const ScalarWalkResult fast = scalar_collapse(p0, params, rng);

    EntangledState s = tilted_qubit(p0);
    FixedBifurcationStream stream(0, 0);
    const std::vector<OutcomeBranch> branches = {
        OutcomeBranch::subsystem_value(s, "up", 0, 0),
        OutcomeBranch::subsystem_value(s, "down", 0, 1)};
    const WalkResult full = run_collapse(s, stream, params, rng, branches);

    REQUIRE(full.trace.complete);
    REQUIRE(fast.complete);
    CHECK(full.trace.outcome.value() == (fast.upper ? "up" : "down"));
    CHECK(full.trace.step_count == fast.steps);
    // Outcome and step count are exact cross-engine invariants; the clamp
    // tally is not, because whether a near-boundary draw needs truncation is
    // decided at one-ulp scale and the amplitude-rescaling and
    // density-walking routes round those densities differently.
  }
}

TEST_CASE("scalar and generic walks agree in variable-step mode") {
  ShiftParams params;
  params.d = 0.05;
  params.variable_step = true;
  const double p0 = 0.61;
  for (uint32_t trial = 0; trial < 20; ++trial) {
    const TrialRng rng(171717, trial);
    const ScalarWalkResult fast = scalar_collapse(p0, params, rng);

    EntangledState s = tilted_qubit(p0);
    FixedBifurcationStream stream(0, 0);
    const std::vector<OutcomeBranch> branches = {
        OutcomeBranch::subsystem_value(s, "up", 0, 0),
        OutcomeBranch::subsystem_value(s, "down", 0, 1)};
    const WalkResult full = run_collapse(s, stream, params, rng, branches);
    CHECK(full.trace.outcome.value() == (fast.upper ? "up" : "down"));
    CHECK(full.trace.step_count == fast.steps);
  }
}

TEST_CASE("scalar fixed-step walk matches the generic fixed-step engine") {
  ShiftParams params;
  params.d = 0.01;
  for (uint32_t trial = 0; trial < 10; ++trial) {
    const TrialRng rng(555, trial);
    const ScalarWalkResult fast = scalar_fixed_steps(0.5, params, rng, 64);

    EntangledState s = tilted_qubit(0.5);
    FixedBifurcationStream stream(0, 0);
    const WalkResult full = run_fixed_steps(s, stream, params, rng, 64);
    const Bifurcation bif = Bifurcation::subsystem_branch(full.state, 0, 0);
    CHECK(std::abs(bif.p - fast.p) < 1e-9);
    CHECK(full.trace.step_count == fast.steps);
    CHECK(full.trace.absorbed_early == fast.absorbed_early);
  }
}

TEST_CASE("multi-outcome scalar walk matches the detector-selection stream") {
  const std::vector<double> densities = {0.2, 0.3, 0.5};
  const std::vector<double> weights = {0.6, 0.3, 0.1};
  ShiftParams params;
  params.d = 0.05;
  std::vector<Amplitude> amps;
  for (double p : densities) amps.push_back(Amplitude{std::sqrt(p), 0.0});

  for (uint32_t trial = 0; trial < 20; ++trial) {
    const TrialRng rng(909090, trial);
    const MultiWalkResult fast = multi_outcome_walk(densities, weights, params, rng);

    EntangledState s = EntangledState::single(amps, {"O0", "O1", "O2"});
    DetectorSelectionStream stream(0, weights);
    std::vector<OutcomeBranch> branches;
    for (int i = 0; i < 3; ++i) {
      branches.push_back(
          OutcomeBranch::subsystem_value(s, "O" + std::to_string(i), 0, i));
    }
    const WalkResult full = run_collapse(s, stream, params, rng, branches);
    REQUIRE(fast.complete);
    REQUIRE(full.trace.complete);
    CHECK(full.trace.outcome.value() == "O" + std::to_string(fast.outcome));
    CHECK(full.trace.step_count == fast.steps);
  }
}

TEST_CASE("absorption frequency and duration match the exact lattice oracle") {
  const double p0 = 0.3;
  ShiftParams params;
  params.d = 0.02;
  const auto exact = oracle::markov_absorption(p0, params.d);
  CHECK(exact.prob_upper == doctest::Approx(p0).epsilon(kTol));  // on-lattice start

  const uint64_t n = 20000;
  uint64_t upper = 0;
  uint64_t steps = 0;
  for (uint32_t trial = 0; trial < n; ++trial) {
    const ScalarWalkResult r = scalar_collapse(p0, params, TrialRng(20260822, trial));
    if (r.upper) ++upper;
    steps += r.steps;
  }
  const double sigma = stats::binomial_sigma(exact.prob_upper, n);
  CHECK(std::abs(double(upper) / double(n) - exact.prob_upper) < 4.0 * sigma);
  // Mean duration: loose 10% band around the exact expectation (525 here).
  CHECK(double(steps) / double(n) ==
        doctest::Approx(exact.expected_steps).epsilon(0.1));
}

TEST_CASE("d = 0 leaves densities in place") {
  ShiftParams params;
  params.d = 0.0;
  const TrialRng rng(7, 0);
  const ScalarWalkResult r = scalar_fixed_steps(0.42, params, rng, 100);
  CHECK(r.p == doctest::Approx(0.42).epsilon(kTol));
  CHECK(r.steps == 100);
  CHECK_FALSE(r.absorbed_early);
}

TEST_CASE("max_steps stops an unabsorbed walk") {
  ShiftParams params;
  params.d = 0.001;
  const TrialRng rng(7, 1);
  const ScalarWalkResult r = scalar_collapse(0.5, params, rng, 0, 50);
  CHECK_FALSE(r.complete);
  CHECK(r.steps == 50);
}

TEST_CASE("run_collapse projects the winner to exact unit density") {
  ShiftParams params;
  params.d = 0.1;
  const TrialRng rng(99, 2);
  EntangledState s = tilted_qubit(0.3);
  FixedBifurcationStream stream(0, 0);
  const std::vector<OutcomeBranch> branches = {
      OutcomeBranch::subsystem_value(s, "up", 0, 0),
      OutcomeBranch::subsystem_value(s, "down", 0, 1)};
  const WalkResult full = run_collapse(s, stream, params, rng, branches);
  REQUIRE(full.trace.complete);
  double winner = 0.0;
  for (const auto& [id, density] : full.trace.final_densities) {
    if (id == full.trace.outcome.value()) winner = density;
  }
  CHECK(winner == 1.0);  // exact renormalization after absorption
  CHECK(full.state.norm_sq() == doctest::Approx(1.0).epsilon(kTol));
}

TEST_CASE("project_to_mask zeroes the complement and renormalizes") {
  const EntangledState pair =
      correlate(tensor_extend(tilted_qubit(0.36), 2, "r"), 0, 1);
  const Bifurcation bif = Bifurcation::subsystem_branch(pair, 0, 0);
  const EntangledState kept = project_to_mask(pair, bif.mask);
  CHECK(std::abs(kept.amp(0)) == doctest::Approx(1.0).epsilon(kTol));
  CHECK(std::abs(kept.amp(3)) == doctest::Approx(0.0).epsilon(kTol));

  std::vector<uint8_t> empty(pair.size(), 0);
  empty[1] = 1;  // index with zero amplitude
  CHECK_THROWS_AS(project_to_mask(pair, empty), DomainError);
  CHECK_THROWS_AS(project_to_mask(pair, std::vector<uint8_t>{1}), ValidationError);
}

TEST_CASE("weighted pick uses cumulative boundaries consistently") {
  const auto cum = cumulative_weights({0.2, 0.3, 0.5});
  CHECK(pick_weighted(0.0, cum) == 0);
  CHECK(pick_weighted(0.19, cum) == 0);
  CHECK(pick_weighted(0.21, cum) == 1);
  CHECK(pick_weighted(0.49, cum) == 1);
  CHECK(pick_weighted(0.51, cum) == 2);
  CHECK(pick_weighted(0.999999, cum) == 2);
  CHECK_THROWS_AS(cumulative_weights({}), ValidationError);
  CHECK_THROWS_AS(cumulative_weights({0.0, 0.0}), ValidationError);
  CHECK_THROWS_AS(cumulative_weights({-1.0, 2.0}), ValidationError);
}
