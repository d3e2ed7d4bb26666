#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

namespace cwalk::oracle {

// Exact results for the clamped +-d density walk, computed by routes
// independent of the Monte Carlo engine: the absorption problem is solved as
// a tridiagonal linear system on the step lattice, and fixed-step ensembles
// by evolving the exact probability mass. Both require an aligned lattice
// (1/d and p0/d integral, so the walk lives on {0, d, 2d, ..., 1} and never
// truncates a step); off-lattice starts are refused with ValidationError
// because symmetric truncation moves them onto a fresh offset every time it
// fires, so no finite chain describes them. Instances beyond the state
// limits are refused with SizeLimitError.

struct MarkovAbsorption {
  double prob_upper = 0.0;     // probability of absorbing at density 1
  double expected_steps = 0.0;
  size_t interior_states = 0;
};

MarkovAbsorption markov_absorption(double p0, double d, size_t max_states = 100000);

// Probability mass after n steps: positions[0] = 0 and positions.back() = 1
// are absorbing, the rest is the reachable interior lattice from p0.
struct LatticeDistribution {
  std::vector<double> positions;
  std::vector<double> mass;
};

LatticeDistribution fixed_step_distribution(double p0, double d, uint64_t n_steps,
                                            size_t max_states = 100000);

// Ensemble moments of a fixed-step walk from p0: mean squared displacement
// and mean/variance of the per-term cross density
//   g(p) = (1 - 2 sqrt(p (1-p))) / 4,
// the density of one of the two mixed-basis cross terms when the two branch
// amplitudes are sqrt(p) and sqrt(1-p) with matching phases.
struct EraserMoments {
  double mean_sq_displacement = 0.0;
  double mean_deviant_per_term = 0.0;
  double var_deviant_per_term = 0.0;
  double absorbed_mass = 0.0;
};

EraserMoments eraser_moments(double p0, double d, uint64_t n_steps);

double cross_term_density_per_term(double p);  // g above

// Brute-force linear-extension oracle over a partial order given as
// predecessor bitmasks (preds[i] bit j set means j must precede i).
// Explicit depth-first enumeration, limited to 16 events.
uint64_t count_linear_extensions(const std::vector<uint32_t>& preds,
                                 uint64_t max_count = 10000000);
std::vector<std::vector<int>> enumerate_linear_extensions(const std::vector<uint32_t>& preds,
                                                          size_t max_list = 100000);

// Exact Born joint table for the anti-correlated two-qubit state
// a|0>|1> + b|1>|0> with the second subsystem read in the (gamma, delta)
// basis, computed from the expansion
//   a d*|0>|u> - a g|0>|v> + b g*|1>|u> + b d|1>|v>
// written out directly. Order: (0,u), (0,v), (1,u), (1,v).
std::array<double, 4> anti_correlated_joint_table(std::complex<double> a,
                                                  std::complex<double> b,
                                                  std::complex<double> gamma,
                                                  std::complex<double> delta);

}  // namespace cwalk::oracle
