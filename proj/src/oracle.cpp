#include "cwalk/oracle.hpp"

#include <cmath>

#include "cwalk/errors.hpp"

namespace cwalk::oracle {

namespace {

// Interior lattice {d, 2d, ..., 1 - d} of the aligned +-d walk, ascending,
// with the index of the start state. Alignment means 1/d and p0/d are
// integral: every move then lands on the lattice or touches a boundary
// exactly, the truncation rule never fires, and the chain is the plain fair
// +-d walk absorbed at {0, 1}. An off-lattice start is refused because its
// first truncated step would move the walk onto a fresh offset, and no
// finite chain covers the states that generates.
struct AlignedLattice {
  std::vector<double> xs;
  size_t j0 = 0;
};

AlignedLattice aligned_lattice(double p0, double d, size_t max_states) {
  if (!(p0 > 0.0) || !(p0 < 1.0)) throw ValidationError("p0 must be in (0, 1)");
  if (!(d > 0.0) || d > 0.5) throw ValidationError("lattice oracle requires 0 < d <= 1/2");
  const double tol = 1e-9;
  const double cells = std::round(1.0 / d);
  if (std::abs(cells * d - 1.0) > tol) {
    throw ValidationError("exact lattice oracle requires a step size that divides the unit "
                          "interval evenly");
  }
  const double start = std::round(p0 / d);
  if (std::abs(start * d - p0) > tol || start < 1.0 || start > cells - 1.0) {
    throw ValidationError("exact lattice oracle requires a start density on the step lattice");
  }
  const size_t m = size_t(cells) - 1;
  if (m > max_states) {
    throw SizeLimitError("lattice has " + std::to_string(m) + " states; limit is " +
                         std::to_string(max_states));
  }
  AlignedLattice lat;
  lat.j0 = size_t(start) - 1;
  lat.xs.resize(m);
  for (size_t j = 0; j < m; ++j) {
    lat.xs[j] = p0 + (double(j + 1) - start) * d;
  }
  return lat;
}

// Solve the tridiagonal system  -1/2 u[j-1] + u[j] - 1/2 u[j+1] = rhs[j]
// with zero Dirichlet terms outside the range (they are folded into rhs).
std::vector<double> solve_tridiagonal_half(std::vector<double> rhs) {
  const size_t m = rhs.size();
  std::vector<double> diag(m, 1.0), upper(m, -0.5);
  for (size_t j = 1; j < m; ++j) {
    const double w = -0.5 / diag[j - 1];
    diag[j] -= w * upper[j - 1];
    rhs[j] -= w * rhs[j - 1];
  }
  std::vector<double> u(m);
  u[m - 1] = rhs[m - 1] / diag[m - 1];
  for (size_t j = m - 1; j-- > 0;) {
    u[j] = (rhs[j] - upper[j] * u[j + 1]) / diag[j];
  }
  return u;
}

}  // namespace

MarkovAbsorption markov_absorption(double p0, double d, size_t max_states) {
  const AlignedLattice lat = aligned_lattice(p0, d, max_states);
  const size_t m = lat.xs.size();
  const size_t j0 = lat.j0;
  std::vector<double> rhs(m, 0.0);
  rhs[m - 1] = 0.5;  // up-move from the top cell absorbs at 1
  const std::vector<double> u = solve_tridiagonal_half(std::move(rhs));
  std::vector<double> ones(m, 1.0);
  const std::vector<double> e = solve_tridiagonal_half(std::move(ones));
  return MarkovAbsorption{u[j0], e[j0], m};
}

LatticeDistribution fixed_step_distribution(double p0, double d, uint64_t n_steps,
                                            size_t max_states) {
  const AlignedLattice lat = aligned_lattice(p0, d, max_states);
  const std::vector<double>& xs = lat.xs;
  const size_t m = xs.size();
  if (n_steps > 0 && m > 0 && n_steps * m > 100000000ull) {
    throw SizeLimitError("fixed-step evolution too large: " + std::to_string(n_steps) +
                         " steps over " + std::to_string(m) + " states");
  }
  const size_t j0 = lat.j0;
  std::vector<double> mass(m, 0.0), next(m, 0.0);
  mass[j0] = 1.0;
  double at0 = 0.0, at1 = 0.0;
  for (uint64_t step = 0; step < n_steps; ++step) {
    std::fill(next.begin(), next.end(), 0.0);
    for (size_t j = 0; j < m; ++j) {
      const double half = 0.5 * mass[j];
      if (half == 0.0) continue;
      if (j == 0) at0 += half; else next[j - 1] += half;
      if (j == m - 1) at1 += half; else next[j + 1] += half;
    }
    mass.swap(next);
  }
  LatticeDistribution out;
  out.positions.reserve(m + 2);
  out.mass.reserve(m + 2);
  out.positions.push_back(0.0);
  out.mass.push_back(at0);
  for (size_t j = 0; j < m; ++j) {
    out.positions.push_back(xs[j]);
    out.mass.push_back(mass[j]);
  }
  out.positions.push_back(1.0);
  out.mass.push_back(at1);
  return out;
}

double cross_term_density_per_term(double p) {
  // Branch amplitudes sqrt(p), sqrt(1-p) with equal phases; each mixed-basis
  // cross component has amplitude (sqrt(p) - sqrt(1-p))/2.
  const double q = 1.0 - p;
  return (1.0 - 2.0 * std::sqrt(p * q)) / 4.0;
}

EraserMoments eraser_moments(double p0, double d, uint64_t n_steps) {
  const LatticeDistribution dist = fixed_step_distribution(p0, d, n_steps);
  EraserMoments em;
  double mean_g = 0.0, mean_g2 = 0.0, disp2 = 0.0;
  for (size_t j = 0; j < dist.positions.size(); ++j) {
    const double x = dist.positions[j];
    const double w = dist.mass[j];
    const double g = cross_term_density_per_term(x);
    mean_g += w * g;
    mean_g2 += w * g * g;
    disp2 += w * (x - p0) * (x - p0);
  }
  em.mean_sq_displacement = disp2;
  em.mean_deviant_per_term = mean_g;
  em.var_deviant_per_term = mean_g2 - mean_g * mean_g;
  em.absorbed_mass = dist.mass.front() + dist.mass.back();
  return em;
}

namespace {

void extensions_dfs(const std::vector<uint32_t>& preds, uint32_t used, uint32_t full,
                    std::vector<int>& prefix, uint64_t& count, uint64_t max_count,
                    std::vector<std::vector<int>>* sink, size_t max_list) {
  if (used == full) {
    ++count;
    if (count > max_count) throw SizeLimitError("linear extension count exceeds limit");
    if (sink) {
      if (sink->size() >= max_list) throw SizeLimitError("linear extension list exceeds limit");
      sink->push_back(prefix);
    }
    return;
  }
  const int n = int(preds.size());
  for (int i = 0; i < n; ++i) {
    const uint32_t bit = uint32_t(1) << i;
    if ((used & bit) || (preds[i] & ~used)) continue;
    prefix.push_back(i);
    extensions_dfs(preds, used | bit, full, prefix, count, max_count, sink, max_list);
    prefix.pop_back();
  }
}

void check_extension_input(const std::vector<uint32_t>& preds) {
  if (preds.size() > 16) {
    throw SizeLimitError("extension oracle handles at most 16 events");
  }
}

}  // namespace

uint64_t count_linear_extensions(const std::vector<uint32_t>& preds, uint64_t max_count) {
  check_extension_input(preds);
  uint64_t count = 0;
  std::vector<int> prefix;
  const uint32_t full = preds.empty() ? 0 : (uint32_t(1) << preds.size()) - 1;
  extensions_dfs(preds, 0, full, prefix, count, max_count, nullptr, 0);
  return count;
}

std::vector<std::vector<int>> enumerate_linear_extensions(const std::vector<uint32_t>& preds,
                                                          size_t max_list) {
  check_extension_input(preds);
  std::vector<std::vector<int>> out;
  uint64_t count = 0;
  std::vector<int> prefix;
  const uint32_t full = preds.empty() ? 0 : (uint32_t(1) << preds.size()) - 1;
  extensions_dfs(preds, 0, full, prefix, count, uint64_t(max_list), &out, max_list);
  return out;
}

std::array<double, 4> anti_correlated_joint_table(std::complex<double> a,
                                                  std::complex<double> b,
                                                  std::complex<double> gamma,
                                                  std::complex<double> delta) {
  const std::complex<double> c0u = a * std::conj(delta);
  const std::complex<double> c0v = -a * gamma;
  const std::complex<double> c1u = b * std::conj(gamma);
  const std::complex<double> c1v = b * delta;
  return {std::norm(c0u), std::norm(c0v), std::norm(c1u), std::norm(c1v)};
}

}  // namespace cwalk::oracle
