#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cwalk/errors.hpp"
#include "cwalk/tolerances.hpp"

namespace cwalk {

using Amplitude = std::complex<double>;

// A 2x2 unitary change of basis for one qubit subsystem:
//   |u> = gamma |0> + delta |1>
//   |v> = conj(delta) |0> - conj(gamma) |1>
// where |0>, |1> are the subsystem's current basis vectors. The rows
// (gamma, delta; conj(delta), -conj(gamma)) form a unitary matrix whenever
// |gamma|^2 + |delta|^2 = 1.
struct BasisRotation {
  int subsystem = 0;
  Amplitude gamma{1.0, 0.0};
  Amplitude delta{0.0, 0.0};
  std::string up_label = "u";
  std::string down_label = "v";

  static BasisRotation identity(int subsystem);
  // Uniform mixing basis (gamma = delta = 1/sqrt(2)), the x<->z change.
  static BasisRotation half(int subsystem, std::string up = "u", std::string down = "v");

  // Undoes this rotation: rotate(rotate(s, r), r.inverse()) == s.
  BasisRotation inverse() const;

  double unitarity_defect() const;  // | |gamma|^2 + |delta|^2 - 1 |
  void validate() const;            // throws ValidationError beyond kAlgebraicTol
};

// An immutable dense n-subsystem state. Subsystem 0 varies slowest in the
// amplitude index. Basis vectors carry string labels per subsystem.
class EntangledState {
 public:
  EntangledState(std::vector<int> dims,
                 std::vector<std::vector<std::string>> labels,
                 std::vector<Amplitude> amps);

  // Single qubit with labels for basis vectors 0 and 1.
  static EntangledState qubit(Amplitude a0, Amplitude a1,
                              std::string label0 = "0", std::string label1 = "1");

  // One subsystem of dimension dims with given amplitudes and labels.
  static EntangledState single(std::vector<Amplitude> amps,
                               std::vector<std::string> labels);

  int subsystem_count() const { return int(dims_.size()); }
  const std::vector<int>& dims() const { return dims_; }
  size_t size() const { return amps_.size(); }
  const std::vector<Amplitude>& amps() const { return amps_; }
  const Amplitude& amp(size_t i) const;
  const std::vector<std::vector<std::string>>& labels() const { return labels_; }
  const std::string& label(int subsystem, int basis_index) const;

  // Index arithmetic between flat amplitude indices and per-subsystem digits.
  size_t index_of(std::span<const int> digits) const;
  int digit(size_t index, int subsystem) const;
  std::vector<int> digits_of(size_t index) const;

  double norm_sq() const;

  static constexpr size_t kMaxAmplitudes = size_t(1) << 24;

 private:
  std::vector<int> dims_;
  std::vector<size_t> strides_;
  std::vector<std::vector<std::string>> labels_;
  std::vector<Amplitude> amps_;
};

// Total Born density carried by a set of amplitude indices.
// Throws DomainError if any index is out of range.
double born_density(const EntangledState& state, std::span<const size_t> indices);

// A two-way split of the product basis into the index set touched by an
// interaction and its complement. p is the interacting density, q = 1 - p.
struct Bifurcation {
  std::vector<uint8_t> mask;  // mask[i] != 0  <=>  index i is interacting
  double p = 0.0;
  double q = 1.0;

  std::vector<size_t> interacting() const;
  std::vector<size_t> complement() const;

  // All indices whose digit at `subsystem` equals `value`.
  static Bifurcation subsystem_branch(const EntangledState& state, int subsystem, int value);
  static Bifurcation from_indices(const EntangledState& state, std::span<const size_t> indices);

  // Recompute p from the state and check consistency within tolerance.
  double recompute_p(const EntangledState& state) const;
};

// Re-express one qubit subsystem in the rotated basis and relabel it.
// Norm-preserving; inverse rotation restores the original state.
EntangledState rotate_subsystem(const EntangledState& state, const BasisRotation& rot);

// Append a fresh subsystem of dimension dim, prepared in basis vector 0
// ("ready"). Densities of all existing index sets are unchanged.
EntangledState tensor_extend(const EntangledState& state, int dim,
                             const std::string& ready_label);

// Deterministic entangling map: the target subsystem (which must be in a
// ready basis vector) copies the source subsystem's basis index, in the basis
// given by `basis` (identity = current basis). Source subsystem must be a
// qubit; target dimension must cover the source's.
EntangledState correlate(const EntangledState& state, int source, int target,
                         const BasisRotation& basis);
EntangledState correlate(const EntangledState& state, int source, int target);

}  // namespace cwalk
