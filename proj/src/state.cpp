#include "cwalk/state.hpp"

#include <cmath>
#include <utility>

namespace cwalk {

namespace {

bool is_identity(const BasisRotation& rot) {
  return rot.gamma == Amplitude{1.0, 0.0} && rot.delta == Amplitude{0.0, 0.0};
}

}  // namespace

BasisRotation BasisRotation::identity(int subsystem) {
  return BasisRotation{subsystem, {1.0, 0.0}, {0.0, 0.0}, "0", "1"};
}

BasisRotation BasisRotation::half(int subsystem, std::string up, std::string down) {
  const double r = 1.0 / std::sqrt(2.0);
  return BasisRotation{subsystem, {r, 0.0}, {r, 0.0}, std::move(up), std::move(down)};
}

BasisRotation BasisRotation::inverse() const {
  return BasisRotation{subsystem, std::conj(gamma), delta, "u", "v"};
}

double BasisRotation::unitarity_defect() const {
  return std::abs(std::norm(gamma) + std::norm(delta) - 1.0);
}

void BasisRotation::validate() const {
  if (!std::isfinite(gamma.real()) || !std::isfinite(gamma.imag()) ||
      !std::isfinite(delta.real()) || !std::isfinite(delta.imag())) {
    throw ValidationError("basis rotation has non-finite entries");
  }
  if (unitarity_defect() > kAlgebraicTol) {
    throw ValidationError("basis rotation is not unitary: |gamma|^2 + |delta|^2 = " +
                          std::to_string(std::norm(gamma) + std::norm(delta)));
  }
}

EntangledState::EntangledState(std::vector<int> dims,
                               std::vector<std::vector<std::string>> labels,
                               std::vector<Amplitude> amps)
    : dims_(std::move(dims)), labels_(std::move(labels)), amps_(std::move(amps)) {
  if (dims_.empty()) throw ValidationError("state needs at least one subsystem");
  size_t total = 1;
  for (int d : dims_) {
    if (d < 2) throw ValidationError("subsystem dimension must be >= 2");
    if (total > kMaxAmplitudes / size_t(d)) {
      throw ValidationError("state exceeds the dense amplitude cap");
    }
    total *= size_t(d);
  }
  if (amps_.size() != total) {
    throw ValidationError("amplitude vector length does not match dimensions");
  }
  if (labels_.size() != dims_.size()) {
    throw ValidationError("label table does not match subsystem count");
  }
  for (size_t s = 0; s < dims_.size(); ++s) {
    if (labels_[s].size() != size_t(dims_[s])) {
      throw ValidationError("label list does not match subsystem dimension");
    }
  }
  for (const Amplitude& a : amps_) {
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) {
      throw ValidationError("amplitude is not finite");
    }
  }
  strides_.assign(dims_.size(), 1);
  for (int s = int(dims_.size()) - 2; s >= 0; --s) {
    strides_[s] = strides_[s + 1] * size_t(dims_[s + 1]);
  }
  const double n = norm_sq();
  if (std::abs(n - 1.0) > kAlgebraicTol) {
    throw ValidationError("state is not normalized: |psi|^2 = " + std::to_string(n));
  }
}

EntangledState EntangledState::qubit(Amplitude a0, Amplitude a1,
                                     std::string label0, std::string label1) {
  return EntangledState({2}, {{std::move(label0), std::move(label1)}}, {a0, a1});
}

EntangledState EntangledState::single(std::vector<Amplitude> amps,
                                      std::vector<std::string> labels) {
  const int dim = int(amps.size());
  return EntangledState({dim}, {std::move(labels)}, std::move(amps));
}

const Amplitude& EntangledState::amp(size_t i) const {
  if (i >= amps_.size()) throw DomainError("amplitude index out of range");
  return amps_[i];
}

const std::string& EntangledState::label(int subsystem, int basis_index) const {
  if (subsystem < 0 || subsystem >= subsystem_count()) {
    throw DomainError("subsystem index out of range");
  }
  if (basis_index < 0 || basis_index >= dims_[subsystem]) {
    throw DomainError("basis index out of range");
  }
  return labels_[subsystem][basis_index];
}

size_t EntangledState::index_of(std::span<const int> digits) const {
  if (digits.size() != dims_.size()) throw DomainError("digit count mismatch");
  size_t idx = 0;
  for (size_t s = 0; s < dims_.size(); ++s) {
    if (digits[s] < 0 || digits[s] >= dims_[s]) throw DomainError("digit out of range");
    idx += strides_[s] * size_t(digits[s]);
  }
  return idx;
}

int EntangledState::digit(size_t index, int subsystem) const {
  if (index >= amps_.size()) throw DomainError("amplitude index out of range");
  if (subsystem < 0 || subsystem >= subsystem_count()) {
    throw DomainError("subsystem index out of range");
  }
  return int((index / strides_[subsystem]) % size_t(dims_[subsystem]));
}

std::vector<int> EntangledState::digits_of(size_t index) const {
  std::vector<int> d(dims_.size());
  for (size_t s = 0; s < dims_.size(); ++s) d[s] = digit(index, int(s));
  return d;
}

double EntangledState::norm_sq() const {
  double n = 0.0;
  for (const Amplitude& a : amps_) n += std::norm(a);
  return n;
}

double born_density(const EntangledState& state, std::span<const size_t> indices) {
  std::vector<uint8_t> seen(state.size(), 0);
  double sum = 0.0;
  for (size_t i : indices) {
    if (i >= state.size()) throw DomainError("amplitude index out of range");
    if (seen[i]) throw DomainError("duplicate index in index set");
    seen[i] = 1;
    sum += std::norm(state.amps()[i]);
  }
  return sum;
}

std::vector<size_t> Bifurcation::interacting() const {
  std::vector<size_t> out;
  for (size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) out.push_back(i);
  }
  return out;
}

std::vector<size_t> Bifurcation::complement() const {
  std::vector<size_t> out;
  for (size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) out.push_back(i);
  }
  return out;
}

Bifurcation Bifurcation::subsystem_branch(const EntangledState& state, int subsystem,
                                          int value) {
  if (subsystem < 0 || subsystem >= state.subsystem_count()) {
    throw DomainError("subsystem index out of range");
  }
  if (value < 0 || value >= state.dims()[subsystem]) {
    throw DomainError("basis index out of range");
  }
  Bifurcation b;
  b.mask.assign(state.size(), 0);
  double p = 0.0;
  for (size_t i = 0; i < state.size(); ++i) {
    if (state.digit(i, subsystem) == value) {
      b.mask[i] = 1;
      p += std::norm(state.amps()[i]);
    }
  }
  b.p = p;
  b.q = 1.0 - p;
  return b;
}

Bifurcation Bifurcation::from_indices(const EntangledState& state,
                                      std::span<const size_t> indices) {
  Bifurcation b;
  b.mask.assign(state.size(), 0);
  for (size_t i : indices) {
    if (i >= state.size()) throw DomainError("amplitude index out of range");
    if (b.mask[i]) throw DomainError("duplicate index in index set");
    b.mask[i] = 1;
  }
  double p = 0.0;
  for (size_t i = 0; i < state.size(); ++i) {
    if (b.mask[i]) p += std::norm(state.amps()[i]);
  }
  b.p = p;
  b.q = 1.0 - p;
  return b;
}

double Bifurcation::recompute_p(const EntangledState& state) const {
  if (mask.size() != state.size()) throw DomainError("bifurcation built for another state size");
  double p = 0.0;
  for (size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) p += std::norm(state.amps()[i]);
  }
  return p;
}

EntangledState rotate_subsystem(const EntangledState& state, const BasisRotation& rot) {
  rot.validate();
  if (rot.subsystem < 0 || rot.subsystem >= state.subsystem_count()) {
    throw DomainError("subsystem index out of range");
  }
  if (state.dims()[rot.subsystem] != 2) {
    throw UnsupportedScenario("basis rotations are defined for qubit subsystems only");
  }
  // The family (gamma, delta; conj(delta), -conj(gamma)) cannot express the
  // identity map itself (its determinant is -1), so treat the identity
  // rotation as a pure relabel rather than applying a sign flip to |1>.
  if (is_identity(rot)) {
    auto labels = state.labels();
    labels[rot.subsystem] = {rot.up_label, rot.down_label};
    return EntangledState(state.dims(), labels, state.amps());
  }
  const Amplitude g = rot.gamma, d = rot.delta;
  std::vector<Amplitude> out(state.size());
  // Stride between the two basis vectors of the rotated subsystem.
  size_t stride = 1;
  for (int s = state.subsystem_count() - 1; s > rot.subsystem; --s) {
    stride *= size_t(state.dims()[s]);
  }
  for (size_t i = 0; i < state.size(); ++i) {
    if (state.digit(i, rot.subsystem) != 0) continue;
    const Amplitude a0 = state.amps()[i];
    const Amplitude a1 = state.amps()[i + stride];
    out[i] = std::conj(g) * a0 + std::conj(d) * a1;
    out[i + stride] = d * a0 - g * a1;
  }
  auto labels = state.labels();
  labels[rot.subsystem] = {rot.up_label, rot.down_label};
  return EntangledState(state.dims(), std::move(labels), std::move(out));
}

EntangledState tensor_extend(const EntangledState& state, int dim,
                             const std::string& ready_label) {
  if (dim < 2) throw ValidationError("subsystem dimension must be >= 2");
  std::vector<Amplitude> out(state.size() * size_t(dim), Amplitude{0.0, 0.0});
  for (size_t i = 0; i < state.size(); ++i) {
    out[i * size_t(dim)] = state.amps()[i];
  }
  auto dims = state.dims();
  dims.push_back(dim);
  auto labels = state.labels();
  std::vector<std::string> fresh;
  fresh.push_back(ready_label);
  for (int k = 1; k < dim; ++k) fresh.push_back(ready_label + "." + std::to_string(k));
  labels.push_back(std::move(fresh));
  return EntangledState(std::move(dims), std::move(labels), std::move(out));
}

namespace {

EntangledState correlate_plain(const EntangledState& state, int source, int target) {
  if (source < 0 || source >= state.subsystem_count() || target < 0 ||
      target >= state.subsystem_count()) {
    throw DomainError("subsystem index out of range");
  }
  if (source == target) throw ValidationError("source and target must differ");
  if (state.dims()[source] != 2) {
    throw UnsupportedScenario("correlate expects a qubit source subsystem");
  }
  if (state.dims()[target] < state.dims()[source]) {
    throw ValidationError("target dimension too small to copy the source basis index");
  }
  int ready = -1;
  for (size_t i = 0; i < state.size(); ++i) {
    if (state.amps()[i] == Amplitude{0.0, 0.0}) continue;
    const int td = state.digit(i, target);
    if (ready < 0) {
      ready = td;
    } else if (ready != td) {
      throw ValidationError("target subsystem is not in a ready basis vector");
    }
  }
  if (ready < 0) throw ValidationError("state has no support");
  std::vector<Amplitude> out(state.size(), Amplitude{0.0, 0.0});
  for (size_t i = 0; i < state.size(); ++i) {
    if (state.amps()[i] == Amplitude{0.0, 0.0}) continue;
    auto digits = state.digits_of(i);
    digits[target] = digits[source];
    out[state.index_of(digits)] = state.amps()[i];
  }
  auto labels = state.labels();
  for (int k = 0; k < 2; ++k) labels[target][k] = state.labels()[source][k];
  return EntangledState(state.dims(), std::move(labels), std::move(out));
}

}  // namespace

EntangledState correlate(const EntangledState& state, int source, int target,
                         const BasisRotation& basis) {
  if (is_identity(basis)) return correlate_plain(state, source, target);
  basis.validate();
  BasisRotation r = basis;
  r.subsystem = source;
  const auto original_labels = state.labels()[source];
  const EntangledState rotated = rotate_subsystem(state, r);
  const EntangledState mapped = correlate_plain(rotated, source, target);
  BasisRotation back = r.inverse();
  back.up_label = original_labels[0];
  back.down_label = original_labels[1];
  return rotate_subsystem(mapped, back);
}

EntangledState correlate(const EntangledState& state, int source, int target) {
  return correlate_plain(state, source, target);
}

}  // namespace cwalk
