#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cwalk/rng.hpp"
#include "cwalk/stats.hpp"

namespace cwalk {

enum class Interval { kTimelike, kSpacelike, kLightlike };

// Interaction event in 1+1-dimensional flat spacetime, c = 1.
struct SpacetimeEvent {
  std::string id;
  double t = 0.0;
  double x = 0.0;
  std::string detector_id;
  std::string system_id;
};

// Timelike iff dt^2 > dx^2; lightlike iff they agree within 1e-12.
Interval classify_interval(const SpacetimeEvent& a, const SpacetimeEvent& b);

// Causal precedence: a is inside or on b's past light cone and strictly earlier.
bool precedes(const SpacetimeEvent& a, const SpacetimeEvent& b);

// preds[i] has bit j set iff event j must be admitted before event i.
// Throws SizeLimitError beyond 32 events, ValidationError on bad input.
std::vector<uint32_t> predecessor_masks(const std::vector<SpacetimeEvent>& events);

// How a total order is drawn from the causal partial order:
//  - kUniformExtension: exactly uniform over all linear extensions, via
//    counting-weighted admission (extension counts memoized over admitted sets).
//  - kReadyTieBreak: uniform choice among currently admissible events at each
//    step. Not uniform over extensions in general; kept as a pluggable
//    alternative measure.
enum class ExtensionPolicy { kUniformExtension, kReadyTieBreak };

ExtensionPolicy extension_policy_from_string(const std::string& name);
std::string to_string(ExtensionPolicy policy);

// Admission state of a sequencing surface: which events lie behind it and in
// which order they were pushed through. Labels s strictly increase.
class SequencingSurface {
 public:
  explicit SequencingSurface(std::vector<SpacetimeEvent> events);

  // Admits an event; all causal predecessors must already be admitted.
  void admit(size_t event_index);

  bool admitted(size_t event_index) const;
  bool complete() const;
  uint64_t next_s() const { return next_s_; }
  // Indices of events currently admissible: held back, all predecessors in.
  std::vector<size_t> ready() const;
  const std::vector<SpacetimeEvent>& events() const { return events_; }
  // Event ids in admission order.
  const std::vector<std::string>& included() const { return included_; }
  // s label assigned at each admission, strictly increasing.
  const std::vector<uint64_t>& labels() const { return labels_; }

 private:
  std::vector<SpacetimeEvent> events_;
  std::vector<uint32_t> preds_;
  std::vector<uint8_t> in_;
  uint32_t admitted_mask_ = 0;
  uint64_t next_s_ = 0;
  std::vector<std::string> included_;
  std::vector<uint64_t> labels_;
};

// Draws a random total order of the events consistent with causal precedence.
// Draws come from the sequencer stream of rng at indices draw_base, draw_base+1, ...
// At most 16 events.
std::vector<std::string> sequence_events(
    const std::vector<SpacetimeEvent>& events, const TrialRng& rng,
    ExtensionPolicy policy = ExtensionPolicy::kUniformExtension,
    uint32_t draw_base = 0);

// Exact number of linear extensions of the events' causal order.
uint64_t extension_count(const std::vector<SpacetimeEvent>& events);

// Throws ValidationError unless order is a permutation of the event ids that
// respects causal precedence.
void validate_order(const std::vector<SpacetimeEvent>& events,
                    const std::vector<std::string>& order);

struct OrderInvarianceReport {
  // One row per candidate order, one column per joint outcome.
  std::vector<std::vector<uint64_t>> table;
  stats::ChiSquare homogeneity;
};

// Runs `trials` trials under each candidate order with matched per-trial RNG
// streams (TrialRng(master_seed, trial) handed to every order), tallies joint
// outcomes, and tests the rows for homogeneity. run_trial must key its draws
// by stable interaction ids so matched trials differ only through the order.
OrderInvarianceReport order_invariance_test(
    const std::vector<SpacetimeEvent>& events,
    const std::vector<std::vector<std::string>>& orders, uint64_t trials,
    uint64_t master_seed, size_t n_outcomes,
    const std::function<size_t(const std::vector<std::string>&, const TrialRng&)>&
        run_trial);

}  // namespace cwalk
