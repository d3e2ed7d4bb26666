#include "cwalk/sequencer.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "cwalk/errors.hpp"

namespace cwalk {

namespace {
constexpr double kLightconeTol = 1e-12;
constexpr size_t kMaxSampledEvents = 16;
}  // namespace

Interval classify_interval(const SpacetimeEvent& a, const SpacetimeEvent& b) {
  const double dt = a.t - b.t;
  const double dx = a.x - b.x;
  const double gap = dt * dt - dx * dx;
  if (std::abs(gap) <= kLightconeTol) return Interval::kLightlike;
  return gap > 0.0 ? Interval::kTimelike : Interval::kSpacelike;
}

bool precedes(const SpacetimeEvent& a, const SpacetimeEvent& b) {
  if (!(a.t < b.t)) return false;
  return classify_interval(a, b) != Interval::kSpacelike;
}

std::vector<uint32_t> predecessor_masks(const std::vector<SpacetimeEvent>& events) {
  if (events.size() > 32) throw SizeLimitError("at most 32 events supported");
  std::unordered_set<std::string> ids;
  for (const auto& e : events) {
    if (e.id.empty()) throw ValidationError("event id must be non-empty");
    if (!ids.insert(e.id).second) throw ValidationError("duplicate event id: " + e.id);
    if (!std::isfinite(e.t) || !std::isfinite(e.x)) {
      throw ValidationError("event " + e.id + " has non-finite coordinates");
    }
  }
  std::vector<uint32_t> preds(events.size(), 0);
  for (size_t i = 0; i < events.size(); ++i) {
    for (size_t j = 0; j < events.size(); ++j) {
      if (i != j && precedes(events[j], events[i])) preds[i] |= uint32_t(1) << j;
    }
  }
  return preds;
}

ExtensionPolicy extension_policy_from_string(const std::string& name) {
  if (name == "uniform-extension") return ExtensionPolicy::kUniformExtension;
  if (name == "ready-tie-break") return ExtensionPolicy::kReadyTieBreak;
  throw ValidationError("unknown sequencer policy: " + name);
}

std::string to_string(ExtensionPolicy policy) {
  return policy == ExtensionPolicy::kUniformExtension ? "uniform-extension"
                                                      : "ready-tie-break";
}

SequencingSurface::SequencingSurface(std::vector<SpacetimeEvent> events)
    : events_(std::move(events)),
      preds_(predecessor_masks(events_)),
      in_(events_.size(), 0) {}

void SequencingSurface::admit(size_t event_index) {
  if (event_index >= events_.size()) throw ValidationError("event index out of range");
  if (in_[event_index]) {
    throw ValidationError("event " + events_[event_index].id + " already admitted");
  }
  if (preds_[event_index] & ~admitted_mask_) {
    throw ValidationError("event " + events_[event_index].id +
                          " has an unadmitted causal predecessor");
  }
  in_[event_index] = 1;
  admitted_mask_ |= uint32_t(1) << event_index;
  included_.push_back(events_[event_index].id);
  labels_.push_back(next_s_++);
}

bool SequencingSurface::admitted(size_t event_index) const {
  if (event_index >= events_.size()) throw ValidationError("event index out of range");
  return in_[event_index] != 0;
}

bool SequencingSurface::complete() const { return included_.size() == events_.size(); }

std::vector<size_t> SequencingSurface::ready() const {
  std::vector<size_t> out;
  for (size_t i = 0; i < events_.size(); ++i) {
    if (!in_[i] && !(preds_[i] & ~admitted_mask_)) out.push_back(i);
  }
  return out;
}

namespace {

// Number of linear extensions of the remaining (unadmitted) events.
uint64_t count_from(uint32_t admitted, uint32_t full, const std::vector<uint32_t>& preds,
                    std::vector<uint64_t>& memo) {
  if (admitted == full) return 1;
  uint64_t& slot = memo[admitted];
  if (slot != UINT64_MAX) return slot;
  uint64_t total = 0;
  for (size_t i = 0; i < preds.size(); ++i) {
    const uint32_t bit = uint32_t(1) << i;
    if ((admitted & bit) || (preds[i] & ~admitted)) continue;
    total += count_from(admitted | bit, full, preds, memo);
  }
  slot = total;
  return total;
}

}  // namespace

std::vector<std::string> sequence_events(const std::vector<SpacetimeEvent>& events,
                                         const TrialRng& rng, ExtensionPolicy policy,
                                         uint32_t draw_base) {
  if (events.size() > kMaxSampledEvents) {
    throw SizeLimitError("sequencing supports at most 16 events");
  }
  if (events.empty()) return {};
  SequencingSurface surface(events);
  const std::vector<uint32_t> preds = predecessor_masks(events);
  const uint32_t full = (events.size() == 32) ? ~uint32_t(0)
                                              : (uint32_t(1) << events.size()) - 1;
  std::vector<uint64_t> memo;
  if (policy == ExtensionPolicy::kUniformExtension) {
    memo.assign(size_t(1) << events.size(), UINT64_MAX);
  }
  uint32_t admitted = 0;
  for (uint32_t step = 0; step < events.size(); ++step) {
    const std::vector<size_t> ready = surface.ready();
    size_t pick = ready.front();
    if (ready.size() > 1) {
      const double u = rng.uniform(StreamTag::kSequencer, draw_base + step);
      if (policy == ExtensionPolicy::kReadyTieBreak) {
        size_t k = size_t(u * double(ready.size()));
        if (k >= ready.size()) k = ready.size() - 1;
        pick = ready[k];
      } else {
        // Weight each admissible event by the number of extensions that start
        // with it; this makes every full extension exactly equally likely.
        const uint64_t denom = count_from(admitted, full, preds, memo);
        double acc = 0.0;
        pick = ready.back();
        for (size_t i : ready) {
          const uint64_t w = count_from(admitted | (uint32_t(1) << i), full, preds, memo);
          acc += double(w) / double(denom);
          if (u < acc) {
            pick = i;
            break;
          }
        }
      }
    }
    surface.admit(pick);
    admitted |= uint32_t(1) << pick;
  }
  return surface.included();
}

uint64_t extension_count(const std::vector<SpacetimeEvent>& events) {
  if (events.size() > kMaxSampledEvents) {
    throw SizeLimitError("extension counting supports at most 16 events");
  }
  if (events.empty()) return 1;
  const std::vector<uint32_t> preds = predecessor_masks(events);
  const uint32_t full = (uint32_t(1) << events.size()) - 1;
  std::vector<uint64_t> memo(size_t(1) << events.size(), UINT64_MAX);
  return count_from(0, full, preds, memo);
}

void validate_order(const std::vector<SpacetimeEvent>& events,
                    const std::vector<std::string>& order) {
  if (order.size() != events.size()) {
    throw ValidationError("order length does not match event count");
  }
  std::unordered_map<std::string, size_t> index;
  for (size_t i = 0; i < events.size(); ++i) index[events[i].id] = i;
  SequencingSurface surface(events);
  for (const std::string& id : order) {
    auto it = index.find(id);
    if (it == index.end()) throw ValidationError("order names unknown event: " + id);
    surface.admit(it->second);  // throws on repeats and causal violations
  }
}

OrderInvarianceReport order_invariance_test(
    const std::vector<SpacetimeEvent>& events,
    const std::vector<std::vector<std::string>>& orders, uint64_t trials,
    uint64_t master_seed, size_t n_outcomes,
    const std::function<size_t(const std::vector<std::string>&, const TrialRng&)>&
        run_trial) {
  if (orders.empty()) throw ValidationError("no orders given");
  if (trials == 0) throw ValidationError("trials must be positive");
  if (n_outcomes == 0) throw ValidationError("n_outcomes must be positive");
  for (const auto& order : orders) validate_order(events, order);
  OrderInvarianceReport report;
  report.table.assign(orders.size(), std::vector<uint64_t>(n_outcomes, 0));
  for (size_t o = 0; o < orders.size(); ++o) {
    for (uint64_t trial = 0; trial < trials; ++trial) {
      const TrialRng rng(master_seed, uint32_t(trial));
      const size_t outcome = run_trial(orders[o], rng);
      if (outcome >= n_outcomes) throw ValidationError("trial outcome out of range");
      ++report.table[o][outcome];
    }
  }
  if (orders.size() == 1) {
    report.homogeneity = stats::ChiSquare{0.0, 0, 1.0};
  } else {
    report.homogeneity = stats::chi_square_homogeneity(report.table);
  }
  return report;
}

}  // namespace cwalk
