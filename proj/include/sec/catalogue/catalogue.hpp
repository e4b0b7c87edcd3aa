#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sec/rl/qtable.hpp"

namespace sec::catalogue {

struct Milestone {
  std::size_t index = 0;
  long deaths_at_capture = 0;
  std::shared_ptr<const rl::QTable> snapshot;
};

// Ordered timeline of policy snapshots. Milestone 0 is always the empty
// table; later milestones are captured every `interval` learner deaths.
// Snapshots are shared and never mutated, so a finished catalogue can be
// read from many games at once.
class Catalogue {
 public:
  explicit Catalogue(long interval = 100, rl::BucketShape shape = {})
      : interval_(interval), shape_(shape) {
    if (interval_ <= 0) throw std::invalid_argument("milestone interval must be positive");
    milestones_.push_back(Milestone{0, 0, std::make_shared<const rl::QTable>(shape)});
  }

  // Rebuilds a catalogue from stored milestones; validates the ordering invariants.
  static Catalogue from_milestones(long interval, std::vector<Milestone> milestones) {
    if (milestones.empty()) throw std::invalid_argument("catalogue needs milestone 0");
    Catalogue c(interval, milestones.front().snapshot->shape());
    for (std::size_t i = 0; i < milestones.size(); ++i) {
      const auto& m = milestones[i];
      if (m.index != i) throw std::invalid_argument("milestone indices must be contiguous");
      if (!m.snapshot || m.snapshot->shape() != c.shape_)
        throw std::invalid_argument("milestone shape mismatch");
      if (i > 0 && m.deaths_at_capture <= milestones[i - 1].deaths_at_capture)
        throw std::invalid_argument("deaths_at_capture must increase with index");
    }
    if (milestones.front().snapshot->nonzero_count() != 0)
      throw std::invalid_argument("milestone 0 must be the empty table");
    c.milestones_ = std::move(milestones);
    return c;
  }

  long interval() const { return interval_; }
  const rl::BucketShape& shape() const { return shape_; }
  std::size_t size() const { return milestones_.size(); }
  std::size_t max_index() const { return milestones_.size() - 1; }
  const std::vector<Milestone>& milestones() const { return milestones_; }
  const Milestone& at(std::size_t index) const { return milestones_.at(index); }

  void append(long deaths, const rl::QTable& q) {
    if (deaths <= milestones_.back().deaths_at_capture)
      throw std::invalid_argument("deaths_at_capture must increase");
    if (q.shape() != shape_) throw std::invalid_argument("snapshot shape mismatch");
    milestones_.push_back(
        Milestone{milestones_.size(), deaths, std::make_shared<const rl::QTable>(q.snapshot())});
  }

  friend bool operator==(const Catalogue& a, const Catalogue& b) {
    if (a.interval_ != b.interval_ || a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const auto& x = a.milestones_[i];
      const auto& y = b.milestones_[i];
      if (x.deaths_at_capture != y.deaths_at_capture || !(*x.snapshot == *y.snapshot))
        return false;
    }
    return true;
  }

 private:
  long interval_;
  rl::BucketShape shape_;
  std::vector<Milestone> milestones_;
};

// Appends a snapshot when `deaths` is a positive multiple of the interval not
// captured yet. Returns true when a milestone was added.
inline bool maybe_capture(long deaths, const rl::QTable& q, Catalogue& catalogue) {
  if (deaths <= 0 || deaths % catalogue.interval() != 0) return false;
  if (deaths <= catalogue.milestones().back().deaths_at_capture) return false;
  catalogue.append(deaths, q);
  return true;
}

// Fresh mutable copy of a stored snapshot, traces zeroed.
inline rl::QTable load_milestone(const Catalogue& catalogue, std::size_t index) {
  if (index >= catalogue.size())
    throw std::out_of_range("milestone index " + std::to_string(index) + " out of range [0, " +
                            std::to_string(catalogue.size()) + ")");
  return catalogue.at(index).snapshot->snapshot();
}

}  // namespace sec::catalogue
