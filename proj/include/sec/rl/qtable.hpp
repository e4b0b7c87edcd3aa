#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "sec/rl/state.hpp"

namespace sec::rl {

// Dense Q-value store over every (state, action) pair plus a sparse list of
// eligibility traces. Unvisited entries read as 0.0.
class QTable {
 public:
  struct Trace {
    std::size_t index;
    double value;
  };

  explicit QTable(BucketShape shape = {})
      : shape_(shape), values_(shape.state_count() * ActionId::kCount, 0.0) {}

  const BucketShape& shape() const { return shape_; }
  std::size_t state_count() const { return shape_.state_count(); }
  std::size_t size() const { return values_.size(); }

  std::size_t index(const StateKey& s, const ActionId& a) const {
    return state_ordinal(s, shape_) * ActionId::kCount + a.ordinal();
  }

  double value(const StateKey& s, const ActionId& a) const { return values_[index(s, a)]; }
  void set_value(const StateKey& s, const ActionId& a, double v) { values_[index(s, a)] = v; }

  double value_at(std::size_t i) const { return values_[i]; }
  void set_value_at(std::size_t i, double v) { values_[i] = v; }
  std::span<const double> values() const { return values_; }

  // Q-values for the 15 actions of one state.
  std::span<const double> row(const StateKey& s) const {
    return std::span<const double>(values_).subspan(state_ordinal(s, shape_) * ActionId::kCount,
                                                    ActionId::kCount);
  }

  std::size_t nonzero_count() const {
    return static_cast<std::size_t>(
        std::count_if(values_.begin(), values_.end(), [](double v) { return v != 0.0; }));
  }

  double trace(const StateKey& s, const ActionId& a) const {
    const std::size_t i = index(s, a);
    for (const auto& t : traces_)
      if (t.index == i) return t.value;
    return 0.0;
  }
  const std::vector<Trace>& traces() const { return traces_; }
  std::vector<Trace>& mutable_traces() { return traces_; }

  void set_trace_at(std::size_t i, double v) {
    for (auto& t : traces_) {
      if (t.index == i) {
        t.value = v;
        return;
      }
    }
    traces_.push_back(Trace{i, v});
  }

  void clear_traces() { traces_.clear(); }

  // Wipes both values and traces, keeping the shape.
  void clear() {
    std::fill(values_.begin(), values_.end(), 0.0);
    traces_.clear();
  }

  // Values only; the copy starts with no eligibility traces.
  QTable snapshot() const {
    QTable copy(shape_);
    copy.values_ = values_;
    return copy;
  }

  // Equality ignores traces.
  friend bool operator==(const QTable& a, const QTable& b) {
    return a.shape_ == b.shape_ && a.values_ == b.values_;
  }

 private:
  BucketShape shape_;
  std::vector<double> values_;
  std::vector<Trace> traces_;
};

}  // namespace sec::rl
