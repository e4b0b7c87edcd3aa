#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>

#include "sec/rl/qtable.hpp"
#include "sec/rl/state.hpp"

namespace sec::rl {

enum class ShotResult { hit, miss };

struct LearnerConfig {
  double alpha = 0.1;
  double gamma = 0.9;
  double lambda = 0.9;
  double epsilon = 0.15;
  double hit_reward = 250.0;
  double miss_penalty = -1.0;
  double trace_floor = 1e-8;

  bool valid() const {
    return alpha > 0.0 && alpha <= 1.0 && gamma >= 0.0 && gamma <= 1.0 && lambda >= 0.0 &&
           lambda <= 1.0 && epsilon >= 0.0 && epsilon <= 1.0 && hit_reward > 0.0 &&
           miss_penalty < 0.0;
  }
};

inline double reward_for_shot(ShotResult outcome, const LearnerConfig& cfg = {}) {
  return outcome == ShotResult::hit ? cfg.hit_reward : cfg.miss_penalty;
}

// Greedy choice over one row; ties go to the lowest ordinal.
inline ActionId greedy_action(std::span<const double> row) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < row.size(); ++i)
    if (row[i] > row[best]) best = i;
  return ActionId::from_ordinal(best);
}

template <class Rng>
ActionId select_action(const QTable& q, const StateKey& s, double epsilon, Rng& rng) {
  if (epsilon > 0.0) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng) < epsilon) {
      std::uniform_int_distribution<std::size_t> pick(0, ActionId::kCount - 1);
      return ActionId::from_ordinal(pick(rng));
    }
  }
  return greedy_action(q.row(s));
}

namespace detail {

inline void apply_td_error(QTable& q, double delta, const LearnerConfig& cfg) {
  const double decay = cfg.gamma * cfg.lambda;
  auto& traces = q.mutable_traces();
  std::size_t kept = 0;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    auto t = traces[i];
    if (t.value == 0.0) continue;
    q.set_value_at(t.index, q.value_at(t.index) + cfg.alpha * delta * t.value);
    t.value *= decay;
    if (t.value >= cfg.trace_floor) traces[kept++] = t;
  }
  traces.resize(kept);
}

}  // namespace detail

// One SARSA(lambda) backup with replacing traces:
//   delta = r + gamma * Q(s', a') - Q(s, a);  e(s, a) = 1;
//   Q += alpha * delta * e;  e *= gamma * lambda  (entries below the floor are dropped).
inline void sarsa_lambda_update(QTable& q, const StateKey& s, const ActionId& a, double reward,
                                const StateKey& s_next, const ActionId& a_next,
                                const LearnerConfig& cfg) {
  const double delta = reward + cfg.gamma * q.value(s_next, a_next) - q.value(s, a);
  q.set_trace_at(q.index(s, a), 1.0);
  detail::apply_td_error(q, delta, cfg);
}

// Backup for the final transition of an episode (no successor value).
inline void sarsa_lambda_terminal_update(QTable& q, const StateKey& s, const ActionId& a,
                                         double reward, const LearnerConfig& cfg) {
  const double delta = reward - q.value(s, a);
  q.set_trace_at(q.index(s, a), 1.0);
  detail::apply_td_error(q, delta, cfg);
}

inline void reset_traces(QTable& q) { q.clear_traces(); }

// On-policy agent wrapper: holds the live table and the transition awaiting
// its successor so callers only report (state, reward) pairs.
class SarsaLearner {
 public:
  explicit SarsaLearner(LearnerConfig cfg = {}, BucketShape shape = {})
      : cfg_(cfg), table_(shape) {
    if (!cfg_.valid()) throw std::invalid_argument("learner config out of range");
  }

  const LearnerConfig& config() const { return cfg_; }
  LearnerConfig& config() { return cfg_; }
  const QTable& table() const { return table_; }
  QTable& table() { return table_; }
  bool learning() const { return learning_; }
  void set_learning(bool on) { learning_ = on; }

  // Picks the action for `s`, first backing up the pending transition.
  template <class Rng>
  ActionId act(const StateKey& s, Rng& rng) {
    const ActionId a = select_action(table_, s, cfg_.epsilon, rng);
    if (pending_ && learning_) {
      sarsa_lambda_update(table_, pending_->state, pending_->action, pending_->reward, s, a, cfg_);
    }
    pending_ = Pending{s, a, 0.0};
    return a;
  }

  void reward(double r) {
    if (pending_) pending_->reward += r;
  }

  // Closes the current episode (learner death).
  void end_episode() {
    if (pending_ && learning_) {
      sarsa_lambda_terminal_update(table_, pending_->state, pending_->action, pending_->reward,
                                   cfg_);
    }
    pending_.reset();
    reset_traces(table_);
  }

  // Drops the pending transition and all traces without a backup, e.g. when
  // a game is cut off by the clock or the table was swapped underneath.
  void discard_episode() {
    pending_.reset();
    reset_traces(table_);
  }

  // Installs a new live table; the pending transition is discarded with the old one.
  void replace_table(QTable q) {
    table_ = std::move(q);
    table_.clear_traces();
    pending_.reset();
  }

 private:
  struct Pending {
    StateKey state;
    ActionId action;
    double reward;
  };

  LearnerConfig cfg_;
  QTable table_;
  std::optional<Pending> pending_;
  bool learning_ = true;
};

}  // namespace sec::rl
