#pragma once

#include <algorithm>
#include <cstddef>
#include <string>

#include "sec/catalogue/catalogue.hpp"
#include "sec/errors.hpp"
#include "sec/events.hpp"
#include "sec/rl/qtable.hpp"

namespace sec::catalogue {

struct BalancerConfig {
  int threshold = 5;
  std::size_t start_index = 0;
};

struct BalancerState {
  std::size_t current_index = 0;
  int kdd = 0;  // learner kills minus learner deaths in this game
  int threshold = 5;
  int adjustments_up = 0;
  int adjustments_down = 0;
  int clearances = 0;
  std::size_t max_index_reached = 0;
};

enum class BalancerAction { none, step_down, step_up, clearance };

// Pure transition rule. The match range [-threshold, threshold] is inclusive,
// so a move only triggers once |kdd| strictly exceeds the threshold:
//   kill,  kdd >  threshold: step back one milestone, or clear at milestone 0;
//   death, kdd < -threshold: step forward one milestone unless at the top.
inline BalancerAction transition(BalancerState& st, Event incident, std::size_t max_index) {
  if (!is_incident(incident))
    throw ContractViolation("balancer consulted on non-incident event '" +
                            std::string(to_string(incident)) + "'");
  if (incident == Event::kill) {
    ++st.kdd;
    if (st.kdd > st.threshold) {
      if (st.current_index > 0) {
        --st.current_index;
        ++st.adjustments_down;
        return BalancerAction::step_down;
      }
      ++st.clearances;
      return BalancerAction::clearance;
    }
    return BalancerAction::none;
  }
  --st.kdd;
  if (st.kdd < -st.threshold && st.current_index < max_index) {
    ++st.current_index;
    ++st.adjustments_up;
    st.max_index_reached = std::max(st.max_index_reached, st.current_index);
    return BalancerAction::step_up;
  }
  return BalancerAction::none;
}

// Threshold-driven milestone switcher bound to one catalogue. One instance per game.
class Balancer {
 public:
  Balancer(const Catalogue& catalogue, BalancerConfig cfg = {}) : catalogue_(&catalogue), cfg_(cfg) {
    if (cfg_.threshold < 0) throw std::invalid_argument("threshold must be non-negative");
    if (cfg_.start_index >= catalogue.size())
      throw std::out_of_range("start milestone outside catalogue");
    reset();
  }

  void reset() {
    state_ = BalancerState{};
    state_.threshold = cfg_.threshold;
    state_.current_index = cfg_.start_index;
    state_.max_index_reached = cfg_.start_index;
  }

  const BalancerState& state() const { return state_; }
  const Catalogue& catalogue() const { return *catalogue_; }

  rl::QTable initial_table() const { return load_milestone(*catalogue_, cfg_.start_index); }

  // Updates the state for one incident and, when the policy moves, rewrites
  // `live` in place. Learning continues on whatever `live` holds afterwards.
  BalancerAction on_incident(Event incident, rl::QTable& live) {
    const BalancerAction action = transition(state_, incident, catalogue_->max_index());
    switch (action) {
      case BalancerAction::step_down:
      case BalancerAction::step_up:
        live = load_milestone(*catalogue_, state_.current_index);
        break;
      case BalancerAction::clearance:
        live.clear();
        break;
      case BalancerAction::none:
        break;
    }
    return action;
  }

 private:
  const Catalogue* catalogue_;
  BalancerConfig cfg_;
  BalancerState state_;
};

}  // namespace sec::catalogue
