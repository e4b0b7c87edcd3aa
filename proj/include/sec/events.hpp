#pragma once

#include <stdexcept>
#include <string_view>

namespace sec {

enum class Actor { learner, opponent, balancer };

// kill/death are incidents; the rest are balancer reactions.
enum class Event { kill, death, milestone_up, milestone_down, policy_clearance };

constexpr bool is_incident(Event e) { return e == Event::kill || e == Event::death; }

constexpr std::string_view to_string(Actor a) {
  switch (a) {
    case Actor::learner: return "learner";
    case Actor::opponent: return "opponent";
    case Actor::balancer: return "balancer";
  }
  return "?";
}

constexpr std::string_view to_string(Event e) {
  switch (e) {
    case Event::kill: return "kill";
    case Event::death: return "death";
    case Event::milestone_up: return "milestone_up";
    case Event::milestone_down: return "milestone_down";
    case Event::policy_clearance: return "policy_clearance";
  }
  return "?";
}

inline Actor parse_actor(std::string_view s) {
  if (s == "learner") return Actor::learner;
  if (s == "opponent") return Actor::opponent;
  if (s == "balancer") return Actor::balancer;
  throw std::invalid_argument("unknown actor: " + std::string(s));
}

inline Event parse_event(std::string_view s) {
  if (s == "kill") return Event::kill;
  if (s == "death") return Event::death;
  if (s == "milestone_up") return Event::milestone_up;
  if (s == "milestone_down") return Event::milestone_down;
  if (s == "policy_clearance") return Event::policy_clearance;
  throw std::invalid_argument("unknown event: " + std::string(s));
}

}  // namespace sec
