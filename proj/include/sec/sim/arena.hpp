#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sec/catalogue/balancer.hpp"
#include "sec/catalogue/catalogue.hpp"
#include "sec/errors.hpp"
#include "sec/events.hpp"
#include "sec/rl/sarsa.hpp"
#include "sec/rl/state.hpp"
#include "sec/sim/geometry.hpp"
#include "sec/sim/opponent.hpp"

namespace sec::sim {

// Tunable constants of the deathmatch abstraction. One tick is 250 ms of game time.
struct SimParams {
  double arena_size = 40.0;
  double tick_seconds = 0.25;
  int max_health = 100;
  int damage = 18;
  int rounds_per_tick = 5;          // learner burst; each round resolves independently
  int opponent_rounds_per_tick = 7;
  double p_max = 0.85;
  double cone_half_width_deg = 6.0;
  double skew_h_deg = 4.0;
  double skew_v_deg = 3.0;
  double base_speed = 1.0;          // units/tick at speed_fraction 1
  double projectile_speed = 12.0;   // units/tick
  double min_distance = 2.0;
  double falloff_distance = 40.0;   // range at which hit chance halves beyond min_distance
  double taper_exponent = 1.0;      // shape of the fall-off inside the hit cone
  double learner_speed_fraction = 0.9;
  double learner_strafe_flip = 0.08;
  double opponent_strafe_flip = 0.1;
  double dodge_strafe_flip = 0.35;
  double preferred_near = 6.0;
  double preferred_far = 14.0;
  std::array<Vec2, 4> spawns{{{5.0, 5.0}, {35.0, 5.0}, {5.0, 35.0}, {35.0, 35.0}}};
};

struct CombatantState {
  Vec2 position{};
  Vec2 velocity{};
  double facing_deg = 0.0;
  int health = 100;
  int strafe_sign = 1;
  bool under_fire = false;  // took damage last tick
  int kills = 0;
  int deaths = 0;
};

struct World {
  SimParams params{};
  CombatantState learner{};
  CombatantState opponent{};
  int tick = 0;
};

// Index of the spawn point farthest from `from`; ties go to the lowest index.
inline std::size_t farthest_spawn(const SimParams& p, Vec2 from) {
  std::size_t best = 0;
  double best_d = -1.0;
  for (std::size_t i = 0; i < p.spawns.size(); ++i) {
    const double d = (p.spawns[i] - from).norm();
    if (d > best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

inline World make_world(const SimParams& p = {}) {
  World w;
  w.params = p;
  w.learner.position = p.spawns[0];
  w.learner.health = p.max_health;
  w.opponent.position = p.spawns[farthest_spawn(p, p.spawns[0])];
  w.opponent.health = p.max_health;
  w.learner.facing_deg = heading_deg(w.opponent.position - w.learner.position);
  w.opponent.facing_deg = heading_deg(w.learner.position - w.opponent.position);
  return w;
}

// Target kinematics seen from the observer, in the observer's facing frame
// (+x straight ahead, +y to the left).
struct RelativeKinematics {
  Vec2 position{};
  Vec2 velocity{};             // target velocity minus observer velocity
  double rotation_deg = 0.0;   // target facing; 0 = looking straight at the observer
  double distance = 0.0;

  double bearing_deg() const { return distance > 0.0 ? heading_deg(position) : 0.0; }
  double speed() const { return velocity.norm(); }

  rl::RawObservation raw() const {
    const double s = speed();
    return rl::RawObservation{s, s > 0.0 ? heading_deg(velocity) : 0.0, rotation_deg, distance};
  }
};

inline RelativeKinematics observe(const CombatantState& observer, const CombatantState& target) {
  RelativeKinematics k;
  const Vec2 offset = target.position - observer.position;
  k.position = to_frame(offset, observer.facing_deg);
  k.velocity = to_frame(target.velocity - observer.velocity, observer.facing_deg);
  k.distance = offset.norm();
  const double back = k.distance > 0.0 ? heading_deg(offset * -1.0) : target.facing_deg;
  k.rotation_deg = wrap180(target.facing_deg - back);
  return k;
}

// Direction (observer frame) that intercepts the target given its relative velocity.
inline double lead_direction_deg(const RelativeKinematics& k, const SimParams& p) {
  const double tof = k.distance / p.projectile_speed;
  const Vec2 aim = k.position + k.velocity * tof;
  return aim.norm() > 0.0 ? heading_deg(aim) : 0.0;
}

inline double distance_factor(double distance, const SimParams& p) {
  const double beyond = std::max(0.0, distance - p.min_distance);
  return 1.0 / (1.0 + beyond / p.falloff_distance);
}

// (1 - err/cone)^k inside the hit cone, zero outside, scaled down with range.
inline double hit_probability(double horizontal_error_deg, double vertical_error_deg,
                              double distance, const SimParams& p) {
  const double err = std::hypot(horizontal_error_deg, vertical_error_deg);
  if (err >= p.cone_half_width_deg) return 0.0;
  return p.p_max * std::pow(1.0 - err / p.cone_half_width_deg, p.taper_exponent) *
         distance_factor(distance, p);
}

inline double learner_hit_probability(const rl::ActionId& a, const RelativeKinematics& k,
                                      const SimParams& p) {
  const double aim = k.bearing_deg() + a.h_skew * p.skew_h_deg;
  const double err_h = std::abs(wrap180(aim - lead_direction_deg(k, p)));
  const double err_v = std::abs(a.v_skew * p.skew_v_deg);
  return hit_probability(err_h, err_v, k.distance, p);
}

struct ShotOutcome {
  rl::ShotResult result = rl::ShotResult::miss;
  int damage = 0;
};

template <class Rng>
ShotOutcome resolve_shot(double probability, const SimParams& p, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (u(rng) < probability) return ShotOutcome{rl::ShotResult::hit, p.damage};
  return ShotOutcome{};
}

template <class Rng>
ShotOutcome resolve_learner_shot(const rl::ActionId& a, const RelativeKinematics& k,
                                 const SimParams& p, Rng& rng) {
  return resolve_shot(learner_hit_probability(a, k, p), p, rng);
}

struct OpponentStep {
  Vec2 velocity{};
  double facing_deg = 0.0;
  int strafe_sign = 1;
  bool fires = false;
  std::vector<double> shot_headings_deg;  // world frame, one per round
};

namespace detail {

inline Vec2 strafe_velocity(Vec2 to_target, int sign, double radial, double speed) {
  const Vec2 dir = normalized(to_target);
  const Vec2 perp{-dir.y * sign, dir.x * sign};
  return normalized(perp + dir * radial) * speed;
}

inline bool inside(Vec2 pos, const SimParams& p) {
  return pos.x >= 0.0 && pos.x <= p.arena_size && pos.y >= 0.0 && pos.y <= p.arena_size;
}

}  // namespace detail

// World heading of an intercepting shot from `shooter` at `target`.
inline double lead_heading_deg(const CombatantState& shooter, const CombatantState& target,
                               const SimParams& p) {
  RelativeKinematics k = observe(shooter, target);
  return shooter.facing_deg + lead_direction_deg(k, p);
}

template <class Rng>
OpponentStep opponent_policy_step(const OpponentProfile& profile, const World& w, Rng& rng) {
  const SimParams& p = w.params;
  const CombatantState& me = w.opponent;
  const CombatantState& target = w.learner;
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  OpponentStep out;
  const Vec2 to_target = target.position - me.position;
  const double bearing = heading_deg(to_target);
  const double max_turn = profile.turn_rate * 360.0 * p.tick_seconds;
  // Tracks the learner only while it is seen or just fired on us; otherwise sweeps.
  const bool aware = std::abs(wrap180(bearing - me.facing_deg)) <= profile.fov_deg / 2.0 || me.under_fire;
  const double turn = aware ? std::clamp(wrap180(bearing - me.facing_deg), -max_turn, max_turn)
                            : max_turn * me.strafe_sign;
  out.facing_deg = wrap180(me.facing_deg + turn);
  const bool in_view = std::abs(wrap180(bearing - out.facing_deg)) <= profile.fov_deg / 2.0;

  const bool weak = me.health < profile.weak_health;
  const bool moving = in_view ? (profile.moves_in_combat || weak) : (profile.moves_when_idle || weak);
  out.strafe_sign = me.strafe_sign;
  const double flip = profile.dodges ? p.dodge_strafe_flip : p.opponent_strafe_flip;
  if (u01(rng) < flip) out.strafe_sign = -out.strafe_sign;

  if (moving) {
    const double d = to_target.norm();
    const double speed = profile.speed_fraction * p.base_speed;
    double radial = 0.0;
    if (!in_view && !weak) {
      radial = 1.0;  // seek
    } else if (weak && !profile.moves_in_combat) {
      radial = -0.7;  // back off
    } else if (profile.closes_in) {
      radial = d > p.preferred_near ? 0.7 : 0.0;
    } else if (d > p.preferred_far) {
      radial = 0.5;
    }
    out.velocity = detail::strafe_velocity(to_target, out.strafe_sign, radial, speed);
    if (!detail::inside(me.position + out.velocity, p)) {
      out.strafe_sign = -out.strafe_sign;
      out.velocity = detail::strafe_velocity(to_target, out.strafe_sign, radial, speed);
    }
  }

  out.fires = in_view;
  if (out.fires) {
    std::uniform_real_distribution<double> err(-profile.aim_error_deg, profile.aim_error_deg);
    double heading = bearing;
    if (profile.leads_target) {
      CombatantState shooter = me;
      shooter.facing_deg = bearing;
      heading = lead_heading_deg(shooter, target, p);
    }
    for (int round = 0; round < p.opponent_rounds_per_tick; ++round)
      out.shot_headings_deg.push_back(heading + err(rng));
  }
  return out;
}

// Fixed movement of the learner: circle-strafe at mid range, always facing the opponent.
template <class Rng>
Vec2 learner_movement(const World& w, int& strafe_sign, Rng& rng) {
  const SimParams& p = w.params;
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  if (u01(rng) < p.learner_strafe_flip) strafe_sign = -strafe_sign;
  const Vec2 to_target = w.opponent.position - w.learner.position;
  const double d = to_target.norm();
  double radial = 0.0;
  if (d > p.preferred_far) radial = 0.7;
  else if (d < p.preferred_near) radial = -0.7;
  const double speed = p.learner_speed_fraction * p.base_speed;
  Vec2 v = detail::strafe_velocity(to_target, strafe_sign, radial, speed);
  if (!detail::inside(w.learner.position + v, p)) {
    strafe_sign = -strafe_sign;
    v = detail::strafe_velocity(to_target, strafe_sign, radial, speed);
  }
  return v;
}

enum class Outcome { win, lose, draw };

inline std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::win: return "win";
    case Outcome::lose: return "lose";
    case Outcome::draw: return "draw";
  }
  return "?";
}

struct LogRecord {
  int tick = 0;
  Actor actor = Actor::learner;
  Event event = Event::kill;
  int learner_kills = 0;
  int learner_deaths = 0;
  int milestone_index = -1;  // -1 when no balancer is attached

  friend bool operator==(const LogRecord&, const LogRecord&) = default;
};

class GameLog {
 public:
  static constexpr const char* kCsvHeader =
      "tick,actor,event,learner_kills,learner_deaths,milestone_index";

  void append(const LogRecord& r) { records_.push_back(r); }
  const std::vector<LogRecord>& records() const { return records_; }

  int learner_kills() const { return learner_kills_; }
  int learner_deaths() const { return learner_deaths_; }
  int opponent_kills() const { return opponent_kills_; }
  int opponent_deaths() const { return opponent_deaths_; }

  void count_learner_kill() {
    ++learner_kills_;
    ++opponent_deaths_;
  }
  void count_learner_death() {
    ++learner_deaths_;
    ++opponent_kills_;
  }

  static std::string csv_row(const LogRecord& r) {
    std::ostringstream os;
    os << r.tick << ',' << to_string(r.actor) << ',' << to_string(r.event) << ','
       << r.learner_kills << ',' << r.learner_deaths << ',' << r.milestone_index;
    return os.str();
  }

  std::string to_csv() const {
    std::string out = std::string(kCsvHeader) + "\n";
    for (const auto& r : records_) out += csv_row(r) + "\n";
    return out;
  }

  friend bool operator==(const GameLog&, const GameLog&) = default;

 private:
  std::vector<LogRecord> records_;
  int learner_kills_ = 0;
  int learner_deaths_ = 0;
  int opponent_kills_ = 0;
  int opponent_deaths_ = 0;
};

// Training-time milestone capture; `deaths` accumulates across games.
struct MilestoneRecorder {
  catalogue::Catalogue* catalogue = nullptr;
  long deaths = 0;
};

struct MatchConfig {
  int ticks = 1800;
  SimParams params{};
  rl::DiscretizerConfig discretizer{};
  std::uint64_t seed = 0;
  // When set, chooses every shot instead of the learner (which then neither acts nor learns).
  std::function<rl::ActionId(const RelativeKinematics&, const SimParams&)> scripted_aim;
};

// Scripted aim that always fires the same skew.
inline auto fixed_aim(rl::ActionId a) {
  return [a](const RelativeKinematics&, const SimParams&) { return a; };
}

// Scripted aim that picks the skew with the highest true hit probability.
inline rl::ActionId best_aim(const RelativeKinematics& k, const SimParams& p) {
  rl::ActionId best{};
  double best_p = -1.0;
  for (const auto& a : rl::ActionId::all()) {
    const double h = learner_hit_probability(a, k, p);
    if (h > best_p) {
      best_p = h;
      best = a;
    }
  }
  return best;
}

// One 1-vs-1 game. Owns the world and the rng; borrows the learner and the
// optional balancer / recorder for its lifetime.
class Match {
 public:
  Match(const MatchConfig& cfg, const OpponentProfile& profile, rl::SarsaLearner& learner,
        catalogue::Balancer* balancer = nullptr, MilestoneRecorder* recorder = nullptr)
      : cfg_(cfg),
        profile_(profile),
        learner_(&learner),
        balancer_(balancer),
        recorder_(recorder),
        world_(make_world(cfg.params)),
        rng_(cfg.seed) {
    if (cfg_.ticks <= 0) throw ContractViolation("game duration must be positive");
    if (balancer_) {
      balancer_->reset();
      learner_->replace_table(balancer_->initial_table());
    } else {
      learner_->discard_episode();
    }
  }

  bool finished() const { return world_.tick >= cfg_.ticks; }
  const World& world() const { return world_; }
  World& world() { return world_; }  // scenario setup
  const GameLog& log() const { return log_; }
  const OpponentProfile& profile() const { return profile_; }

  // Advances one tick and returns the log records it produced.
  std::vector<LogRecord> step() {
    if (finished()) throw ContractViolation("game is over");
    const std::size_t first_new = log_.records().size();
    const SimParams& p = world_.params;
    CombatantState& me = world_.learner;
    CombatantState& opp = world_.opponent;

    me.facing_deg = heading_deg(opp.position - me.position);
    const RelativeKinematics view = observe(me, opp);
    const rl::StateKey s = rl::discretize(view.raw(), cfg_.discretizer);
    const rl::ActionId a = cfg_.scripted_aim ? cfg_.scripted_aim(view, p) : learner_->act(s, rng_);

    const OpponentStep os = opponent_policy_step(profile_, world_, rng_);

    int damage_to_opp = 0;
    int damage_to_me = 0;
    for (int round = 0; round < p.rounds_per_tick; ++round) {
      const ShotOutcome mine = resolve_learner_shot(a, view, p, rng_);
      damage_to_opp += mine.damage;
      if (!cfg_.scripted_aim) learner_->reward(rl::reward_for_shot(mine.result, learner_->config()));
    }
    if (os.fires) {
      CombatantState shooter = opp;
      shooter.facing_deg = heading_deg(me.position - opp.position);
      const double ideal = lead_heading_deg(shooter, me, p);
      const double range = (me.position - opp.position).norm();
      for (double heading : os.shot_headings_deg) {
        const double err = std::abs(wrap180(heading - ideal));
        damage_to_me += resolve_shot(hit_probability(err, 0.0, range, p), p, rng_).damage;
      }
    }
    opp.health -= damage_to_opp;
    me.health -= damage_to_me;
    opp.under_fire = damage_to_opp > 0;
    me.under_fire = damage_to_me > 0;

    const Vec2 my_velocity = learner_movement(world_, me.strafe_sign, rng_);
    opp.facing_deg = os.facing_deg;
    opp.strafe_sign = os.strafe_sign;
    move(me, my_velocity);
    move(opp, os.velocity);
    if ((opp.position - me.position).norm() < p.min_distance) {
      me.position = me.position - my_velocity;
      opp.position = opp.position - os.velocity;
      me.velocity = {};
      opp.velocity = {};
    }

    if (opp.health <= 0) learner_scores();
    if (me.health <= 0) learner_dies();
    ++world_.tick;
    return {log_.records().begin() + static_cast<std::ptrdiff_t>(first_new), log_.records().end()};
  }

  void run() {
    while (!finished()) step();
  }

 private:
  void move(CombatantState& c, Vec2 v) {
    const double lim = world_.params.arena_size;
    const Vec2 before = c.position;
    c.position = {std::clamp(before.x + v.x, 0.0, lim), std::clamp(before.y + v.y, 0.0, lim)};
    c.velocity = c.position - before;
  }

  int milestone() const {
    return balancer_ ? static_cast<int>(balancer_->state().current_index) : -1;
  }

  void record(Actor actor, Event e) {
    log_.append(LogRecord{world_.tick, actor, e, log_.learner_kills(), log_.learner_deaths(),
                          milestone()});
  }

  void respawn(CombatantState& c, const CombatantState& killer) {
    const SimParams& p = world_.params;
    c.position = p.spawns[farthest_spawn(p, killer.position)];
    c.velocity = {};
    c.health = p.max_health;
    c.under_fire = false;
    c.facing_deg = heading_deg(Vec2{p.arena_size / 2, p.arena_size / 2} - c.position);
  }

  void consult_balancer(Event e) {
    if (!balancer_) return;
    const auto action = balancer_->on_incident(e, learner_->table());
    switch (action) {
      case catalogue::BalancerAction::step_down: record(Actor::balancer, Event::milestone_down); break;
      case catalogue::BalancerAction::step_up: record(Actor::balancer, Event::milestone_up); break;
      case catalogue::BalancerAction::clearance: record(Actor::balancer, Event::policy_clearance); break;
      case catalogue::BalancerAction::none: return;
    }
    learner_->discard_episode();
  }

  void learner_scores() {
    CombatantState& me = world_.learner;
    CombatantState& opp = world_.opponent;
    ++me.kills;
    ++opp.deaths;
    log_.count_learner_kill();
    record(Actor::learner, Event::kill);
    consult_balancer(Event::kill);
    respawn(opp, me);
  }

  void learner_dies() {
    CombatantState& me = world_.learner;
    CombatantState& opp = world_.opponent;
    ++me.deaths;
    ++opp.kills;
    log_.count_learner_death();
    if (!cfg_.scripted_aim) learner_->end_episode();
    record(Actor::learner, Event::death);
    if (recorder_ && recorder_->catalogue) {
      ++recorder_->deaths;
      catalogue::maybe_capture(recorder_->deaths, learner_->table(), *recorder_->catalogue);
    }
    consult_balancer(Event::death);
    respawn(me, opp);
  }

  MatchConfig cfg_;
  OpponentProfile profile_;
  rl::SarsaLearner* learner_;
  catalogue::Balancer* balancer_;
  MilestoneRecorder* recorder_;
  World world_;
  GameLog log_;
  std::mt19937_64 rng_;
};

struct GameResult {
  GameLog log;
  Outcome outcome = Outcome::draw;
  int kills = 0;
  int deaths = 0;
  std::optional<catalogue::BalancerState> balancer;
};

inline Outcome outcome_of(int kills, int deaths) {
  if (kills > deaths) return Outcome::win;
  if (kills < deaths) return Outcome::lose;
  return Outcome::draw;
}

// Plays a full game. Without a balancer this is plain RL play on the
// learner's current table; the learner's table holds the final Q-values.
inline GameResult run_game(const MatchConfig& cfg, const OpponentProfile& profile,
                           rl::SarsaLearner& learner, catalogue::Balancer* balancer = nullptr,
                           MilestoneRecorder* recorder = nullptr) {
  Match m(cfg, profile, learner, balancer, recorder);
  m.run();
  learner.discard_episode();
  GameResult r;
  r.log = m.log();
  r.kills = r.log.learner_kills();
  r.deaths = r.log.learner_deaths();
  r.outcome = outcome_of(r.kills, r.deaths);
  if (balancer) r.balancer = balancer->state();
  return r;
}

}  // namespace sec::sim
