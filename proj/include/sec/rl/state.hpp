#pragma once

#include <array>
#include <cmath>
#include <compare>
#include <cstddef>
#include <string>
#include <vector>

#include "sec/errors.hpp"

namespace sec::rl {

// Number of buckets per observation feature. The product is the state count.
struct BucketShape {
  int speed = 4;
  int direction = 8;
  int rotation = 8;
  int distance = 5;

  constexpr std::size_t state_count() const {
    return static_cast<std::size_t>(speed) * direction * rotation * distance;
  }
  constexpr bool valid() const {
    return speed > 0 && direction > 0 && rotation > 0 && distance > 0;
  }
  friend constexpr bool operator==(const BucketShape&, const BucketShape&) = default;
};

struct StateKey {
  int speed = 0;
  int direction = 0;
  int rotation = 0;
  int distance = 0;

  friend constexpr auto operator<=>(const StateKey&, const StateKey&) = default;
};

constexpr bool in_range(const StateKey& s, const BucketShape& shape) {
  return s.speed >= 0 && s.speed < shape.speed && s.direction >= 0 &&
         s.direction < shape.direction && s.rotation >= 0 && s.rotation < shape.rotation &&
         s.distance >= 0 && s.distance < shape.distance;
}

// Row-major ordinal, speed outermost and distance innermost.
constexpr std::size_t state_ordinal(const StateKey& s, const BucketShape& shape) {
  return ((static_cast<std::size_t>(s.speed) * shape.direction + s.direction) * shape.rotation +
          s.rotation) *
             shape.distance +
         s.distance;
}

constexpr StateKey state_from_ordinal(std::size_t ordinal, const BucketShape& shape) {
  StateKey s;
  s.distance = static_cast<int>(ordinal % shape.distance);
  ordinal /= shape.distance;
  s.rotation = static_cast<int>(ordinal % shape.rotation);
  ordinal /= shape.rotation;
  s.direction = static_cast<int>(ordinal % shape.direction);
  s.speed = static_cast<int>(ordinal / shape.direction);
  return s;
}

// A shooting action: the aim point skewed left/right and up/down from the
// opponent's absolute position. (0, 0) aims straight at the opponent.
struct ActionId {
  static constexpr int kMaxHorizontal = 2;
  static constexpr int kMaxVertical = 1;
  static constexpr int kHorizontalCount = 2 * kMaxHorizontal + 1;
  static constexpr int kVerticalCount = 2 * kMaxVertical + 1;
  static constexpr std::size_t kCount = kHorizontalCount * kVerticalCount;

  int h_skew = 0;
  int v_skew = 0;

  // Ordinal 0 is (-2, -1); vertical varies fastest.
  constexpr std::size_t ordinal() const {
    return static_cast<std::size_t>((h_skew + kMaxHorizontal) * kVerticalCount +
                                    (v_skew + kMaxVertical));
  }
  static constexpr ActionId from_ordinal(std::size_t ordinal) {
    return ActionId{static_cast<int>(ordinal) / kVerticalCount - kMaxHorizontal,
                    static_cast<int>(ordinal) % kVerticalCount - kMaxVertical};
  }
  static constexpr std::array<ActionId, kCount> all() {
    std::array<ActionId, kCount> out{};
    for (std::size_t i = 0; i < kCount; ++i) out[i] = from_ordinal(i);
    return out;
  }

  friend constexpr bool operator==(const ActionId&, const ActionId&) = default;
};

// Opponent kinematics in the learner's egocentric frame.
struct RawObservation {
  double rel_speed = 0.0;          // |v_opponent - v_learner|, arena units/tick
  double rel_direction_deg = 0.0;  // heading of that relative velocity, 0 = straight ahead
  double rel_rotation_deg = 0.0;   // opponent facing, 0 = looking straight at the learner
  double distance = 0.0;           // arena units
};

// Speed and distance use ascending upper edges (the last bucket is open).
// Direction and rotation use equal circular sectors centred on 0 degrees.
struct DiscretizerConfig {
  BucketShape shape{};
  std::vector<double> speed_edges{0.5, 1.0, 1.5};
  std::vector<double> distance_edges{10.0, 18.0, 24.0, 30.0};

  bool consistent() const {
    return shape.valid() && speed_edges.size() + 1 == static_cast<std::size_t>(shape.speed) &&
           distance_edges.size() + 1 == static_cast<std::size_t>(shape.distance);
  }
};

inline double wrap_degrees(double deg) {
  double w = std::fmod(deg, 360.0);
  if (w < 0.0) w += 360.0;
  return w;
}

inline int circular_bucket(double deg, int sectors) {
  const double width = 360.0 / sectors;
  const int b = static_cast<int>(std::floor(wrap_degrees(deg + width / 2.0) / width));
  return b >= sectors ? 0 : b;
}

inline int edge_bucket(double value, const std::vector<double>& edges) {
  int b = 0;
  for (double e : edges) {
    if (value < e) return b;
    ++b;
  }
  return b;
}

inline StateKey discretize(const RawObservation& obs, const DiscretizerConfig& cfg = {}) {
  if (!std::isfinite(obs.rel_speed) || !std::isfinite(obs.rel_direction_deg) ||
      !std::isfinite(obs.rel_rotation_deg) || !std::isfinite(obs.distance)) {
    throw MalformedObservation("observation contains a non-finite field");
  }
  if (obs.distance < 0.0 || obs.rel_speed < 0.0) {
    throw MalformedObservation("observation has negative distance or speed");
  }
  return StateKey{edge_bucket(obs.rel_speed, cfg.speed_edges),
                  circular_bucket(obs.rel_direction_deg, cfg.shape.direction),
                  circular_bucket(obs.rel_rotation_deg, cfg.shape.rotation),
                  edge_bucket(obs.distance, cfg.distance_edges)};
}

inline std::string to_string(const ActionId& a) {
  return "(" + std::to_string(a.h_skew) + "," + std::to_string(a.v_skew) + ")";
}

}  // namespace sec::rl
