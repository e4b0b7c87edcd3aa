#pragma once

#include <array>
#include <stdexcept>
#include <string>

namespace sec::sim {

// Fixed-strategy opponent. Levels 1-5 follow the native bot skill table:
// speed and field of view grow with level, aim error shrinks.
struct OpponentProfile {
  int level = 1;
  double speed_fraction = 0.6;
  double aim_error_deg = 30.0;
  double fov_deg = 30.0;
  double turn_rate = 0.25;        // revolutions per second
  bool moves_in_combat = false;   // strafes while firing
  bool moves_when_idle = false;   // repositions while the learner is out of view
  bool dodges = false;            // erratic perpendicular jitter
  bool closes_in = false;         // pushes toward the learner
  bool leads_target = false;      // aims where the learner will be
  int weak_health = 25;           // a stationary bot still moves below this
};

inline OpponentProfile opponent_profile(int level) {
  // Levels 2 and 4 interpolate the attributes the table leaves blank.
  static const std::array<OpponentProfile, 5> kTable = {{
      {1, 0.6, 30.0, 30.0, 0.2, false, false, false, false, false, 25},
      {2, 0.7, 24.0, 35.0, 0.3, false, true, false, false, false, 25},
      {3, 0.8, 18.0, 40.0, 0.55, true, true, false, false, false, 25},
      {4, 0.9, 12.0, 60.0, 0.65, true, true, false, false, false, 25},
      {5, 1.0, 6.0, 80.0, 0.72, true, true, true, true, true, 25},
  }};
  if (level < 1 || level > 5) throw std::out_of_range("opponent level must be 1..5");
  return kTable[static_cast<std::size_t>(level - 1)];
}

inline std::string level_name(int level) {
  static const std::array<const char*, 5> kNames = {"Novice", "Average", "Experienced",
                                                    "Skilled", "Adept"};
  if (level < 1 || level > 5) throw std::out_of_range("opponent level must be 1..5");
  return kNames[static_cast<std::size_t>(level - 1)];
}

}  // namespace sec::sim
