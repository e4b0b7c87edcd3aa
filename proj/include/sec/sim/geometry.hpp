#pragma once

#include <cmath>
#include <numbers>

namespace sec::sim {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double k) const { return {x * k, y * k}; }
  constexpr Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  double norm() const { return std::hypot(x, y); }
  friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

constexpr double kDegPerRad = 180.0 / std::numbers::pi;

inline double deg_to_rad(double deg) { return deg / kDegPerRad; }
inline double rad_to_deg(double rad) { return rad * kDegPerRad; }

// Wraps into (-180, 180].
inline double wrap180(double deg) {
  double w = std::fmod(deg + 180.0, 360.0);
  if (w <= 0.0) w += 360.0;
  return w - 180.0;
}

inline double heading_deg(Vec2 v) { return rad_to_deg(std::atan2(v.y, v.x)); }

inline Vec2 unit_from_deg(double deg) {
  const double r = deg_to_rad(deg);
  return {std::cos(r), std::sin(r)};
}

// Rotates `v` by -deg, i.e. expresses a world vector in a frame whose +x axis
// points along `deg`.
inline Vec2 to_frame(Vec2 v, double deg) {
  const double r = deg_to_rad(deg);
  const double c = std::cos(r), s = std::sin(r);
  return {c * v.x + s * v.y, -s * v.x + c * v.y};
}

inline Vec2 normalized(Vec2 v) {
  const double n = v.norm();
  return n > 0.0 ? v * (1.0 / n) : Vec2{};
}

}  // namespace sec::sim
