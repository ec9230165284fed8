#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

namespace forge {

/// World-space point or direction. Meters, y-up, right-handed.
using Vec3 = Eigen::Vector3d;
/// Horizontal (x, z) coordinates on the floor plane.
using Vec2 = Eigen::Vector2d;

using InstanceId = std::uint32_t;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps an angle into [0, 2pi).
inline double wrap_angle(double a) {
  double w = std::fmod(a, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;
  return w;
}

inline Vec2 horizontal(const Vec3& p) { return {p.x(), p.z()}; }

struct Aabb {
  Vec3 lo = Vec3::Constant(kInf);
  Vec3 hi = Vec3::Constant(-kInf);

  bool empty() const { return lo.x() > hi.x(); }
  void extend(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  void extend(const Aabb& b) {
    lo = lo.cwiseMin(b.lo);
    hi = hi.cwiseMax(b.hi);
  }
  Vec3 center() const { return 0.5 * (lo + hi); }
  Vec3 extent() const { return hi - lo; }
  bool contains(const Vec3& p, double eps = 0.0) const {
    return (p.array() >= lo.array() - eps).all() && (p.array() <= hi.array() + eps).all();
  }
  bool overlaps(const Aabb& b) const {
    return (lo.array() <= b.hi.array()).all() && (b.lo.array() <= hi.array()).all();
  }
  double surface_area() const {
    if (empty()) return 0.0;
    const Vec3 e = extent();
    return 2.0 * (e.x() * e.y() + e.y() * e.z() + e.z() * e.x());
  }
};

/// Horizontal distance from a floor point to the (x, z) footprint of a box.
inline double footprint_distance(const Aabb& box, const Vec2& p) {
  const double dx = std::max({box.lo.x() - p.x(), 0.0, p.x() - box.hi.x()});
  const double dz = std::max({box.lo.z() - p.y(), 0.0, p.y() - box.hi.z()});
  return std::hypot(dx, dz);
}

/// Agent pose on the floor: position plus yaw heading (radians).
struct Pose {
  Vec3 position = Vec3::Zero();
  double heading = 0.0;
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace forge
