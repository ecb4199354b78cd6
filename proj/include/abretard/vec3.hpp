#pragma once

#include <cmath>
#include <ostream>

namespace abretard {

// Spatial vector in natural units (c = 1): every component is a length.
struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  constexpr Vec3& operator-=(const Vec3& o) {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }
  constexpr Vec3& operator*=(double s) {
    x *= s;
    y *= s;
    z *= s;
    return *this;
  }

  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
constexpr Vec3 operator/(const Vec3& a, double s) { return {a.x / s, a.y / s, a.z / s}; }

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& a) { return std::hypot(a.x, a.y, a.z); }
inline double distance(const Vec3& a, const Vec3& b) { return norm(a - b); }

inline Vec3 normalized(const Vec3& a) { return a / norm(a); }

// Any unit vector perpendicular to `n` (n must be unit).
inline Vec3 any_perpendicular(const Vec3& n) {
  const Vec3 trial = std::abs(n.x) < 0.9 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0};
  return normalized(cross(n, trial));
}

inline std::ostream& operator<<(std::ostream& os, const Vec3& v) {
  return os << '(' << v.x << ", " << v.y << ", " << v.z << ')';
}

// An event: position and time, x = (r, t).
struct SpacetimePoint {
  Vec3 r;
  double t = 0.0;
};

// |a.r - b.r| - (a.t - b.t). Negative when b lies inside the past light cone
// of a (a can be influenced by b), zero on the cone.
inline double interval_separation(const SpacetimePoint& a, const SpacetimePoint& b) {
  return distance(a.r, b.r) - (a.t - b.t);
}

}  // namespace abretard
