#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "abretard/errors.hpp"
#include "abretard/vec3.hpp"

namespace abretard {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kFourPi = 4.0 * std::numbers::pi;

// A straight piece of a polyline.
struct Segment {
  Vec3 start;
  Vec3 end;

  Vec3 delta() const { return end - start; }
  double length() const { return norm(end - start); }
  Vec3 tangent() const { return normalized(end - start); }
  Vec3 at(double fraction) const { return start + fraction * (end - start); }
};

// Ordered vertices; when closed the last vertex connects back to the first.
class Polyline {
 public:
  Polyline(std::vector<Vec3> vertices, bool closed = false) : vertices_(std::move(vertices)), closed_(closed) {
    detail::require(vertices_.size() >= 2, "polyline needs at least 2 vertices");
    for (std::size_t i = 0; i + 1 < vertices_.size(); ++i)
      detail::require(!(vertices_[i] == vertices_[i + 1]), "polyline has repeated consecutive vertices");
    if (closed_) {
      // Tolerate an explicitly repeated first vertex.
      if (vertices_.front() == vertices_.back()) vertices_.pop_back();
      detail::require(vertices_.size() >= 2, "closed polyline needs at least 2 distinct vertices");
    }
    for (std::size_t i = 0; i + 1 < vertices_.size(); ++i) segments_.push_back({vertices_[i], vertices_[i + 1]});
    if (closed_) segments_.push_back({vertices_.back(), vertices_.front()});
    double total = 0.0;
    cumulative_.push_back(0.0);
    for (const Segment& s : segments_) {
      total += s.length();
      cumulative_.push_back(total);
    }
    detail::require(total > 0.0, "polyline has zero length");
  }

  const std::vector<Vec3>& vertices() const { return vertices_; }
  bool closed() const { return closed_; }
  const Vec3& front() const { return vertices_.front(); }
  // Last point reached when walking the polyline (the first vertex if closed).
  const Vec3& back() const { return closed_ ? vertices_.front() : vertices_.back(); }

  const std::vector<Segment>& segments() const { return segments_; }

  double total_length() const { return cumulative_.back(); }

  // Arc length at the start of each segment, plus the total at the end.
  const std::vector<double>& cumulative_lengths() const { return cumulative_; }

  // Point at arc length s, clamped to [0, total_length].
  Vec3 point_at(double s) const {
    const auto& segs = segments_;
    if (s <= 0.0) return segs.front().start;
    for (std::size_t i = 0; i < segs.size(); ++i) {
      if (s <= cumulative_[i + 1]) {
        const double len = cumulative_[i + 1] - cumulative_[i];
        return segs[i].at((s - cumulative_[i]) / len);
      }
    }
    return segs.back().end;
  }

  Polyline reversed() const {
    std::vector<Vec3> v(vertices_.rbegin(), vertices_.rend());
    if (closed_) {
      // Keep the same starting vertex.
      v.insert(v.begin(), v.back());
      v.pop_back();
    }
    return Polyline(std::move(v), closed_);
  }

 private:
  std::vector<Vec3> vertices_;
  bool closed_ = false;
  std::vector<Segment> segments_;
  std::vector<double> cumulative_;
};

// Closed circuit: path1 followed by path2 walked backwards. Both must share
// their start and end vertices.
inline Polyline closed_circuit(const Polyline& path1, const Polyline& path2) {
  detail::require(!path1.closed() && !path2.closed(), "interferometer paths must be open");
  detail::require(path1.front() == path2.front() && path1.back() == path2.back(),
                  "interferometer paths must share start and end vertices");
  std::vector<Vec3> v = path1.vertices();
  const auto& back = path2.vertices();
  for (auto it = back.rbegin() + 1; it != back.rend(); ++it) v.push_back(*it);
  return Polyline(std::move(v), true);
}

struct CurrentLoop {
  Vec3 center;
  Vec3 normal{0.0, 0.0, 1.0};
  double radius = 1.0;
  double current = 1.0;
  int n_segments = 256;

  void validate() const {
    detail::require(std::abs(norm(normal) - 1.0) <= 1e-12, "loop normal must be a unit vector");
    detail::require(radius > 0.0, "loop radius must be positive");
    detail::require(n_segments >= 8, "loop needs at least 8 segments");
  }
};

// Infinitely long, infinitely thin flux tube: B = E = 0 everywhere off axis.
struct IdealSolenoid {
  Vec3 axis_point;
  Vec3 axis_dir{0.0, 0.0, 1.0};
  double flux = 1.0;

  void validate() const {
    detail::require(std::abs(norm(axis_dir) - 1.0) <= 1e-12, "solenoid axis must be a unit vector");
  }
};

using CurrentSource = std::variant<CurrentLoop, IdealSolenoid>;

// One midpoint-rule current element of a discretized loop.
struct LoopElement {
  Vec3 midpoint;
  Vec3 tangent;
  double dl = 0.0;
  double current = 0.0;
};

// Orthonormal in-plane basis (e1, e2) with e1 x e2 = normal.
inline std::pair<Vec3, Vec3> plane_basis(const Vec3& normal) {
  const Vec3 e1 = any_perpendicular(normal);
  return {e1, cross(normal, e1)};
}

// Uniform partition of the loop into n arcs; each element sits at the arc
// midpoint on the circle, tangent along the current (right-handed about the
// loop normal).
inline std::vector<LoopElement> discretize_loop(const CurrentLoop& loop) {
  if (loop.n_segments < 8) throw DomainError("discretize_loop: n_segments must be >= 8");
  loop.validate();
  const auto [e1, e2] = plane_basis(loop.normal);
  const int n = loop.n_segments;
  const double dl = kTwoPi * loop.radius / n;
  std::vector<LoopElement> out;
  out.reserve(n);
  for (int k = 0; k < n; ++k) {
    const double theta = kTwoPi * (k + 0.5) / n;
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    out.push_back({loop.center + loop.radius * (c * e1 + s * e2), -s * e1 + c * e2, dl, loop.current});
  }
  return out;
}

// Classical point charge moving at constant speed along a polyline; its
// current vanishes outside [t_start, t_start + length / speed].
struct ElectronCurrent {
  Polyline path;
  double speed = 0.01;
  double charge = 1.0;
  double t_start = 0.0;

  void validate() const {
    detail::require(!path.closed(), "electron path must be open");
    detail::require(speed > 0.0 && speed < 1.0, "electron speed must be in (0, c)");
  }

  double transit_time() const { return path.total_length() / speed; }
  double t_end() const { return t_start + transit_time(); }

  // Time at which the charge passes each vertex.
  std::vector<double> vertex_times() const {
    std::vector<double> out;
    for (const double s : path.cumulative_lengths()) out.push_back(t_start + s / speed);
    return out;
  }
};

struct TrajectoryState {
  Vec3 position;
  Vec3 velocity;
  bool active = false;
};

// Outside the support the charge is inactive with zero velocity; the position
// is then pinned to the nearest end of the path.
inline TrajectoryState trajectory_state(const ElectronCurrent& e, double t) {
  const double tau = t - e.t_start;
  const double length = e.path.total_length();
  if (tau < 0.0) return {e.path.front(), {}, false};
  const double s = e.speed * tau;
  if (s > length) return {e.path.back(), {}, false};
  const auto& cum = e.path.cumulative_lengths();
  const auto& segs = e.path.segments();
  std::size_t i = 0;
  while (i + 1 < segs.size() && s >= cum[i + 1]) ++i;
  const double len = cum[i + 1] - cum[i];
  return {segs[i].at((s - cum[i]) / len), e.speed * segs[i].tangent(), true};
}

// Signed number of times the closed circuit path1 - path2 winds around the
// axis, counted right-handed about axis_dir.
inline int winding_number(const Polyline& path1, const Polyline& path2, const Vec3& axis_point, const Vec3& axis_dir) {
  const Polyline circuit = closed_circuit(path1, path2);
  const Vec3 n = normalized(axis_dir);
  const auto [e1, e2] = plane_basis(n);
  auto project = [&](const Vec3& p) {
    const Vec3 d = p - axis_point;
    return std::array<double, 2>{dot(d, e1), dot(d, e2)};
  };
  double total_angle = 0.0;
  for (const Segment& seg : circuit.segments()) {
    const auto a = project(seg.start);
    const auto b = project(seg.end);
    // Distance from the axis to the projected segment.
    const double dx = b[0] - a[0];
    const double dy = b[1] - a[1];
    const double len2 = dx * dx + dy * dy;
    double u = len2 > 0.0 ? -(a[0] * dx + a[1] * dy) / len2 : 0.0;
    u = std::clamp(u, 0.0, 1.0);
    const double px = a[0] + u * dx;
    const double py = a[1] + u * dy;
    if (std::hypot(px, py) < 1e-9) throw DomainError("winding_number: circuit passes through the axis");
    const double cross_z = a[0] * b[1] - a[1] * b[0];
    const double dot_ab = a[0] * b[0] + a[1] * b[1];
    total_angle += std::atan2(cross_z, dot_ab);
  }
  return static_cast<int>(std::lround(total_angle / kTwoPi));
}

// Planar rectangle interferometer. path1 runs along +u then +v, path2 along
// +v then +u; the circuit path1 - path2 is counterclockwise about `normal`.
struct Interferometer {
  Polyline path1;
  Polyline path2;
};

inline Interferometer rectangle_interferometer(const Vec3& center, const Vec3& normal, double width, double height) {
  detail::require(width > 0.0 && height > 0.0, "interferometer dimensions must be positive");
  const auto [u, v] = plane_basis(normalized(normal));
  const Vec3 a = center - 0.5 * width * u - 0.5 * height * v;
  const Vec3 b = center + 0.5 * width * u - 0.5 * height * v;
  const Vec3 c = center + 0.5 * width * u + 0.5 * height * v;
  const Vec3 d = center - 0.5 * width * u + 0.5 * height * v;
  return {Polyline({a, b, c}), Polyline({a, d, c})};
}

// Proper rotation plus translation.
struct RigidTransform {
  std::array<Vec3, 3> rows{Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};
  Vec3 shift;

  // Rotation by `angle` about unit `axis` (Rodrigues), then translation.
  static RigidTransform rotation(const Vec3& axis, double angle, const Vec3& shift = {}) {
    const Vec3 k = normalized(axis);
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const double t = 1.0 - c;
    RigidTransform out;
    out.rows = {Vec3{c + k.x * k.x * t, k.x * k.y * t - k.z * s, k.x * k.z * t + k.y * s},
                Vec3{k.y * k.x * t + k.z * s, c + k.y * k.y * t, k.y * k.z * t - k.x * s},
                Vec3{k.z * k.x * t - k.y * s, k.z * k.y * t + k.x * s, c + k.z * k.z * t}};
    out.shift = shift;
    return out;
  }

  Vec3 rotate(const Vec3& v) const { return {dot(rows[0], v), dot(rows[1], v), dot(rows[2], v)}; }
  Vec3 operator()(const Vec3& p) const { return rotate(p) + shift; }

  Polyline operator()(const Polyline& p) const {
    std::vector<Vec3> v;
    for (const Vec3& x : p.vertices()) v.push_back((*this)(x));
    return Polyline(std::move(v), p.closed());
  }
  CurrentLoop operator()(CurrentLoop loop) const {
    loop.center = (*this)(loop.center);
    loop.normal = normalized(rotate(loop.normal));
    return loop;
  }
  IdealSolenoid operator()(IdealSolenoid s) const {
    s.axis_point = (*this)(s.axis_point);
    s.axis_dir = normalized(rotate(s.axis_dir));
    return s;
  }
};

}  // namespace abretard
