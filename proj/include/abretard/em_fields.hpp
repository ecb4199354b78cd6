#pragma once

// Vector potentials and magnetic fields of the current sources, in natural
// Heaviside–Lorentz units (c = 1): A(r) = ∫ J / (4π|r - r'|) d³r'.

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "abretard/errors.hpp"
#include "abretard/geometry.hpp"
#include "abretard/quadrature.hpp"

namespace abretard {

inline constexpr double kAlwaysOn = -std::numeric_limits<double>::infinity();

struct FieldSample {
  Vec3 A;
  Vec3 B;
  SpacetimePoint at;
};

// ---------------------------------------------------------------------------
// Ideal solenoid

// Azimuthal offset of r from the axis, i.e. the perpendicular vector rho.
inline Vec3 axis_offset(const IdealSolenoid& s, const Vec3& r) {
  const Vec3 d = r - s.axis_point;
  return d - dot(d, s.axis_dir) * s.axis_dir;
}

inline Vec3 solenoid_vector_potential(const IdealSolenoid& s, const Vec3& r) {
  const Vec3 rho = axis_offset(s, r);
  const double rho_len = norm(rho);
  if (rho_len < 1e-12) throw SingularPointError("solenoid vector potential evaluated on the axis");
  return (s.flux / (kTwoPi * rho_len * rho_len)) * cross(s.axis_dir, rho);
}

// Signed azimuth swept about the axis along a straight segment, in (-π, π).
inline double swept_angle(const IdealSolenoid& s, const Segment& seg) {
  const Vec3 a = axis_offset(s, seg.start);
  const Vec3 b = axis_offset(s, seg.end);
  // Closest approach of the projected segment must stay off the axis.
  const Vec3 d = b - a;
  const double len2 = dot(d, d);
  const double u = len2 > 0.0 ? std::clamp(-dot(a, d) / len2, 0.0, 1.0) : 0.0;
  if (norm(a + u * d) < 1e-12) throw SingularPointError("segment crosses the solenoid axis");
  return std::atan2(dot(s.axis_dir, cross(a, b)), dot(a, b));
}

// Exact ∫ A·dl along a straight segment: Φ/(2π) times the swept azimuth.
inline double solenoid_line_integral(const IdealSolenoid& s, const Segment& seg) {
  return s.flux * swept_angle(s, seg) / kTwoPi;
}

// ---------------------------------------------------------------------------
// Discretized current loop

inline double distance_to_loop_wire(const CurrentLoop& loop, const Vec3& r) {
  const Vec3 d = r - loop.center;
  const double z = dot(d, loop.normal);
  const double rho = norm(d - z * loop.normal);
  return std::hypot(z, rho - loop.radius);
}

inline void require_off_wire(const CurrentLoop& loop, const Vec3& r) {
  if (distance_to_loop_wire(loop, r) <= 1e-9 * loop.radius)
    throw SingularPointError("loop field evaluated on the wire");
}

inline Vec3 element_vector_potential(std::span<const LoopElement> elements, const Vec3& r) {
  Vec3 a;
  for (const LoopElement& e : elements) a += (e.current * e.dl / (kFourPi * distance(r, e.midpoint))) * e.tangent;
  return a;
}

// 1/|r - m| - 1/|r - c| without the cancellation of forming both terms.
inline double inverse_distance_difference(const Vec3& r, const Vec3& m, const Vec3& c) {
  const Vec3 d = r - m;
  const Vec3 dc = r - c;
  const double R = norm(d);
  const double Rc = norm(dc);
  // At the reference point itself drop the (constant) reference term instead.
  if (Rc == 0.0) return 1.0 / R;
  return dot(m - c, dc + d) / (R * Rc * (R + Rc));
}

// Same sum for the elements of one closed loop of uniform current around
// `center`. Σ dl t̂ vanishes for the closed loop, so each element can be
// measured against the center; this keeps the far field (∝ 1/D²) accurate
// where the plain sum loses it to cancellation between ∝ 1/D terms.
inline Vec3 element_vector_potential(std::span<const LoopElement> elements, const Vec3& center, const Vec3& r) {
  Vec3 a;
  for (const LoopElement& e : elements)
    a += (e.current * e.dl / kFourPi * inverse_distance_difference(r, e.midpoint, center)) * e.tangent;
  return a;
}

inline Vec3 element_magnetic_field(std::span<const LoopElement> elements, const Vec3& r) {
  Vec3 b;
  for (const LoopElement& e : elements) {
    const Vec3 d = r - e.midpoint;
    const double dist = norm(d);
    b += (e.current * e.dl / (kFourPi * dist * dist * dist)) * cross(e.tangent, d);
  }
  return b;
}

// Retarded potential of elements whose current switches on (as a step) at
// `switch_on`; each element contributes once its switch-on front arrives.
inline Vec3 element_vector_potential_retarded(std::span<const LoopElement> elements, const Vec3& r, double t,
                                              double switch_on) {
  if (switch_on == kAlwaysOn) return element_vector_potential(elements, r);
  Vec3 a;
  for (const LoopElement& e : elements) {
    const double dist = distance(r, e.midpoint);
    if (t - dist >= switch_on) a += (e.current * e.dl / (kFourPi * dist)) * e.tangent;
  }
  return a;
}

inline Vec3 loop_vector_potential_static(const CurrentLoop& loop, const Vec3& r) {
  require_off_wire(loop, r);
  const auto elements = discretize_loop(loop);
  return element_vector_potential(elements, loop.center, r);
}

// Retardation drops out for a constant current switched on at -inf, so this
// reduces to the static sum in that case.
inline Vec3 loop_vector_potential_retarded(const CurrentLoop& loop, const Vec3& r, double t,
                                           double switch_on = kAlwaysOn) {
  require_off_wire(loop, r);
  const auto elements = discretize_loop(loop);
  if (switch_on == kAlwaysOn) return element_vector_potential(elements, loop.center, r);
  return element_vector_potential_retarded(elements, r, t, switch_on);
}

inline Vec3 loop_magnetic_field(const CurrentLoop& loop, const Vec3& r) {
  require_off_wire(loop, r);
  const auto elements = discretize_loop(loop);
  return element_magnetic_field(elements, r);
}

// ---------------------------------------------------------------------------
// Electron (moving point charge)

// Root of f(t') = t - t' - |r - r_e(t')| inside the current's support, if any.
// f is strictly decreasing for subluminal motion, so the support endpoints
// decide existence and bisection converges.
inline std::optional<double> retarded_time(const ElectronCurrent& e, const SpacetimePoint& at) {
  const double t0 = e.t_start;
  const double t1 = e.t_end();
  auto f = [&](double tp) { return at.t - tp - distance(at.r, trajectory_state(e, tp).position); };
  const double f0 = f(t0);
  if (f0 < 0.0) return std::nullopt;  // signal from the first emission has not arrived
  const double f1 = f(t1);
  if (f1 > 0.0) return std::nullopt;  // retarded time falls after the current stopped
  if (f0 == 0.0) return t0;
  if (f1 == 0.0) return t1;
  double lo = t0;
  double hi = t1;
  const double tol = std::max(1e-12, 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi)));
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= tol || mid == lo || mid == hi) return mid;
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  throw NonConvergenceError("retarded-time bisection did not converge");
}

// Liénard–Wiechert vector potential q v / (4π R (1 - n·v)) at the retarded
// time; exactly zero when no retarded time lies in the support.
inline Vec3 retarded_potential_of_electron(const ElectronCurrent& e, const SpacetimePoint& at) {
  if (at.t < e.t_start) return {};
  const auto tr = retarded_time(e, at);
  if (!tr) return {};
  const TrajectoryState st = trajectory_state(e, *tr);
  const Vec3 d = at.r - st.position;
  const double r = norm(d);
  if (r < 1e-12) throw SingularPointError("field point coincides with the retarded charge position");
  const double kappa = 1.0 - dot(d, st.velocity) / r;
  return (e.charge / (kFourPi * r * kappa)) * st.velocity;
}

// ∫ du / |r - (p + u t)| for u in [0, length], t unit.
inline double segment_inverse_distance_integral(const Vec3& p, const Vec3& t, double length, const Vec3& r) {
  const Vec3 d = r - p;
  const double a = dot(d, t);
  const double rho = norm(cross(t, d));
  if (rho > 1e-14 * (std::abs(a) + length)) return std::asinh((length - a) / rho) + std::asinh(a / rho);
  if (a < 0.0) return std::log((length - a) / -a);
  if (a > length) return std::log(a / (a - length));
  throw SingularPointError("inverse-distance integral evaluated on the segment");
}

// Biot–Savart field of a straight wire from p along t with unit current.
inline Vec3 segment_biot_savart(const Vec3& p, const Vec3& t, double length, const Vec3& r) {
  const Vec3 d = r - p;
  const Vec3 txd = cross(t, d);
  const double rho2 = dot(txd, txd);
  if (rho2 == 0.0) return {};
  const double a = dot(d, t);
  const double r0 = norm(d);
  const double r1 = norm(r - (p + length * t));
  return ((a / r0 + (length - a) / r1) / (kFourPi * rho2)) * txd;
}

// Electron potential integrated over an observation window ending at t_f,
// together with its curl. Substituting the retarded time turns the window
// integral into the static potential of the path prefix whose signals reach r
// by t_f; the prefix end moves with r, which adds a boundary term to the curl.
struct WindowPotential {
  Vec3 A;
  Vec3 curl;
  double covered_length = 0.0;
};

// Arc length s_end with s_end/v + |r - r_e(s_end)| = t_f - t_start, clamped
// to [0, L].
inline double covered_arc_length(const ElectronCurrent& e, const Vec3& r, double t_f) {
  const double budget = t_f - e.t_start;
  const double length = e.path.total_length();
  auto g = [&](double s) { return s / e.speed + distance(r, e.path.point_at(s)) - budget; };
  if (g(0.0) >= 0.0) return 0.0;
  if (g(length) <= 0.0) return length;
  double lo = 0.0;
  double hi = length;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * length; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline WindowPotential electron_window_potential(const ElectronCurrent& e, const Vec3& r, double t_f) {
  WindowPotential out;
  const double s_end = covered_arc_length(e, r, t_f);
  out.covered_length = s_end;
  if (s_end <= 0.0) return out;
  const auto& segs = e.path.segments();
  const auto& cum = e.path.cumulative_lengths();
  const double scale = e.charge / kFourPi;
  for (std::size_t i = 0; i < segs.size() && cum[i] < s_end; ++i) {
    const double len = std::min(cum[i + 1], s_end) - cum[i];
    const Vec3 t = segs[i].tangent();
    out.A += (e.charge * segment_inverse_distance_integral(segs[i].start, t, len, r) / kFourPi) * t;
    out.curl += e.charge * segment_biot_savart(segs[i].start, t, len, r);
  }
  if (s_end < e.path.total_length()) {
    std::size_t i = 0;
    while (i + 1 < segs.size() && s_end >= cum[i + 1]) ++i;
    const Vec3 t = segs[i].tangent();
    const Vec3 d = r - e.path.point_at(s_end);
    const double dist = norm(d);
    const Vec3 n = d / dist;
    out.curl -= (scale / (dist * (1.0 / e.speed - dot(n, t)))) * cross(n, t);
  }
  return out;
}

// Same window integral by Gauss–Legendre over observation time of the
// Liénard–Wiechert potential, split where each vertex's signal arrives.
inline Vec3 electron_window_potential_quadrature(const ElectronCurrent& e, const Vec3& r, double t_i, double t_f,
                                                 int order, int panels) {
  const auto times = e.vertex_times();
  const auto& verts = e.path.vertices();
  const double first_arrival = times.front() + distance(r, verts.front());
  if (first_arrival >= t_f) return {};
  std::vector<double> kinks;
  for (std::size_t k = 0; k < verts.size(); ++k) kinks.push_back(times[k] + distance(r, verts[k]));
  const double lo = std::max(t_i, first_arrival);
  return quadrature::integrate_piecewise(
      [&](double t) { return retarded_potential_of_electron(e, {r, t}); }, lo, t_f, kinks, order, panels);
}

// ---------------------------------------------------------------------------
// Enclosed flux

struct FluxQuadrature {
  // Sub-intervals per circuit edge and per fan-triangle side.
  int subdivisions = 64;
};

struct FluxResult {
  double line_integral = 0.0;                  // ∮ A·dl
  std::optional<double> surface_integral;      // ∬ B·dA, planar circuits only
};

namespace detail {

// Newell normal (area-weighted) and centroid of a closed polygon.
inline std::pair<Vec3, Vec3> polygon_normal_and_centroid(const Polyline& circuit) {
  Vec3 n;
  Vec3 c;
  for (const Segment& s : circuit.segments()) {
    n += cross(s.start, s.end);
    c += s.start;
  }
  c = c / static_cast<double>(circuit.vertices().size());
  return {0.5 * n, c};
}

inline bool is_planar(const Polyline& circuit, double tol) {
  const auto [n, c] = polygon_normal_and_centroid(circuit);
  const double area = norm(n);
  if (area == 0.0) return false;
  const Vec3 unit = n / area;
  double scale = 0.0;
  for (const Vec3& v : circuit.vertices()) scale = std::max(scale, distance(v, c));
  for (const Vec3& v : circuit.vertices())
    if (std::abs(dot(v - c, unit)) > tol * std::max(1.0, scale)) return false;
  return true;
}

// Composite degree-2 rule on a triangle split into m² congruent pieces, using
// the edge midpoints of every piece.
template <class F>
double triangle_integral(F&& f, const Vec3& a, const Vec3& b, const Vec3& c, int m) {
  const Vec3 eu = (b - a) / m;
  const Vec3 ev = (c - a) / m;
  const double piece_area = 0.5 * norm(cross(eu, ev));
  auto node = [&](double i, double j) { return a + i * eu + j * ev; };
  double sum = 0.0;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; i + j < m; ++j) {
      // Upright piece (i,j), (i+1,j), (i,j+1).
      sum += (f(node(i + 0.5, j)) + f(node(i + 0.5, j + 0.5)) + f(node(i, j + 0.5))) * (piece_area / 3.0);
      // Inverted piece (i+1,j), (i+1,j+1), (i,j+1).
      if (i + j + 1 < m)
        sum += (f(node(i + 1, j + 0.5)) + f(node(i + 0.5, j + 1)) + f(node(i + 0.5, j + 0.5))) * (piece_area / 3.0);
    }
  }
  return sum;
}

// Signed count of the solenoid axis piercing triangle (a, b, c); a piercing
// exactly on an edge counts one half, at a vertex the angle there over 2π.
inline double axis_piercing(const IdealSolenoid& s, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 n = cross(b - a, c - a);
  const double denom = dot(n, s.axis_dir);
  if (denom == 0.0) return 0.0;
  const double lambda = dot(n, a - s.axis_point) / denom;
  const Vec3 p = s.axis_point + lambda * s.axis_dir;
  const double w0 = dot(n, cross(b - p, c - p));
  const double w1 = dot(n, cross(c - p, a - p));
  const double w2 = dot(n, cross(a - p, b - p));
  if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) return 0.0;
  const int on_edges = (w0 == 0.0) + (w1 == 0.0) + (w2 == 0.0);
  double weight = on_edges == 0 ? 1.0 : 0.5;
  if (on_edges >= 2) {
    // Only the pierced vertex keeps a nonzero barycentric weight.
    const Vec3& corner = w0 != 0.0 ? a : (w1 != 0.0 ? b : c);
    const Vec3& x = w0 != 0.0 ? b : (w1 != 0.0 ? c : a);
    const Vec3& y = w0 != 0.0 ? c : (w1 != 0.0 ? a : b);
    weight = std::atan2(norm(cross(x - corner, y - corner)), dot(x - corner, y - corner)) / kTwoPi;
  }
  return weight * (denom > 0.0 ? 1.0 : -1.0);
}

}  // namespace detail

// ∮ A·dl around a closed circuit; for planar circuits also ∬ B·dA over a fan
// triangulation from the vertex centroid.
inline FluxResult enclosed_flux(const CurrentSource& source, const Polyline& circuit,
                                const FluxQuadrature& quad = {}) {
  if (!circuit.closed()) throw DomainError("enclosed_flux: circuit must be closed");
  detail::require(quad.subdivisions >= 1, "enclosed_flux: subdivisions must be >= 1");
  FluxResult out;
  const bool planar = detail::is_planar(circuit, 1e-9);
  const Vec3 centroid = detail::polygon_normal_and_centroid(circuit).second;

  if (const auto* sol = std::get_if<IdealSolenoid>(&source)) {
    for (const Segment& seg : circuit.segments()) out.line_integral += solenoid_line_integral(*sol, seg);
    if (planar) {
      double pierced = 0.0;
      for (const Segment& seg : circuit.segments())
        pierced += detail::axis_piercing(*sol, centroid, seg.start, seg.end);
      out.surface_integral = sol->flux * pierced;
    }
    return out;
  }

  const auto& loop = std::get<CurrentLoop>(source);
  const auto elements = discretize_loop(loop);
  for (const Segment& seg : circuit.segments()) {
    const Vec3 t = seg.delta();
    out.line_integral += quadrature::integrate(
        [&](double u) {
          const Vec3 r = seg.at(u);
          require_off_wire(loop, r);
          return dot(element_vector_potential(elements, loop.center, r), t);
        },
        0.0, 1.0, 2, quad.subdivisions);
  }
  if (planar) {
    double flux = 0.0;
    for (const Segment& seg : circuit.segments()) {
      const Vec3 area_normal = cross(seg.start - centroid, seg.end - centroid);
      const double area2 = norm(area_normal);
      if (area2 == 0.0) continue;
      const Vec3 unit = area_normal / area2;
      flux += detail::triangle_integral(
          [&](const Vec3& r) {
            require_off_wire(loop, r);
            return dot(element_magnetic_field(elements, r), unit);
          },
          centroid, seg.start, seg.end, quad.subdivisions);
    }
    out.surface_integral = flux;
  }
  return out;
}

// Static A and B of a source at an event.
inline FieldSample field_sample(const CurrentSource& source, const SpacetimePoint& at) {
  if (const auto* sol = std::get_if<IdealSolenoid>(&source)) return {solenoid_vector_potential(*sol, at.r), {}, at};
  const auto& loop = std::get<CurrentLoop>(source);
  require_off_wire(loop, at.r);
  const auto elements = discretize_loop(loop);
  return {element_vector_potential(elements, loop.center, at.r), element_magnetic_field(elements, at.r), at};
}

}  // namespace abretard
