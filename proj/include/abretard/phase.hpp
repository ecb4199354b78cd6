#pragma once

// Aharonov–Bohm phase engines. Per interferometer path the phase is
//
//   φ = ½ ∫ d³r dt [ J_e·A_S + J_S·A_e ]     (both potentials retarded)
//
// with J_e a point charge q moving along the path and J_S the source current.
// The "standard" phase is q∮A_S·dl; their ratio is the retardation factor,
// 1 when the electron's potential reaches the source within the window and
// ½ when it cannot.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "abretard/em_fields.hpp"
#include "abretard/errors.hpp"
#include "abretard/geometry.hpp"
#include "abretard/quadrature.hpp"
#include "abretard/units.hpp"

namespace abretard {

inline constexpr double kResidualFloor = 1e-30;

struct Window {
  double t_i = 0.0;
  double t_f = 0.0;
  double length() const { return t_f - t_i; }
};

struct PhaseNumerics {
  int time_order = 16;
  int time_panels = 2;
  // Relative disagreement allowed between a result and its 2x-refined value.
  double tolerance = 1e-7;
};

enum class Regime { QuasiStatic, Intermediate, Retarded };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::QuasiStatic: return "quasi-static";
    case Regime::Intermediate: return "intermediate";
    case Regime::Retarded: return "retarded";
  }
  return "?";
}

struct Scenario {
  CurrentSource source;
  Polyline path1;
  Polyline path2;
  double charge = 1.0;
  double speed = 0.01;
  double t_start = 0.0;
  // Defaults to the electron transit interval.
  std::optional<Window> window;
  // Source current switched on at -inf; otherwise it switches on at t_i.
  bool static_source = true;
  PhaseNumerics numerics;

  ElectronCurrent electron(int which) const {
    return {which == 1 ? path1 : path2, speed, charge, t_start};
  }

  Window resolved_window() const {
    if (window) return *window;
    const double longest = std::max(path1.total_length(), path2.total_length());
    return {t_start, t_start + longest / speed};
  }

  double switch_on() const { return static_source ? kAlwaysOn : resolved_window().t_i; }

  void validate() const {
    detail::require(path1.front() == path2.front() && path1.back() == path2.back(),
                    "paths must share start and end vertices");
    detail::require(!path1.closed() && !path2.closed(), "paths must be open polylines");
    detail::require(speed > 0.0 && speed < 1.0, "electron speed must be in (0, c)");
    const Window w = resolved_window();
    const double longest = std::max(path1.total_length(), path2.total_length());
    detail::require(w.t_i <= t_start, "window must open no later than the electron starts");
    detail::require(w.t_f >= t_start + longest / speed * (1.0 - 1e-12), "window must cover the electron transit");
    detail::require(numerics.time_order >= 1 && numerics.time_panels >= 1, "quadrature settings must be positive");
    std::visit([](const auto& s) { s.validate(); }, source);
    if (std::holds_alternative<IdealSolenoid>(source))
      detail::require(static_source, "an ideal solenoid is only supported as a static source");
  }
};

// Rectangle interferometer in the plane z = height above a coaxial loop at the
// origin; the loop axis threads the rectangle.
inline Scenario coaxial_loop_scenario(double height, double half_width = 2.0, double loop_radius = 1.0,
                                      double speed = 0.01, int n_segments = 256) {
  const Interferometer ifm = rectangle_interferometer({0, 0, height}, {0, 0, 1}, 2 * half_width, 2 * half_width);
  CurrentLoop loop{{0, 0, 0}, {0, 0, 1}, loop_radius, 1.0, n_segments};
  return Scenario{loop, ifm.path1, ifm.path2, 1.0, speed, 0.0, std::nullopt, true, {}};
}

// ---------------------------------------------------------------------------

struct PathTerms {
  double e_dot_AS = 0.0;  // ∫ J_e·A_S d³r dt
  double S_dot_Ae = 0.0;  // ∫ J_S·A_e d³r dt
  double phase = 0.0;     // ½ (sum)
  double error = 0.0;     // refinement difference
};

struct PhaseResult {
  PathTerms path1;
  PathTerms path2;
  double phi_path1 = 0.0;
  double phi_path2 = 0.0;
  double delta_phi = 0.0;
  // Circuit differences (path1 - path2) of the two interaction terms.
  double term_e_dot_AS = 0.0;
  double term_S_dot_Ae = 0.0;
  double standard = 0.0;
  // delta_phi / standard; empty when the standard phase vanishes.
  std::optional<double> factor;
  double factor_error = 0.0;
  double p_cos = 1.0;
  double p_sin = 0.0;
  Regime regime = Regime::QuasiStatic;
};

struct DetectionProbability {
  double p_cos = 1.0;
  double p_sin = 0.0;
};

// cos²(Δφ) and sin²(Δφ). The larger one is formed as 1 minus the smaller so
// the pair sums to exactly 1.
inline DetectionProbability detection_probability(double delta_phi) {
  const double c = std::cos(delta_phi);
  const double s = std::sin(delta_phi);
  const double c2 = c * c;
  const double s2 = s * s;
  if (s2 <= c2) return {1.0 - s2, s2};
  return {c2, 1.0 - c2};
}

// Light-travel distance during a detector response time, in meters.
inline double squid_feasibility(double response_time_seconds) {
  if (!(response_time_seconds > 0.0)) throw DomainError("squid_feasibility: response time must be positive");
  return units::kSpeedOfLight * response_time_seconds;
}

// ---------------------------------------------------------------------------

namespace detail {

inline std::string format_g(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

inline double point_segment_distance(const Vec3& p, const Segment& s) {
  const Vec3 d = s.delta();
  const double u = std::clamp(dot(p - s.start, d) / dot(d, d), 0.0, 1.0);
  return distance(p, s.at(u));
}

// Smallest and largest separation between source current and the paths.
inline std::pair<double, double> source_path_extent(const Scenario& s) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  const Polyline* paths[] = {&s.path1, &s.path2};
  if (const auto* sol = std::get_if<IdealSolenoid>(&s.source)) {
    for (const Polyline* p : paths)
      for (const Segment& seg : p->segments()) {
        const Vec3 a = axis_offset(*sol, seg.start);
        const Vec3 b = axis_offset(*sol, seg.end);
        const Vec3 d = b - a;
        const double u = std::clamp(-dot(a, d) / dot(d, d), 0.0, 1.0);
        lo = std::min(lo, norm(a + u * d));
        hi = std::max({hi, norm(a), norm(b)});
      }
    return {lo, hi};
  }
  const auto elements = discretize_loop(std::get<CurrentLoop>(s.source));
  for (const LoopElement& el : elements)
    for (const Polyline* p : paths)
      for (const Segment& seg : p->segments()) {
        lo = std::min(lo, point_segment_distance(el.midpoint, seg));
        hi = std::max({hi, distance(el.midpoint, seg.start), distance(el.midpoint, seg.end)});
      }
  return {lo, hi};
}

// ∫ J_e·A_S over the transit of one path, loop source. Each element's
// contribution is integrated over the times its (possibly switched-on)
// current has reached the electron.
inline double electron_term_loop(const ElectronCurrent& e, std::span<const LoopElement> elements, const Vec3& center,
                                 double switch_on, int order, int panels) {
  const auto& segs = e.path.segments();
  const auto times = e.vertex_times();
  double total = 0.0;
  for (std::size_t k = 0; k < segs.size(); ++k) {
    const Vec3 v = e.speed * segs[k].tangent();
    const double t0 = times[k];
    const double t1 = times[k + 1];
    auto pos = [&](double t) { return segs[k].at((t - t0) / (t1 - t0)); };
    for (const LoopElement& el : elements) {
      const double weight = e.charge * el.current * el.dl * dot(v, el.tangent) / kFourPi;
      if (weight == 0.0) continue;
      double lo = t0;
      if (switch_on != kAlwaysOn) {
        // t - R(t) is increasing; find where it passes switch_on.
        auto arrived = [&](double t) { return t - distance(pos(t), el.midpoint) - switch_on; };
        if (arrived(t1) < 0.0) continue;
        if (arrived(t0) < 0.0) {
          double a = t0;
          double b = t1;
          for (int it = 0; it < 200 && b - a > 1e-14 * std::max(1.0, std::abs(b)); ++it) {
            const double m = 0.5 * (a + b);
            (arrived(m) < 0.0 ? a : b) = m;
          }
          lo = 0.5 * (a + b);
        }
      }
      // Always-on elements share one interval, so they can be measured
      // against the loop center (see element_vector_potential).
      if (switch_on == kAlwaysOn)
        total += weight * quadrature::integrate(
                              [&](double t) { return inverse_distance_difference(pos(t), el.midpoint, center); }, lo,
                              t1, order, panels);
      else
        total += weight * quadrature::integrate([&](double t) { return 1.0 / distance(pos(t), el.midpoint); }, lo,
                                                t1, order, panels);
    }
  }
  return total;
}

inline double electron_term_solenoid(const ElectronCurrent& e, const IdealSolenoid& sol) {
  double total = 0.0;
  for (const Segment& seg : e.path.segments()) total += solenoid_line_integral(sol, seg);
  return e.charge * total;
}

// ∫ J_S·A_e for a loop: elements dotted into the window-integrated
// Liénard–Wiechert potential.
inline double source_term_loop(const ElectronCurrent& e, std::span<const LoopElement> elements, const Window& w,
                               int order, int panels) {
  double total = 0.0;
  for (const LoopElement& el : elements) {
    const Vec3 a = electron_window_potential_quadrature(e, el.midpoint, w.t_i, w.t_f, order, panels);
    total += el.current * el.dl * dot(el.tangent, a);
  }
  return total;
}

// ∫ J_S·A_e for a thin flux tube: with J_S = ∇×M, M = Φ δ²(ρ) along the axis,
// the term equals Φ ∫ axis·(∇×Ā) dz, Ā the window-integrated electron potential.
inline double source_term_solenoid(const ElectronCurrent& e, const IdealSolenoid& sol, const Window& w,
                                   double tolerance) {
  const double budget = w.t_f - e.t_start;
  const auto times = e.vertex_times();
  const auto& verts = e.path.vertices();
  // Axis coordinates where a vertex's signal reaches the axis exactly at t_f,
  // plus the vertex projections, split the axis into smooth pieces.
  std::vector<double> cuts;
  double z_lo = std::numeric_limits<double>::infinity();
  double z_hi = -z_lo;
  for (std::size_t k = 0; k < verts.size(); ++k) {
    const Vec3 d = sol.axis_point - verts[k];
    const double b = dot(d, sol.axis_dir);
    cuts.push_back(-b);
    const double reach = budget - (times[k] - e.t_start);
    const double disc = b * b - (dot(d, d) - reach * reach);
    if (reach > 0.0 && disc > 0.0) {
      const double root = std::sqrt(disc);
      cuts.push_back(-b - root);
      cuts.push_back(-b + root);
      z_lo = std::min(z_lo, -b - root);
      z_hi = std::max(z_hi, -b + root);
    }
  }
  if (!(z_hi > z_lo)) return 0.0;
  auto integrand = [&](double z) {
    const Vec3 r = sol.axis_point + z * sol.axis_dir;
    return dot(sol.axis_dir, electron_window_potential(e, r, w.t_f).curl);
  };
  const auto pts = quadrature::clip_breakpoints(z_lo, z_hi, cuts);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, pts[i], pts[i + 1], 20,
                                                                           tolerance * 1e-3);
  return sol.flux * total;
}

inline PathTerms path_terms(const Scenario& s, int which, const Window& w, int panels) {
  const ElectronCurrent e = s.electron(which);
  const int order = s.numerics.time_order;
  PathTerms out;
  if (const auto* sol = std::get_if<IdealSolenoid>(&s.source)) {
    out.e_dot_AS = electron_term_solenoid(e, *sol);
    out.S_dot_Ae = source_term_solenoid(e, *sol, w, s.numerics.tolerance);
  } else {
    const auto& loop = std::get<CurrentLoop>(s.source);
    const auto elements = discretize_loop(loop);
    out.e_dot_AS = electron_term_loop(e, elements, loop.center, s.switch_on(), order, panels);
    out.S_dot_Ae = source_term_loop(e, elements, w, order, panels);
  }
  out.phase = 0.5 * (out.e_dot_AS + out.S_dot_Ae);
  return out;
}

// Computes the terms at the configured panel count and at twice that; the
// finer value is kept and the difference is its error estimate.
inline PathTerms refined_path_terms(const Scenario& s, int which, const Window& w) {
  const PathTerms coarse = path_terms(s, which, w, s.numerics.time_panels);
  PathTerms fine = path_terms(s, which, w, 2 * s.numerics.time_panels);
  const double diff =
      std::max(std::abs(fine.e_dot_AS - coarse.e_dot_AS), std::abs(fine.S_dot_Ae - coarse.S_dot_Ae));
  fine.error = diff;
  return fine;
}

}  // namespace detail

inline Regime classify_regime(const Scenario& s) {
  const auto [lo, hi] = detail::source_path_extent(s);
  const double window = s.resolved_window().length();
  if (lo > window) return Regime::Retarded;
  if (hi <= 0.01 * window) return Regime::QuasiStatic;
  return Regime::Intermediate;
}

// q ∮ A_S·dl around path1 - path2 with the static source potential.
inline double phase_standard(const Scenario& s) {
  const Polyline circuit = closed_circuit(s.path1, s.path2);
  if (const auto* sol = std::get_if<IdealSolenoid>(&s.source)) {
    double total = 0.0;
    for (const Segment& seg : circuit.segments()) total += solenoid_line_integral(*sol, seg);
    return s.charge * total;
  }
  const auto& loop = std::get<CurrentLoop>(s.source);
  const auto elements = discretize_loop(loop);
  double total = 0.0;
  for (const Segment& seg : circuit.segments()) {
    const Vec3 d = seg.delta();
    total += quadrature::integrate(
        [&](double u) {
          const Vec3 r = seg.at(u);
          require_off_wire(loop, r);
          return dot(element_vector_potential(elements, loop.center, r), d);
        },
        0.0, 1.0, s.numerics.time_order, 4 * s.numerics.time_panels);
  }
  return s.charge * total;
}

inline PhaseResult phase_full(const Scenario& s) {
  s.validate();
  const Window w = s.resolved_window();
  PhaseResult out;
  out.path1 = detail::refined_path_terms(s, 1, w);
  out.path2 = detail::refined_path_terms(s, 2, w);
  out.phi_path1 = out.path1.phase;
  out.phi_path2 = out.path2.phase;
  out.delta_phi = out.phi_path1 - out.phi_path2;
  out.term_e_dot_AS = out.path1.e_dot_AS - out.path2.e_dot_AS;
  out.term_S_dot_Ae = out.path1.S_dot_Ae - out.path2.S_dot_Ae;
  out.standard = phase_standard(s);
  out.regime = classify_regime(s);

  const double error = out.path1.error + out.path2.error;
  const double scale = std::abs(out.term_e_dot_AS) + std::abs(out.term_S_dot_Ae) +
                       std::abs(out.path1.e_dot_AS) + std::abs(out.path2.e_dot_AS);
  if (error > s.numerics.tolerance * scale + kResidualFloor)
    throw NonConvergenceError("phase quadrature did not converge: refinement changed the result by " +
                              detail::format_g(error) + " against tolerance " +
                              detail::format_g(s.numerics.tolerance * scale));
  if (out.standard != 0.0) {
    out.factor = out.delta_phi / out.standard;
    // Accepted convergence tolerance plus the measured refinement change.
    out.factor_error = s.numerics.tolerance * std::abs(*out.factor) + 0.5 * error / std::abs(out.standard);
  }
  const auto p = detection_probability(out.delta_phi);
  out.p_cos = p.p_cos;
  out.p_sin = p.p_sin;
  return out;
}

struct SourceSideResult {
  double value = 0.0;
  Regime regime = Regime::QuasiStatic;
  // Set outside the quasi-static regime, where the source-side form is not
  // expected to reproduce the standard phase.
  std::optional<std::string> warning;
};

// ∫ J_S·A_e over the circuit difference (path1 - path2).
inline SourceSideResult phase_source_side(const Scenario& s) {
  s.validate();
  const Window w = s.resolved_window();
  SourceSideResult out;
  out.value = detail::refined_path_terms(s, 1, w).S_dot_Ae - detail::refined_path_terms(s, 2, w).S_dot_Ae;
  out.regime = classify_regime(s);
  if (out.regime != Regime::QuasiStatic)
    out.warning = std::string("source-side phase evaluated in the ") + to_string(out.regime) +
                  " regime; it equals the standard phase only when retardation is negligible";
  return out;
}

inline double reciprocity_residual(const PhaseResult& r) {
  if (r.term_e_dot_AS == 0.0 && r.term_S_dot_Ae == 0.0) return 0.0;
  return std::abs(r.term_S_dot_Ae - r.term_e_dot_AS) / std::max(std::abs(r.term_e_dot_AS), kResidualFloor);
}

inline double reciprocity_residual(const Scenario& s) { return reciprocity_residual(phase_full(s)); }

// ---------------------------------------------------------------------------
// Regime scan

struct RegimePoint {
  double distance = 0.0;
  double distance_over_window = 0.0;  // D / (c (t_f - t_i))
  double factor = 0.0;
  double factor_error = 0.0;
  double delta_phi = 0.0;
  double term_e_AS = 0.0;
  double term_S_Ae = 0.0;
  std::optional<std::string> error;
};

struct RegimeCurve {
  std::vector<RegimePoint> points;
};

// Places the loop on the circuit's plane normal through the circuit centroid,
// at distance D from the plane, on the same side as in the base scenario.
inline Scenario translated_to_distance(const Scenario& base, double d) {
  auto* loop = std::get_if<CurrentLoop>(&base.source);
  if (!loop) throw DomainError("regime_scan requires a current-loop source");
  const Polyline circuit = closed_circuit(base.path1, base.path2);
  const auto [area_normal, centroid] = detail::polygon_normal_and_centroid(circuit);
  const Vec3 n = normalized(area_normal);
  const double side = dot(loop->center - centroid, n) > 0.0 ? 1.0 : -1.0;
  Scenario out = base;
  std::get<CurrentLoop>(out.source).center = centroid + (side * d) * n;
  return out;
}

inline RegimePoint regime_point(const Scenario& base, double d) {
  RegimePoint p;
  p.distance = d;
  p.distance_over_window = d / base.resolved_window().length();
  try {
    const PhaseResult r = phase_full(translated_to_distance(base, d));
    if (!r.factor) throw DomainError("standard phase vanishes; factor undefined");
    p.factor = *r.factor;
    p.factor_error = r.factor_error;
    p.delta_phi = r.delta_phi;
    p.term_e_AS = r.term_e_dot_AS;
    p.term_S_Ae = r.term_S_dot_Ae;
  } catch (const std::exception& ex) {
    p.error = "D=" + detail::format_g(d) + ": " + ex.what();
  }
  return p;
}

// Points are independent and computed concurrently; output order follows the
// input distances.
inline RegimeCurve regime_scan(const Scenario& base, const std::vector<double>& distances, unsigned threads = 0) {
  for (std::size_t i = 0; i < distances.size(); ++i) {
    detail::require(distances[i] > 0.0, "regime_scan: distances must be positive");
    if (i > 0) detail::require(distances[i] > distances[i - 1], "regime_scan: distances must be increasing");
  }
  base.validate();
  detail::require(std::holds_alternative<CurrentLoop>(base.source), "regime_scan requires a current-loop source");
  RegimeCurve curve;
  curve.points.resize(distances.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, distances.size())));
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < distances.size(); i = next++)
          curve.points[i] = regime_point(base, distances[i]);
      });
  }
  return curve;
}

// Monotone nonincreasing factor, allowing `multiple` times the combined
// per-point quadrature error between neighbours.
inline bool factor_nonincreasing(const RegimeCurve& curve, double multiple = 2.0) {
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const auto& a = curve.points[i - 1];
    const auto& b = curve.points[i];
    if (a.error || b.error) continue;
    const double slack = multiple * (a.factor_error + b.factor_error) + 1e-12;
    if (b.factor > a.factor + slack) return false;
  }
  return true;
}

inline std::vector<double> log_spaced(double lo, double hi, int count) {
  detail::require(lo > 0.0 && hi > lo && count >= 2, "log_spaced: need 0 < lo < hi and count >= 2");
  std::vector<double> out;
  const double step = std::log(hi / lo) / (count - 1);
  for (int i = 0; i < count; ++i) out.push_back(lo * std::exp(step * i));
  out.back() = hi;
  return out;
}

}  // namespace abretard
