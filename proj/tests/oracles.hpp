#pragma once

// Reference computations for the tests. None of these call into the
// implementation paths they are used to check.

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "abretard/geometry.hpp"

namespace oracle {

using abretard::Vec3;

inline constexpr double kPi = std::numbers::pi;

// A_phi of a circular loop (radius a, current I, Heaviside–Lorentz) at
// cylindrical (rho, z) from the complete elliptic integrals.
inline double loop_aphi_elliptic(double a, double current, double rho, double z) {
  const double denom = (a + rho) * (a + rho) + z * z;
  const double m = 4.0 * a * rho / denom;
  const double k = std::sqrt(m);
  return current / (4.0 * kPi) * 4.0 * a / std::sqrt(denom) *
         ((2.0 - m) * std::comp_ellint_1(k) - 2.0 * std::comp_ellint_2(k)) / m;
}

// Same quantity by a brute-force midpoint sum over n current elements.
inline double loop_aphi_segment_sum(double a, double current, double rho, double z, long n) {
  double sum = 0.0;
  const double dtheta = 2.0 * kPi / static_cast<double>(n);
  for (long k = 0; k < n; ++k) {
    const double th = (static_cast<double>(k) + 0.5) * dtheta;
    const double dist = std::sqrt(rho * rho + a * a - 2.0 * a * rho * std::cos(th) + z * z);
    sum += a * std::cos(th) * dtheta / dist;
  }
  return current / (4.0 * kPi) * sum;
}

inline double loop_axial_bz(double a, double current, double z) {
  return current * a * a / (2.0 * std::pow(a * a + z * z, 1.5));
}

// Charge q moving uniformly from p0 with velocity u during [t0, t1].
struct UniformCharge {
  Vec3 p0;
  Vec3 u;
  double q = 1.0;
  double t0 = 0.0;
  double t1 = 1.0;

  Vec3 at(double t) const { return p0 + (t - t0) * u; }

  // Retarded time from the quadratic |r - p(t')| = t - t', without bounds.
  double retarded_time(const Vec3& r, double t) const {
    const Vec3 w = r - p0 + t0 * u;  // r - p(t') = w - t' u
    // |w - t' u|² = (t - t')²
    const double a = dot(u, u) - 1.0;
    const double b = -2.0 * dot(w, u) + 2.0 * t;
    const double c = dot(w, w) - t * t;
    const double disc = b * b - 4.0 * a * c;
    // One root lies on the past light cone, the other on the future one.
    const double r1 = (-b + std::sqrt(disc)) / (2.0 * a);
    const double r2 = (-b - std::sqrt(disc)) / (2.0 * a);
    return std::min(r1, r2);
  }
};

// Retarded A from ∫dt' q u δ(t - t' - R(t')) / (4πR): write the delta as
// d/dt of a step, integrate the step form by quadrature and differentiate
// numerically with a 5-point stencil.
inline Vec3 retarded_potential_by_step_derivative(const UniformCharge& c, const Vec3& r, double t) {
  auto cumulative = [&](double tt) {
    const double upper = std::clamp(c.retarded_time(r, tt), c.t0, c.t1);
    if (upper <= c.t0) return 0.0;
    auto f = [&](double tp) { return 1.0 / abretard::distance(r, c.at(tp)); };
    return boost::math::quadrature::gauss<double, 30>::integrate(f, c.t0, upper) / (4.0 * kPi);
  };
  const double h = 1e-3 * std::max(1e-3, abretard::distance(r, c.at(c.retarded_time(r, t))));
  const double d = (cumulative(t - 2 * h) - 8 * cumulative(t - h) + 8 * cumulative(t + h) - cumulative(t + 2 * h)) /
                   (12.0 * h);
  return (c.q * d) * c.u;
}

// Uniform-motion potential from the present position (unbounded motion).
inline Vec3 heaviside_uniform_potential(const UniformCharge& c, const Vec3& r, double t) {
  const Vec3 d = r - c.at(t);
  const Vec3 uxd = cross(c.u, d);
  return (c.q / (4.0 * kPi * std::sqrt(dot(d, d) - dot(uxd, uxd)))) * c.u;
}

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  for (;;) {
    const Vec3 v{g(rng), g(rng), g(rng)};
    const double n = abretard::norm(v);
    if (n > 1e-6) return v / n;
  }
}

}  // namespace oracle
