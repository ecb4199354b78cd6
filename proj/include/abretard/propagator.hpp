#pragma once

// Retarded and advanced Green's-function kernels of the wave equation and a
// numerical check of the time-splitting identity
//
//   ∫∫_{square} J K_sym J  =  ∫∫_{t' <= t} J G^R J,   K_sym = ½(G^R + G^A),
//
// which turns the time-ordered double integral into a retarded one.

#include <cmath>
#include <functional>
#include <vector>

#include "abretard/errors.hpp"
#include "abretard/geometry.hpp"
#include "abretard/quadrature.hpp"

namespace abretard {

// Spatial (Feynman-gauge, diagonal) component of G^R and G^A for one pair of
// points: δ(t - t' ∓ |r - r'|) / (4π|r - r'|).
struct KernelEvaluation {
  double weight = 0.0;      // 1 / (4π|r - r'|)
  double separation = 0.0;  // |r - r'|
  double t_retarded = 0.0;  // source time seen by the field point: t - |r - r'|
  double t_advanced = 0.0;  // t + |r - r'|
};

inline KernelEvaluation green_kernel(const Vec3& r, const Vec3& r_prime, double t = 0.0) {
  const double sep = distance(r, r_prime);
  if (sep <= 1e-12) throw SingularPointError("green_kernel: coincident points");
  return {1.0 / (kFourPi * sep), sep, t - sep, t + sep};
}

// Two scalar current histories at fixed points (components along a common
// direction, so the index contraction is a plain product).
struct CurrentPair {
  Vec3 r_a;
  Vec3 r_b;
  std::function<double(double)> j_a;
  std::function<double(double)> j_b;
};

struct SplittingSettings {
  double t_i = 0.0;
  double t_f = 10.0;
  // Half-width of the hat function that stands in for the light-cone delta.
  // Zero resolves the delta exactly; otherwise must be below |r_a - r_b|.
  double smoothing = 0.25;
  int order = 2;
  int panels = 64;
};

struct SplittingResult {
  double square = 0.0;    // full window², symmetric kernel
  double triangle = 0.0;  // t' <= t, retarded kernel
  double residual = 0.0;
};

namespace detail {

// Unit-area hat of half-width w centred at 0.
inline double hat(double s, double w) {
  const double u = std::abs(s) / w;
  return u < 1.0 ? (1.0 - u) / w : 0.0;
}

}  // namespace detail

// Regularized retarded kernel in time: hat(s - R) / (4πR), s = t - t'.
inline double retarded_kernel_time(double s, double separation, double width) {
  return detail::hat(s - separation, width) / (kFourPi * separation);
}

inline double advanced_kernel_time(double s, double separation, double width) {
  return retarded_kernel_time(-s, separation, width);
}

// Evaluates both sides of the splitting identity. The hat kernel keeps both
// sides genuine 2-D integrals; every interval is split at the kernel kinks so
// the Gauss–Legendre panels see smooth integrands.
inline SplittingResult splitting_identity(const CurrentPair& pair, const SplittingSettings& cfg) {
  const KernelEvaluation k = green_kernel(pair.r_a, pair.r_b);
  const double R = k.separation;
  const double w = cfg.smoothing;
  detail::require(cfg.t_f > cfg.t_i, "splitting_identity: empty window");
  detail::require(w >= 0.0 && w < R, "splitting_identity: smoothing must lie in [0, |r_a - r_b|)");
  const double ti = cfg.t_i;
  const double tf = cfg.t_f;

  // Cross terms only: (a at r, b at r') plus (b at r, a at r').
  auto pair_product = [&](double t, double tp) { return pair.j_a(t) * pair.j_b(tp) + pair.j_b(t) * pair.j_a(tp); };

  SplittingResult out;
  if (w == 0.0) {
    // Delta resolved analytically in t'.
    auto chi = [&](double tp) { return tp >= ti && tp <= tf ? 1.0 : 0.0; };
    const std::vector<double> kinks{ti + R, tf - R};
    out.square = quadrature::integrate_piecewise(
        [&](double t) {
          return 0.5 * k.weight * (pair_product(t, t - R) * chi(t - R) + pair_product(t, t + R) * chi(t + R));
        },
        ti, tf, kinks, cfg.order, cfg.panels);
    out.triangle = quadrature::integrate_piecewise(
        [&](double t) { return k.weight * pair_product(t, t - R) * chi(t - R); }, ti, tf, kinks, cfg.order,
        cfg.panels);
  } else {
    auto inner_kinks = [&](double t) {
      return std::vector<double>{t - R - w, t - R, t - R + w, t + R - w, t + R, t + R + w};
    };
    const std::vector<double> outer_kinks{ti + R - w, ti + R, ti + R + w, tf - R - w, tf - R, tf - R + w};
    out.square = quadrature::integrate_piecewise(
        [&](double t) {
          const auto kinks = inner_kinks(t);
          return quadrature::integrate_piecewise(
              [&](double tp) {
                const double s = t - tp;
                return pair_product(t, tp) * 0.5 * (retarded_kernel_time(s, R, w) + advanced_kernel_time(s, R, w));
              },
              ti, tf, kinks, cfg.order, cfg.panels);
        },
        ti, tf, outer_kinks, cfg.order, cfg.panels);
    out.triangle = quadrature::integrate_piecewise(
        [&](double t) {
          const auto kinks = inner_kinks(t);
          return quadrature::integrate_piecewise(
              [&](double tp) { return pair_product(t, tp) * retarded_kernel_time(t - tp, R, w); }, ti, t, kinks,
              cfg.order, cfg.panels);
        },
        ti, tf, outer_kinks, cfg.order, cfg.panels);
  }
  constexpr double eps = 1e-30;
  out.residual = std::abs(out.square - out.triangle) / std::max(std::abs(out.square), eps);
  if (out.square == 0.0 && out.triangle == 0.0) out.residual = 0.0;
  return out;
}

inline double splitting_identity_residual(const CurrentPair& pair, const SplittingSettings& cfg = {}) {
  return splitting_identity(pair, cfg).residual;
}

}  // namespace abretard
