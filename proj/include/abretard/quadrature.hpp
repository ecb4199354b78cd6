#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include <boost/math/special_functions/legendre.hpp>

#include "abretard/errors.hpp"

namespace abretard::quadrature {

// Gauss–Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussRule(int order) {
    detail::require(order >= 1, "Gauss-Legendre order must be >= 1");
    // legendre_p_zeros returns the non-negative half of the roots.
    const auto half = boost::math::legendre_p_zeros<double>(order);
    for (const double x : half) {
      const double dp = boost::math::legendre_p_prime<double>(order, x);
      const double w = 2.0 / ((1.0 - x * x) * dp * dp);
      nodes.push_back(x);
      weights.push_back(w);
      if (x != 0.0) {
        nodes.push_back(-x);
        weights.push_back(w);
      }
    }
  }

  int order() const { return static_cast<int>(nodes.size()); }
};

// Shared immutable rules; construction is serialized, lookups return stable
// references.
inline const GaussRule& gauss_legendre(int order) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<const GaussRule>> cache;
  const std::lock_guard lock(mutex);
  auto& slot = cache[order];
  if (!slot) slot = std::make_unique<const GaussRule>(order);
  return *slot;
}

// Composite Gauss–Legendre over [a, b] split into `panels` equal panels.
template <class F>
auto integrate(F&& f, double a, double b, int order, int panels = 1) {
  const GaussRule& rule = gauss_legendre(order);
  using Result = decltype(f(a) * 1.0);
  Result sum{};
  if (b == a) return sum;
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    const double mid = lo + 0.5 * h;
    Result panel{};
    for (int k = 0; k < rule.order(); ++k) panel += f(mid + 0.5 * h * rule.nodes[k]) * rule.weights[k];
    sum += panel * (0.5 * h);
  }
  return sum;
}

// Sorted, deduplicated breakpoints clipped to [a, b], including both ends.
inline std::vector<double> clip_breakpoints(double a, double b, std::span<const double> interior) {
  std::vector<double> pts{a, b};
  for (const double x : interior)
    if (x > a && x < b) pts.push_back(x);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

// Integrates piecewise-smooth f over [a, b], splitting at the given kinks.
template <class F>
auto integrate_piecewise(F&& f, double a, double b, std::span<const double> kinks, int order, int panels = 1) {
  using Result = decltype(f(a) * 1.0);
  Result sum{};
  if (!(b > a)) return sum;
  const auto pts = clip_breakpoints(a, b, kinks);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) sum += integrate(f, pts[i], pts[i + 1], order, panels);
  return sum;
}

}  // namespace abretard::quadrature
