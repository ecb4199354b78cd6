#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "abretard/propagator.hpp"
#include "oracles.hpp"

using namespace abretard;
using Catch::Approx;

namespace {

CurrentPair sinusoidal_pair() {
  return {{0, 0, 0}, {1.3, 0.4, -0.2}, [](double t) { return std::sin(1.7 * t + 0.3); },
          [](double t) { return std::cos(2.3 * t - 1.1); }};
}

CurrentPair constant_pair() {
  return {{0, 0, 0}, {0, 1.2, 0}, [](double) { return 1.0; }, [](double) { return -0.7; }};
}

}  // namespace

TEST_CASE("green_kernel weight and light-cone times", "[propagator]") {
  const auto k1 = green_kernel({0, 0, 0}, {1, 0, 0}, 3.0);
  CHECK(k1.weight == Approx(1.0 / (4.0 * std::numbers::pi)));
  CHECK(k1.t_retarded == 2.0);
  CHECK(k1.t_advanced == 4.0);
  CHECK(k1.t_retarded <= k1.t_advanced);
  const auto k2 = green_kernel({0, 0, 0}, {0, 2, 0});
  CHECK(k2.weight == Approx(0.5 * k1.weight));
  CHECK(green_kernel({1, 2, 3}, {-4, 0, 2}).weight == green_kernel({-4, 0, 2}, {1, 2, 3}).weight);
  CHECK_THROWS_AS(green_kernel({1, 1, 1}, {1, 1, 1}), SingularPointError);
}

TEST_CASE("kernel depends only on the separation", "[propagator][property]") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 100; ++i) {
    const Vec3 r{u(rng), u(rng), u(rng)};
    const Vec3 rp{u(rng), u(rng), u(rng)};
    const Vec3 shift{u(rng), u(rng), u(rng)};
    CHECK(green_kernel(r + shift, rp + shift).weight == Approx(green_kernel(r, rp).weight).epsilon(1e-13));
    // Symmetrized kernel is even under (r,t) <-> (r',t').
    const double s = u(rng);
    const double R = distance(r, rp);
    const double sym = retarded_kernel_time(s, R, 0.5) + advanced_kernel_time(s, R, 0.5);
    const double swapped = retarded_kernel_time(-s, R, 0.5) + advanced_kernel_time(-s, R, 0.5);
    CHECK(sym == swapped);
  }
}

TEST_CASE("splitting identity with constant currents", "[propagator]") {
  SplittingSettings cfg;
  cfg.t_i = 0.0;
  cfg.t_f = 40.0;
  const auto r = splitting_identity(constant_pair(), cfg);
  CHECK(r.residual <= 1e-8);
  CHECK(std::abs(r.square) > 0.0);
}

TEST_CASE("splitting identity with sinusoidal currents converges", "[propagator][convergence]") {
  SplittingSettings cfg;
  const double coarse = splitting_identity_residual(sinusoidal_pair(), cfg);
  cfg.panels *= 2;
  const double fine = splitting_identity_residual(sinusoidal_pair(), cfg);
  CHECK(coarse <= 1e-6);
  CHECK(coarse / fine >= 4.0);
}

TEST_CASE("splitting identity with no light-cone overlap", "[propagator]") {
  CurrentPair pair = sinusoidal_pair();
  pair.r_b = {30, 0, 0};
  const auto r = splitting_identity(pair, {0.0, 10.0, 0.25, 2, 16});
  CHECK(r.square == 0.0);
  CHECK(r.triangle == 0.0);
  CHECK(r.residual == 0.0);
}

TEST_CASE("hat-regularized kernel approaches the exact delta", "[propagator]") {
  const CurrentPair pair = sinusoidal_pair();
  const auto exact = splitting_identity(pair, {0.0, 10.0, 0.0, 8, 32});
  CHECK(exact.residual <= 1e-12);
  double previous = std::numeric_limits<double>::infinity();
  for (const double w : {0.2, 0.1, 0.05}) {
    const auto smooth = splitting_identity(pair, {0.0, 10.0, w, 8, 16});
    const double gap = std::abs(smooth.triangle - exact.triangle);
    CHECK(gap < previous);
    previous = gap;
  }
  CHECK(previous <= 1e-3 * std::abs(exact.triangle));
}

TEST_CASE("static currents: triangle is half of the full symmetric integral", "[propagator]") {
  // Full double integral of (G^R + G^A) over the square, by direct 2-D
  // quadrature with the hat kernel, against the retarded triangle.
  const CurrentPair pair = constant_pair();
  SplittingSettings cfg{0.0, 30.0, 0.3, 4, 8};
  const auto split = splitting_identity(pair, cfg);
  const double R = distance(pair.r_a, pair.r_b);
  const double w = cfg.smoothing;
  auto product = [&](double t, double tp) { return pair.j_a(t) * pair.j_b(tp) + pair.j_b(t) * pair.j_a(tp); };
  const std::vector<double> outer{R - w, R, R + w, cfg.t_f - R - w, cfg.t_f - R, cfg.t_f - R + w};
  const double full = quadrature::integrate_piecewise(
      [&](double t) {
        const std::vector<double> inner{t - R - w, t - R, t - R + w, t + R - w, t + R, t + R + w};
        return quadrature::integrate_piecewise(
            [&](double tp) {
              return product(t, tp) * (retarded_kernel_time(t - tp, R, w) + advanced_kernel_time(t - tp, R, w));
            },
            cfg.t_i, cfg.t_f, inner, 4, 8);
      },
      cfg.t_i, cfg.t_f, outer, 4, 8);
  CHECK(split.triangle == Approx(0.5 * full).epsilon(1e-12));
}

TEST_CASE("splitting identity is symmetric in the pair", "[propagator][property]") {
  CurrentPair pair = sinusoidal_pair();
  CurrentPair swapped{pair.r_b, pair.r_a, pair.j_b, pair.j_a};
  const auto a = splitting_identity(pair, {});
  const auto b = splitting_identity(swapped, {});
  CHECK(a.square == Approx(b.square).epsilon(1e-12));
  CHECK(a.triangle == Approx(b.triangle).epsilon(1e-12));
}

TEST_CASE("splitting identity rejects a smoothing wider than the separation", "[propagator]") {
  CHECK_THROWS_AS(splitting_identity(sinusoidal_pair(), {0.0, 10.0, 5.0, 2, 16}), DomainError);
}
