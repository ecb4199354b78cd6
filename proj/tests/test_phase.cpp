#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "abretard/phase.hpp"
#include "oracles.hpp"

using namespace abretard;
using Catch::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

Scenario solenoid_scenario(double flux, double speed = 1e-3) {
  const auto ifm = rectangle_interferometer({0, 0, 0}, {0, 0, 1}, 4.0, 4.0);
  return Scenario{IdealSolenoid{{0.3, -0.2, 0}, {0, 0, 1}, flux}, ifm.path1, ifm.path2, 1.0, speed, 0.0,
                  std::nullopt, true, {}};
}

Scenario quasi_static() { return coaxial_loop_scenario(0.5, 2.0, 1.0, 1e-4); }
Scenario retarded() { return coaxial_loop_scenario(2000.0, 2.0, 1.0, 0.01); }

Scenario transformed(const Scenario& s, const RigidTransform& T) {
  Scenario out = s;
  out.path1 = T(s.path1);
  out.path2 = T(s.path2);
  std::visit([&](auto& src) { src = T(src); }, out.source);
  return out;
}

}  // namespace

TEST_CASE("standard phase of a solenoid is q times the flux", "[phase]") {
  Scenario s = solenoid_scenario(2.0 * kPi);
  CHECK(phase_standard(s) == Approx(2.0 * kPi).epsilon(1e-12));
  s.charge = 2.0;
  CHECK(phase_standard(s) == Approx(4.0 * kPi).epsilon(1e-12));
  s.path1 = s.path1.reversed();
  s.path2 = s.path2.reversed();
  CHECK(phase_standard(s) == Approx(-4.0 * kPi).epsilon(1e-12));
}

TEST_CASE("standard phase vanishes when the circuit does not enclose the flux", "[phase]") {
  Scenario s = solenoid_scenario(1.0);
  std::get<IdealSolenoid>(s.source).axis_point = {7, 1, 0};
  CHECK(std::abs(phase_standard(s)) < 1e-8);
}

TEST_CASE("standard phase is invariant under path deformation", "[phase][property]") {
  Scenario s = solenoid_scenario(1.3);
  const double before = phase_standard(s);
  const auto& v = s.path1.vertices();
  // Push a bump into path1 that stays clear of the axis.
  s.path1 = Polyline({v[0], 0.5 * (v[0] + v[1]) + Vec3{0.7, -0.4, 0.9}, v[1], v[2]});
  CHECK(phase_standard(s) == Approx(before).epsilon(1e-12));

  // Same for a loop: only the deformation's enclosed flux changes the value,
  // so a bump in the loop plane's normal direction with no area leaves it.
  Scenario q = quasi_static();
  const double q_before = phase_standard(q);
  const auto& w = q.path2.vertices();
  const Vec3 mid = 0.5 * (w[0] + w[1]);
  q.path2 = Polyline({w[0], mid, mid + Vec3{0, 0, 0.3}, mid, w[1], w[2]});
  CHECK(phase_standard(q) == Approx(q_before).epsilon(1e-8));
}

TEST_CASE("standard phase is additive in the winding number", "[phase]") {
  Scenario s = solenoid_scenario(0.9);
  const double once = phase_standard(s);
  const auto& a = s.path1.vertices();
  const auto& d = s.path2.vertices()[1];
  s.path1 = Polyline({a[0], a[1], a[2], d, a[0], a[1], a[2]});
  CHECK(phase_standard(s) == Approx(2.0 * once).epsilon(1e-12));
}

TEST_CASE("quasi-static limit reproduces the standard phase", "[phase]") {
  const PhaseResult r = phase_full(quasi_static());
  CHECK(r.regime == Regime::QuasiStatic);
  REQUIRE(r.factor);
  CHECK(*r.factor == Approx(1.0).margin(1e-3));
  CHECK(r.term_e_dot_AS == Approx(r.standard).epsilon(1e-9));
  CHECK(r.term_S_dot_Ae == Approx(r.term_e_dot_AS).epsilon(1e-3));
  CHECK(reciprocity_residual(r) <= 1e-3);
  CHECK(r.delta_phi == Approx(r.phi_path1 - r.phi_path2).epsilon(1e-15));
  CHECK(r.p_cos + r.p_sin == 1.0);
}

TEST_CASE("retarded limit gives half the standard phase", "[phase]") {
  const PhaseResult r = phase_full(retarded());
  CHECK(r.regime == Regime::Retarded);
  CHECK(r.path1.S_dot_Ae == 0.0);
  CHECK(r.path2.S_dot_Ae == 0.0);
  CHECK(r.term_S_dot_Ae == 0.0);
  REQUIRE(r.factor);
  CHECK(*r.factor == Approx(0.5).margin(1e-3));
  CHECK(reciprocity_residual(r) == 1.0);
}

TEST_CASE("zero source current gives no phase", "[phase]") {
  Scenario s = quasi_static();
  std::get<CurrentLoop>(s.source).current = 0.0;
  const PhaseResult r = phase_full(s);
  CHECK(r.delta_phi == 0.0);
  CHECK(r.standard == 0.0);
  CHECK_FALSE(r.factor);
  CHECK(r.p_cos == 1.0);
  CHECK(r.p_sin == 0.0);
  CHECK(reciprocity_residual(r) == 0.0);
}

TEST_CASE("identical paths cancel exactly", "[phase]") {
  Scenario s = quasi_static();
  s.path2 = s.path1;
  const PhaseResult r = phase_full(s);
  CHECK(r.delta_phi == 0.0);
  CHECK(r.term_e_dot_AS == 0.0);
  CHECK(r.term_S_dot_Ae == 0.0);
  CHECK_FALSE(r.factor);
}

TEST_CASE("phase is linear in source current and charge", "[phase][property]") {
  Scenario s = coaxial_loop_scenario(0.5, 2.0, 1.0, 0.01);
  const PhaseResult base = phase_full(s);
  std::get<CurrentLoop>(s.source).current = -2.5;
  const PhaseResult scaled_current = phase_full(s);
  CHECK(scaled_current.delta_phi == Approx(-2.5 * base.delta_phi).epsilon(1e-12));
  s.charge = 3.0;
  const PhaseResult scaled_both = phase_full(s);
  CHECK(scaled_both.delta_phi == Approx(-7.5 * base.delta_phi).epsilon(1e-12));
  CHECK(*scaled_both.factor == Approx(*base.factor).epsilon(1e-12));
}

TEST_CASE("phase is invariant under rigid motions", "[phase][property]") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  const Scenario s = coaxial_loop_scenario(0.8, 2.0, 1.0, 0.02, 64);
  const PhaseResult base = phase_full(s);
  for (int trial = 0; trial < 3; ++trial) {
    const auto T = RigidTransform::rotation(oracle::random_unit(rng), u(rng), {u(rng), u(rng), u(rng)});
    const PhaseResult r = phase_full(transformed(s, T));
    CHECK(r.delta_phi == Approx(base.delta_phi).epsilon(1e-9));
    CHECK(r.term_S_dot_Ae == Approx(base.term_S_dot_Ae).epsilon(1e-9));
  }
}

TEST_CASE("solenoid: quasi-static full phase matches the standard phase", "[phase]") {
  const PhaseResult r = phase_full(solenoid_scenario(1.0, 1e-4));
  REQUIRE(r.factor);
  CHECK(*r.factor == Approx(1.0).margin(1e-3));
  CHECK(r.term_e_dot_AS == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("switched-on source far outside the light cone gives exactly zero", "[phase]") {
  Scenario s = retarded();
  s.static_source = false;
  const PhaseResult r = phase_full(s);
  CHECK(r.term_e_dot_AS == 0.0);
  CHECK(r.term_S_dot_Ae == 0.0);
  CHECK(r.delta_phi == 0.0);
}

TEST_CASE("source-side phase", "[phase]") {
  const Scenario qs = quasi_static();
  const auto near = phase_source_side(qs);
  CHECK(near.regime == Regime::QuasiStatic);
  CHECK_FALSE(near.warning);
  CHECK(near.value == Approx(phase_standard(qs)).epsilon(1e-3));

  const auto far = phase_source_side(retarded());
  CHECK(far.value == 0.0);
  REQUIRE(far.warning);
  CHECK(far.warning->find("retarded") != std::string::npos);

  Scenario neutral = qs;
  neutral.charge = 0.0;
  CHECK(phase_source_side(neutral).value == 0.0);
}

TEST_CASE("scenario validation", "[phase]") {
  Scenario s = quasi_static();
  s.path2 = Polyline({s.path2.front(), {9, 9, 9}});
  CHECK_THROWS_AS(phase_full(s), DomainError);

  Scenario fast = quasi_static();
  fast.speed = 1.0;
  CHECK_THROWS_AS(phase_full(fast), DomainError);

  Scenario short_window = quasi_static();
  short_window.window = Window{0.0, 1.0};
  CHECK_THROWS_AS(phase_full(short_window), DomainError);

  Scenario switched = solenoid_scenario(1.0);
  switched.static_source = false;
  CHECK_THROWS_AS(phase_full(switched), DomainError);
}

TEST_CASE("coarse quadrature with a tight tolerance reports nonconvergence", "[phase]") {
  Scenario s = coaxial_loop_scenario(0.5, 2.0, 1.0, 0.3, 64);
  s.numerics = {1, 1, 1e-14};
  CHECK_THROWS_AS(phase_full(s), NonConvergenceError);
}

TEST_CASE("regime scan runs from the quasi-static to the retarded limit", "[phase][scan]") {
  const Scenario base = coaxial_loop_scenario(1.0, 2.0, 1.0, 1e-3);
  const double window = base.resolved_window().length();
  const auto d = log_spaced(0.01 * window, 100.0 * window, 16);
  const RegimeCurve curve = regime_scan(base, d, 1);
  REQUIRE(curve.points.size() == 16);
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK_FALSE(curve.points[i].error);
    CHECK(curve.points[i].distance == d[i]);
  }
  CHECK(curve.points.front().factor == Approx(1.0).margin(1e-2));
  CHECK(curve.points.back().factor == Approx(0.5).margin(1e-2));
  CHECK(factor_nonincreasing(curve));

  // Threads only change scheduling.
  const RegimeCurve parallel = regime_scan(base, d, 4);
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(parallel.points[i].factor == curve.points[i].factor);
}

TEST_CASE("regime scan input checks", "[phase][scan]") {
  const Scenario base = quasi_static();
  CHECK_THROWS_AS(regime_scan(base, {5.0, 3.0}), DomainError);
  CHECK_THROWS_AS(regime_scan(base, {-1.0, 3.0}), DomainError);
  CHECK_THROWS_AS(regime_scan(solenoid_scenario(1.0), {1.0, 2.0}), DomainError);
}

TEST_CASE("monotonicity check honours the per-point error", "[phase][scan]") {
  RegimeCurve c;
  c.points.resize(3);
  c.points[0].factor = 1.0;
  c.points[1].factor = 0.8;
  c.points[2].factor = 0.81;
  CHECK_FALSE(factor_nonincreasing(c));
  c.points[1].factor_error = c.points[2].factor_error = 0.01;
  CHECK(factor_nonincreasing(c));
}

TEST_CASE("detection probabilities sum to one", "[phase][property]") {
  CHECK(detection_probability(0.0).p_cos == 1.0);
  CHECK(detection_probability(0.0).p_sin == 0.0);
  CHECK(detection_probability(kPi / 2).p_sin == Approx(1.0));
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int i = 0; i < 1000; ++i) {
    const auto p = detection_probability(u(rng));
    CHECK(p.p_cos + p.p_sin == 1.0);
    CHECK(p.p_cos >= 0.0);
    CHECK(p.p_sin >= 0.0);
  }
}

TEST_CASE("SQUID light-travel distance", "[phase]") {
  CHECK(squid_feasibility(1e-6) == Approx(299.792458).epsilon(1e-15));
  CHECK(squid_feasibility(1e-6) >= 299.7);
  CHECK(squid_feasibility(1e-6) <= 299.9);
  CHECK_THROWS_AS(squid_feasibility(0.0), DomainError);
  CHECK_THROWS_AS(squid_feasibility(-1.0), DomainError);
}
