#include <doctest.h>

#include <cmath>
#include <numbers>

#include "vkns/fluid_state.hpp"

using namespace vkns;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST_CASE("parameter validation") {
  CHECK_NOTHROW(Params(1.0, 2.0, 2.0));
  CHECK_THROWS_AS(Params(0.0, 2.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(Params(1.0, 1.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(Params(1.0, 2.0, 1.0), std::invalid_argument);
  CHECK(Params(1.0, 2.0, 2.0).huang_li_regime());
  CHECK_FALSE(Params(1.0, 1.4, 1.2).huang_li_regime());
  CHECK_FALSE(Params(1.0, 2.0, 5.0).huang_li_regime());
}

TEST_CASE("pressure and viscosity match scalar powers") {
  const Grid g(16);
  const auto rho = RealField::from_function(g, [](double x1, double) { return 1.0 + 0.5 * std::sin(2 * pi * x1); });
  const Params p(1.0, 1.7, 1.4);
  const RealField P = pressure(rho, p);
  const RealField lam = bulk_viscosity(rho, p);
  for (std::size_t k = 0; k < rho.size(); ++k) {
    CHECK(std::abs(P[k] - std::pow(rho[k], 1.4)) <= 1e-14 * P[k]);
    CHECK(std::abs(lam[k] - std::pow(rho[k], 1.7)) <= 1e-14 * lam[k]);
  }
  const RealField sq = power(rho, 2.0);
  for (std::size_t k = 0; k < rho.size(); ++k) CHECK(sq[k] == rho[k] * rho[k]);
}

TEST_CASE("vacuum is detected with its location") {
  const Grid g(8);
  RealField rho(g, 1.0);
  rho(3, 5) = 0.0;
  try {
    require_positive(rho);
    FAIL("expected VacuumBreach");
  } catch (const VacuumBreach& e) {
    CHECK(e.i() == 3);
    CHECK(e.j() == 5);
    CHECK(e.value() == 0.0);
  }
  rho(3, 5) = -1e-3;
  CHECK_THROWS_AS(from_primitive(0.0, rho, VectorField(g)), VacuumBreach);
}

TEST_CASE("velocity and conserved quantities") {
  const Grid g(16);
  const auto rho = RealField::from_function(g, [](double x1, double) { return 1.0 + 0.2 * std::cos(2 * pi * x1); });
  const VectorField u(RealField::from_function(g, [](double, double x2) { return std::sin(2 * pi * x2); }),
                      RealField(g, 0.5));
  const FluidState s = from_primitive(0.0, rho, u);
  const VectorField back = s.velocity();
  for (std::size_t k = 0; k < rho.size(); ++k) {
    CHECK(back.x[k] == doctest::Approx(u.x[k]).epsilon(1e-15));
    CHECK(back.y[k] == doctest::Approx(0.5).epsilon(1e-15));
  }
  CHECK(mass(s) == doctest::Approx(1.0).epsilon(1e-15));
  const auto mom = momentum(s);
  CHECK(std::abs(mom[0]) <= 1e-15);
  CHECK(mom[1] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("energy of closed-form states") {
  const Grid g(16);
  const Params p(1.0, 2.0, 2.0);
  const FluidState rest(0.0, RealField(g, 1.0), VectorField(g));
  CHECK(energy(rest, p) == doctest::Approx(1.0).epsilon(1e-15));
  // rho = 1, u = (sin 2 pi x2, 0): kinetic 1/4, internal 1/(gamma - 1)
  const VectorField u(RealField::from_function(g, [](double, double x2) { return std::sin(2 * pi * x2); }),
                      RealField(g));
  const Params p3(1.0, 2.0, 3.0);
  CHECK(energy(from_primitive(0.0, RealField(g, 1.0), u), p3) == doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("initial states are normalized") {
  const Grid g(8);
  for (InitKind kind : {InitKind::random_band_limited, InitKind::constant_plus_mode,
                        InitKind::mollified_target}) {
    InitConfig cfg;
    cfg.kind = kind;
    cfg.seed = 17;
    cfg.mollify_width = 2.0 / 8;
    const FluidState s = make_initial_state(g, cfg);
    CHECK(std::abs(mass(s) - 1.0) <= 1e-12);
    CHECK(std::abs(momentum(s)[0]) <= 1e-12);
    CHECK(std::abs(momentum(s)[1]) <= 1e-12);
    CHECK(min_value(s.rho) > 0.0);
  }
}

TEST_CASE("initial density respects the bounds") {
  const Grid g(32);
  InitConfig cfg;
  cfg.density_amplitude = 5.0;
  cfg.bound_min = 0.2;
  cfg.bound_max = 3.0;
  const FluidState s = make_initial_state(g, cfg);
  CHECK(min_value(s.rho) >= 0.2 - 1e-12);
  CHECK(max_value(s.rho) <= 3.0 + 1e-12);
  CHECK(mass(s) == doctest::Approx(1.0).epsilon(1e-12));
  cfg.bound_min = 0.0;
  CHECK_THROWS_AS(make_initial_state(g, cfg), std::invalid_argument);
}

TEST_CASE("different seeds give different fields") {
  const Grid g(32);
  const RealField a = random_band_limited(g, 1, 6);
  const RealField b = random_band_limited(g, 2, 6);
  CHECK(lp_norm(a - b, 2.0) > 0.0);
  CHECK(max_abs(a) == doctest::Approx(1.0));
  CHECK(std::abs(mean(a)) <= 1e-15);
  const RealField again = random_band_limited(g, 1, 6);
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k] == again[k]);
}

TEST_CASE("mollification") {
  const Grid g(32);
  const RealField f = random_band_limited(g, 3, 15);
  const RealField same = mollify(f, 0.5 / 32);
  for (std::size_t k = 0; k < f.size(); ++k) CHECK(same[k] == f[k]);
  const RealField smooth = mollify(f, 4.0 / 32);
  CHECK(mean(smooth) == doctest::Approx(mean(f)).epsilon(1e-14));
  CHECK(lp_norm(smooth, 2.0) < lp_norm(f, 2.0));
  RealField c(g, 2.5);
  const RealField mc = mollify(c, 3.0 / 32);
  for (std::size_t k = 0; k < c.size(); ++k) CHECK(mc[k] == doctest::Approx(2.5).epsilon(1e-14));
}

TEST_CASE("init kind names round trip") {
  for (InitKind k : {InitKind::constant_plus_mode, InitKind::random_band_limited, InitKind::mollified_target})
    CHECK(init_kind_from_string(to_string(k)) == k);
  CHECK_THROWS(init_kind_from_string("gaussian"));
}
