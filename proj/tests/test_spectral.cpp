#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "vkns/fluid_state.hpp"
#include "vkns/spectral.hpp"

using namespace vkns;

namespace {

constexpr double pi = std::numbers::pi;

double max_diff(const RealField& a, const RealField& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
  return d;
}

// Direct DFT sum at one wavenumber.
std::complex<double> dft(const RealField& f, int m1, int m2) {
  const Grid& g = f.grid();
  std::complex<double> acc = 0.0;
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.n(); ++j) {
      const double ph = -2.0 * pi * (m1 * g.coord(i) + m2 * g.coord(j));
      acc += f(i, j) * std::complex<double>(std::cos(ph), std::sin(ph));
    }
  return acc / static_cast<double>(g.size());
}

}  // namespace

TEST_CASE("forward transform matches a direct DFT sum") {
  const Grid g(8);
  const RealField f = random_band_limited(g, 11, 2);
  const SpectralField F = to_spectral(f);
  double err = 0.0;
  for (int a = 0; a < g.n(); ++a)
    for (int b = 0; b < g.half(); ++b)
      err = std::max(err, std::abs(F(a, b) - dft(f, g.mode(a), g.half_mode(b))));
  CHECK(err <= 1e-13);
}

TEST_CASE("round trip is exact to round-off") {
  for (int n : {8, 64}) {
    const Grid g(n);
    const RealField f = random_band_limited(g, 3, n / 3);
    CHECK(max_diff(to_real(to_spectral(f)), f) <= 1e-12);
  }
}

TEST_CASE("mean mode equals the grid mean") {
  const Grid g(16);
  RealField f = random_band_limited(g, 5, 4);
  f += 0.75;
  CHECK(to_spectral(f)(0, 0).real() == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(mean(f) == doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("Parseval") {
  const Grid g(32);
  const RealField f = random_band_limited(g, 9, 10);
  const double l2 = lp_norm(f, 2.0);
  CHECK(parseval_sum(to_spectral(f)) == doctest::Approx(l2 * l2).epsilon(1e-12));
}

TEST_CASE("derivatives of single modes") {
  const Grid g(32);
  const auto s = RealField::from_function(g, [](double x1, double x2) {
    return std::sin(2 * pi * x1) * std::cos(4 * pi * x2);
  });
  const auto d1 = RealField::from_function(g, [](double x1, double x2) {
    return 2 * pi * std::cos(2 * pi * x1) * std::cos(4 * pi * x2);
  });
  const auto d2 = RealField::from_function(g, [](double x1, double x2) {
    return -4 * pi * std::sin(2 * pi * x1) * std::sin(4 * pi * x2);
  });
  CHECK(max_diff(derivative(s, Axis::x1), d1) <= 1e-11);
  CHECK(max_diff(derivative(s, Axis::x2), d2) <= 1e-11);
  const auto lap = RealField::from_function(g, [](double x1, double x2) {
    return -20 * pi * pi * std::sin(2 * pi * x1) * std::cos(4 * pi * x2);
  });
  CHECK(max_diff(laplacian(s), lap) <= 1e-9);
}

TEST_CASE("divergence and rot of a shear flow") {
  const Grid g(32);
  const VectorField u(RealField::from_function(g, [](double, double x2) { return std::sin(2 * pi * x2); }),
                      RealField(g));
  CHECK(max_abs(divergence(u)) <= 1e-12);
  const auto expected =
      RealField::from_function(g, [](double, double x2) { return 2 * pi * std::cos(2 * pi * x2); });
  CHECK(max_diff(rot(u), expected) <= 1e-11);
}

TEST_CASE("inverse Laplacian inverts the forward Laplacian") {
  const Grid g(64);
  RealField f = random_band_limited(g, 21, 12);
  const RealField h = inv_laplacian_zero_mean(f);
  CHECK(max_diff(laplacian(h), f) <= 1e-10);
  CHECK(std::abs(mean(h)) <= 1e-14);
}

TEST_CASE("inverse Laplacian drops the mean") {
  const Grid g(32);
  RealField f = random_band_limited(g, 2, 5);
  const RealField ref = inv_laplacian_zero_mean(f);
  RealField shifted = f;
  shifted += 1e-12;  // below the warning level
  CHECK(max_diff(inv_laplacian_zero_mean(shifted), ref) <= 1e-15);
}

TEST_CASE("Riesz compositions sum to minus the identity on mean-free fields") {
  const Grid g(64);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    RealField f = random_band_limited(g, seed, 21);
    f += 0.3;
    RealField sum = riesz_composition(1, 1, f) + riesz_composition(2, 2, f);
    sum += f;
    sum += -mean(f);
    CHECK(max_abs(sum) <= 1e-12);
  }
}

TEST_CASE("Riesz composition symbol on a single mode") {
  // f = cos(2 pi (x1 + 2 x2)): R1 R2 f = -(1 * 2) / 5 f
  const Grid g(16);
  const auto f =
      RealField::from_function(g, [](double x1, double x2) { return std::cos(2 * pi * (x1 + 2 * x2)); });
  CHECK(max_diff(riesz_composition(1, 2, f), -0.4 * f) <= 1e-13);
  CHECK(max_diff(riesz_composition(2, 1, f), -0.4 * f) <= 1e-13);
  CHECK(max_diff(riesz_composition(2, 2, f), -0.8 * f) <= 1e-13);
  CHECK(max_diff(riesz_composition(1, 1, f), -0.2 * f) <= 1e-13);
  CHECK_THROWS(riesz_composition(0, 1, f));
}

TEST_CASE("single Riesz transforms compose to the pair multiplier") {
  const Grid g(32);
  const RealField f = random_band_limited(g, 4, 10);
  const SpectralField F = to_spectral(f);
  for (int i = 1; i <= 2; ++i)
    for (int j = 1; j <= 2; ++j) {
      const RealField a = to_real(riesz(i, riesz(j, F)));
      const RealField b = to_real(riesz_composition(i, j, F));
      CHECK(max_diff(a, b) <= 1e-13);
    }
}

TEST_CASE("dealiased product matches the closed form") {
  // sin^2(2 pi x1) = (1 - cos(4 pi x1)) / 2 at n = 8: modes 0 and +-2 survive
  // the 2/3 truncation (8/3 > 2).
  const Grid g(8);
  const auto s = RealField::from_function(g, [](double x1, double) { return std::sin(2 * pi * x1); });
  const SpectralField P = dealias(to_spectral(s * s));
  const auto exact = RealField::from_function(
      g, [](double x1, double) { return 0.5 * (1.0 - std::cos(4 * pi * x1)); });
  const SpectralField E = to_spectral(exact);
  double err = 0.0;
  for (int a = 0; a < g.n(); ++a)
    for (int b = 0; b < g.half(); ++b) err = std::max(err, std::abs(P(a, b) - E(a, b)));
  CHECK(err <= 1e-15);
}

TEST_CASE("dealias zeroes modes outside the band") {
  const Grid g(24);
  SpectralField F = to_spectral(random_band_limited(g, 8, 12));
  dealias_in_place(F);
  for (int a = 0; a < g.n(); ++a)
    for (int b = 0; b < g.half(); ++b)
      if (std::max(std::abs(g.mode(a)), std::abs(g.half_mode(b))) > 8) CHECK(F(a, b) == 0.0);
  CHECK(in_dealiased_band(g, 8, 8));
  CHECK_FALSE(in_dealiased_band(g, 9, 0));
}

TEST_CASE("non-finite input is rejected") {
  const Grid g(8);
  RealField f(g, 1.0);
  f(2, 3) = std::nan("");
  CHECK_THROWS_AS(to_spectral(f), NonFiniteError);
  CHECK_FALSE(f.all_finite());
}

TEST_CASE("grid quadrature and norms") {
  const Grid g(32);
  const auto s = RealField::from_function(g, [](double x1, double) { return std::sin(2 * pi * x1); });
  CHECK(integral(s) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(lp_norm(s, 2.0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));
  CHECK(lp_norm(s, 4.0) == doctest::Approx(std::pow(3.0 / 8.0, 0.25)).epsilon(1e-14));
  CHECK(max_abs(s) == doctest::Approx(1.0));
  CHECK(lp_norm(s, INFINITY) == doctest::Approx(1.0));
}

TEST_CASE("gradient Lp norm of a shear flow") {
  const Grid g(32);
  const VectorField u(RealField::from_function(g, [](double, double x2) { return std::sin(2 * pi * x2); }),
                      RealField(g));
  CHECK(gradient_lp_norm(u, 2.0) == doctest::Approx(pi * std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("invalid grids are rejected") {
  CHECK_THROWS(Grid(0));
  CHECK_THROWS(Grid(7));
}
