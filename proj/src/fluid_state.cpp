#include "vkns/fluid_state.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace vkns {

Params::Params(double mu, double beta, double gamma) : mu_(mu), beta_(beta), gamma_(gamma) {
  if (!(mu > 0.0)) throw std::invalid_argument("mu must be > 0");
  if (!(beta > 1.0)) throw std::invalid_argument("beta must be > 1");
  if (!(gamma > 1.0)) throw std::invalid_argument("gamma must be > 1");
}

namespace {
std::string breach_message(int i, int j, double value) {
  std::ostringstream os;
  os << "vacuum breach: rho = " << value << " at grid point (" << i << ", " << j << ")";
  return os.str();
}
}  // namespace

VacuumBreach::VacuumBreach(int i, int j, double value)
    : std::runtime_error(breach_message(i, j, value)), i_(i), j_(j), value_(value) {}

FluidState::FluidState(double time, RealField density, VectorField momentum)
    : t(time), rho(std::move(density)), m(std::move(momentum)) {
  if (!(rho.grid() == m.grid())) {
    throw std::invalid_argument("density and momentum live on different grids");
  }
}

VectorField FluidState::velocity() const {
  require_positive(rho);
  VectorField u(grid());
  for (std::size_t k = 0; k < rho.size(); ++k) {
    u.x[k] = m.x[k] / rho[k];
    u.y[k] = m.y[k] / rho[k];
  }
  return u;
}

FluidState from_primitive(double t, RealField rho, const VectorField& u) {
  require_positive(rho);
  VectorField m(rho * u.x, rho * u.y);
  return FluidState(t, std::move(rho), std::move(m));
}

void require_positive(const RealField& rho) {
  const int n = rho.grid().n();
  for (std::size_t k = 0; k < rho.size(); ++k) {
    // !(x > 0) also catches NaN.
    if (!(rho[k] > 0.0)) {
      throw VacuumBreach(static_cast<int>(k / n), static_cast<int>(k % n), rho[k]);
    }
  }
}

RealField power(const RealField& rho, double exponent) {
  const double rounded = std::round(exponent);
  if (rounded == exponent && rounded >= 1.0 && rounded <= 4.0) {
    const int e = static_cast<int>(rounded);
    return map(rho, [e](double r) {
      double v = r;
      for (int k = 1; k < e; ++k) v *= r;
      return v;
    });
  }
  return map(rho, [exponent](double r) { return std::pow(r, exponent); });
}

RealField pressure(const RealField& rho, const Params& p) {
  require_positive(rho);
  return power(rho, p.gamma());
}

RealField bulk_viscosity(const RealField& rho, const Params& p) {
  require_positive(rho);
  return power(rho, p.beta());
}

double mass(const FluidState& s) { return integral(s.rho); }

std::array<double, 2> momentum(const FluidState& s) {
  return {integral(s.m.x), integral(s.m.y)};
}

double energy(const FluidState& s, const Params& p) {
  require_positive(s.rho);
  const RealField P = power(s.rho, p.gamma());
  double acc = 0.0;
  for (std::size_t k = 0; k < s.rho.size(); ++k) {
    const double m2 = s.m.x[k] * s.m.x[k] + s.m.y[k] * s.m.y[k];
    acc += 0.5 * m2 / s.rho[k] + P[k] / (p.gamma() - 1.0);
  }
  return acc / static_cast<double>(s.rho.size());
}

std::string to_string(InitKind kind) {
  switch (kind) {
    case InitKind::constant_plus_mode: return "constant-plus-mode";
    case InitKind::random_band_limited: return "random-band-limited";
    case InitKind::mollified_target: return "mollified-target";
  }
  return "unknown";
}

InitKind init_kind_from_string(const std::string& name) {
  if (name == "constant-plus-mode") return InitKind::constant_plus_mode;
  if (name == "random-band-limited") return InitKind::random_band_limited;
  if (name == "mollified-target") return InitKind::mollified_target;
  throw std::invalid_argument("unknown init kind '" + name + "'");
}

RealField random_band_limited(const Grid& grid, std::uint64_t seed, int band, double slope) {
  if (band < 1) throw std::invalid_argument("band limit must be >= 1");
  const int n = grid.n();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  SpectralField F(grid);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < grid.half(); ++b) {
      const int m1 = grid.mode(a);
      const int m2 = grid.half_mode(b);
      // Draw every slot so the sequence does not depend on the band.
      const double re = normal(rng);
      const double im = normal(rng);
      if (std::max(std::abs(m1), std::abs(m2)) > band) continue;
      if (m1 == -n / 2 || m2 == -n / 2) continue;
      if (m1 == 0 && m2 == 0) continue;
      const double k2 = static_cast<double>(m1) * m1 + static_cast<double>(m2) * m2;
      const double amp = slope == 0.0 ? 1.0 : std::pow(1.0 + k2, -0.5 * slope);
      F(a, b) = {amp * re, amp * im};
    }
  }
  // Hermitian symmetry on the self-conjugate column b = 0.
  for (int a = 1; a < n / 2; ++a) F(n - a, 0) = std::conj(F(a, 0));
  RealField f = to_real(F);
  const double scale = max_abs(f);
  if (scale > 0.0) f *= 1.0 / scale;
  return f;
}

RealField mollify(const RealField& f, double h) {
  const Grid& g = f.grid();
  const int n = g.n();
  if (h <= g.dx()) return f;
  // Kernel sample for offset d sits at field index d mod n.
  RealField kernel(g);
  const int reach = static_cast<int>(std::ceil(h * n));
  double total = 0.0;
  for (int d1 = -reach; d1 <= reach; ++d1) {
    for (int d2 = -reach; d2 <= reach; ++d2) {
      const double r2 = (static_cast<double>(d1) * d1 + static_cast<double>(d2) * d2) /
                        (static_cast<double>(n) * n);
      const double s = r2 / (h * h);
      if (s >= 1.0) continue;
      const double w = std::exp(-1.0 / (1.0 - s));
      kernel(((d1 % n) + n) % n, ((d2 % n) + n) % n) += w;
      total += w;
    }
  }
  kernel *= 1.0 / total;
  const SpectralField K = to_spectral(kernel);
  SpectralField F = to_spectral(f);
  const double scale = static_cast<double>(g.size());
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < g.half(); ++b) {
      // Undo the half-cell phase shift of the kernel's coefficients.
      const double sign = ((g.mode(a) + g.half_mode(b)) & 1) ? -1.0 : 1.0;
      F(a, b) *= scale * sign * K(a, b);
    }
  }
  return to_real(F);
}

RealField project_band(const RealField& f) { return to_real(dealias(to_spectral(f))); }

namespace {

// Keeps rho inside [lo, hi] by shrinking its deviation from the unit mean.
void enforce_bounds(RealField& rho, double lo, double hi) {
  const double mn = min_value(rho);
  const double mx = max_value(rho);
  if (mn >= lo && mx <= hi) return;
  double s = 1.0;
  if (mn < lo) s = std::min(s, (1.0 - lo) / (1.0 - mn));
  if (mx > hi) s = std::min(s, (hi - 1.0) / (mx - 1.0));
  for (auto& v : rho.values()) v = 1.0 + s * (v - 1.0);
}

}  // namespace

FluidState make_initial_state(const Grid& grid, const InitConfig& cfg) {
  if (!(cfg.bound_min > 0.0) || !(cfg.bound_min < 1.0) || !(cfg.bound_max > 1.0)) {
    throw std::invalid_argument("density bounds must satisfy 0 < m < 1 < M");
  }
  if (cfg.density_mean <= 0.0) throw std::invalid_argument("density mean must be > 0");
  const double two_pi = SpectralField::two_pi;
  RealField shape(grid);
  VectorField ushape(grid);

  switch (cfg.kind) {
    case InitKind::constant_plus_mode: {
      const double k = two_pi * cfg.mode;
      shape = RealField::from_function(grid, [k](double x1, double) { return std::sin(k * x1); });
      ushape.x = RealField::from_function(grid, [k](double, double x2) { return std::sin(k * x2); });
      ushape.y = RealField::from_function(grid, [k](double x1, double) { return std::sin(k * x1); });
      break;
    }
    case InitKind::random_band_limited: {
      shape = random_band_limited(grid, cfg.seed, cfg.band);
      ushape.x = random_band_limited(grid, cfg.seed + 1000003, cfg.band);
      ushape.y = random_band_limited(grid, cfg.seed + 2000006, cfg.band);
      break;
    }
    case InitKind::mollified_target: {
      const int full = grid.n() / 2 - 1;
      shape = mollify(random_band_limited(grid, cfg.seed, full, cfg.roughness_slope),
                      cfg.mollify_width);
      ushape.x = mollify(random_band_limited(grid, cfg.seed + 1000003, full, cfg.roughness_slope),
                         cfg.mollify_width);
      ushape.y = mollify(random_band_limited(grid, cfg.seed + 2000006, full, cfg.roughness_slope),
                         cfg.mollify_width);
      break;
    }
  }

  RealField rho = map(shape, [&](double s) {
    return cfg.density_mean * (1.0 + cfg.density_amplitude * s);
  });
  rho = project_band(rho);
  rho *= 1.0 / mean(rho);
  enforce_bounds(rho, cfg.bound_min, cfg.bound_max);
  require_positive(rho);

  VectorField u(cfg.velocity_amplitude * ushape.x, cfg.velocity_amplitude * ushape.y);
  VectorField m(grid);
  for (int axis = 0; axis < 2; ++axis) {
    SpectralField M = dealias(to_spectral(rho * u[axis]));
    M(0, 0) = 0.0;
    m[axis] = to_real(M);
  }
  return FluidState(0.0, std::move(rho), std::move(m));
}

}  // namespace vkns
