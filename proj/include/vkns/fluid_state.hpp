// Barotropic state (rho, m = rho u) with P = rho^gamma and lambda = rho^beta.
#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "vkns/spectral.hpp"

namespace vkns {

class Params {
 public:
  // Throws std::invalid_argument unless mu > 0, beta > 1, gamma > 1.
  Params(double mu, double beta, double gamma);

  double mu() const { return mu_; }
  double beta() const { return beta_; }
  double gamma() const { return gamma_; }

  // beta > 3/2 and gamma < 4 beta - 3.
  bool huang_li_regime() const { return beta_ > 1.5 && gamma_ < 4.0 * beta_ - 3.0; }

  friend bool operator==(const Params&, const Params&) = default;

 private:
  double mu_;
  double beta_;
  double gamma_;
};

// Raised when the density is not strictly positive somewhere.
class VacuumBreach : public std::runtime_error {
 public:
  VacuumBreach(int i, int j, double value);

  int i() const { return i_; }
  int j() const { return j_; }
  double value() const { return value_; }

 private:
  int i_;
  int j_;
  double value_;
};

struct FluidState {
  double t = 0.0;
  RealField rho;
  VectorField m;

  FluidState(double time, RealField density, VectorField momentum);

  const Grid& grid() const { return rho.grid(); }
  // u = m / rho pointwise.
  VectorField velocity() const;
};

// Builds a state from primitive variables, m = rho u (no projection).
FluidState from_primitive(double t, RealField rho, const VectorField& u);

void require_positive(const RealField& rho);

RealField pressure(const RealField& rho, const Params& p);
RealField bulk_viscosity(const RealField& rho, const Params& p);
// rho^e, with exact products for small integer exponents.
RealField power(const RealField& rho, double exponent);

double mass(const FluidState& s);
std::array<double, 2> momentum(const FluidState& s);
// int (rho |u|^2 / 2 + rho^gamma / (gamma - 1))
double energy(const FluidState& s, const Params& p);

enum class InitKind { constant_plus_mode, random_band_limited, mollified_target };

std::string to_string(InitKind kind);
InitKind init_kind_from_string(const std::string& name);

struct InitConfig {
  InitKind kind = InitKind::random_band_limited;
  std::uint64_t seed = 1;
  double density_mean = 1.0;
  double density_amplitude = 0.3;
  double velocity_amplitude = 0.3;
  int band = 4;
  int mode = 1;  // constant_plus_mode wavenumber
  // mollified_target: mollifier radius and spectral slope of the rough target
  // (coefficients decay like |m|^-slope over the full band).
  double mollify_width = 0.0;
  double roughness_slope = 2.0;
  double bound_min = 1e-3;
  double bound_max = 1e3;
};

// Generates (rho0, m0) on the grid: fields are projected onto the 2/3 band,
// rho0 is scaled to unit mass and kept inside [bound_min, bound_max], and
// the momentum has exactly zero mean.
FluidState make_initial_state(const Grid& grid, const InitConfig& cfg);

// Zero-mean band-limited random field: coefficients with max(|m1|,|m2|) <= band
// drawn as (1 + |m|^2)^(-slope/2) (N(0,1) + i N(0,1)), scaled so max |f| = 1.
RealField random_band_limited(const Grid& grid, std::uint64_t seed, int band,
                              double slope = 0.0);

// Periodic convolution with the normalized C-infinity bump of radius h
// sampled on the grid. h <= dx leaves the field unchanged.
RealField mollify(const RealField& f, double h);

// Projection onto the 2/3 band.
RealField project_band(const RealField& f);

}  // namespace vkns
