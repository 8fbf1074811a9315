// Empirical ratios of functional inequalities (left side over the
// constant-free right side) on random band-limited fields.
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "vkns/parallel.hpp"
#include "vkns/spectral.hpp"

namespace vkns::lab {

// Zero-mean band-limited scalar field with max |f| = 1.
RealField random_scalar(const Grid& g, std::uint64_t seed, int band);
// Components drawn from independent streams derived from seed.
VectorField random_vector(const Grid& g, std::uint64_t seed, int band);
// exp of a band-limited field, scaled to unit mass.
RealField random_positive(const Grid& g, std::uint64_t seed, int band);

// H1 norm: sqrt(|f|_2^2 + |grad f|_2^2).
double h1_norm(const RealField& f);

// |f|_q / (sqrt(q) |f|_2^(2/q) |f|_H1^(1 - 2/q)); q > 2, f != 0.
double gns_ratio(const RealField& f, double q);

// | |grad f|_2^2 - |div f|_2^2 - |rot f|_2^2 | / |grad f|_2^2.
double divcurl_residual(const VectorField& f);
// |grad f|_q / (|div f|_q + |rot f|_q).
double divcurl_ratio(const VectorField& f, double q);

// |f|_inf / (|grad f|_2 sqrt(log(e + |grad f|_q)) + |f|_2 + 1).
double brezis_wainger_ratio(const RealField& f, double q);

// int exp(|f - fbar|^2 / (c1 |grad f|_2^2)); f non-constant.
double trudinger_integral(const RealField& f, double c1);

// Sum over i, j of [g_j, R_i R_j] f_i.
RealField riesz_commutator(const VectorField& g, const VectorField& f);
struct HolderTriple {
  double r1 = 4.0;
  double r2 = 4.0;
  double r3 = 2.0;
};
// (|C|_q / (|grad g|_2 |f|_q), |grad C|_r3 / (|grad g|_r1 |f|_r2)) for the
// commutator C above. A vanishing commutator with vanishing gradient of g
// or vanishing f reports 0.
std::pair<double, double> commutator_ratio(const VectorField& g, const VectorField& f, double q,
                                           const HolderTriple& r = {});

// |rho^(1/2q) u|_2q^q / ( |sqrt(rho) u|_2 |grad u|_2^(q-1)
//   log(2 + |grad u|_2^2 |rho|_gamma / |sqrt(rho) u|_2^2)^((q-1)/2)
//   + |sqrt(rho) u|_2 |int u|^(q-1) ); q > 1, rho > 0, u != 0.
double desjardins_ratio(const RealField& rho, const VectorField& u, double q, double gamma);

struct RatioReport {
  std::string inequality;
  std::string parameters;
  int samples = 0;
  double sup = 0.0;
  double mean = 0.0;
  std::uint64_t argmax_seed = 0;
};

struct LabConfig {
  int n = 64;
  int band = 8;
  int samples = 1000;
  std::uint64_t seed = 1;
  unsigned jobs = 1;
  std::vector<double> gns_q{4, 8, 16, 32, 64};
  double divcurl_q = 4.0;
  double brezis_wainger_q = 4.0;
  std::vector<double> trudinger_c1;  // empty: {1/(4 pi), 1/(2 pi), 1/pi, 2/pi}
  int commutator_samples = 500;
  double commutator_q = 2.0;
  HolderTriple commutator_r;
  std::vector<double> desjardins_q{2, 4, 8};
  double desjardins_gamma = 2.0;
  // Relative change of a sup allowed when the sample count doubles.
  double stability_tolerance = 0.10;
  double trudinger_tolerance = 0.05;
  // Largest allowed max/min of the GNS sups across q.
  double gns_spread_limit = 2.0;
  // Nested bands for the GNS band comparison (may be empty).
  std::vector<int> gns_bands{4, 8, 16};
  double gns_band_q = 8.0;

  void validate() const;
};

// A sweep evaluated at the configured sample count and at twice that.
struct SweepCheck {
  RatioReport base;
  RatioReport doubled;
  double drift = 0.0;  // doubled.sup / base.sup - 1
  double tolerance = 0.0;
  bool finite = false;
  bool stable = false;
  bool passed() const { return finite && stable; }
};

struct NamedCheck {
  std::string name;
  double value = 0.0;
  double expected = 0.0;
  bool passed = false;
  bool report_only = false;
};

struct LabResult {
  std::vector<SweepCheck> sweeps;
  std::vector<NamedCheck> checks;
  double trudinger_c1 = 0.0;  // smallest calibrated c1, 0 if none
  double trudinger_c2 = 0.0;
  double gns_spread = 0.0;
  // Sup of the GNS ratio per entry of gns_bands.
  std::vector<double> gns_band_sups;
  bool passed() const;
};

// Evaluates ratio(seed) for seeds [first, first + count) on `jobs` threads;
// the reduction is independent of the thread count.
template <typename Fn>
RatioReport sweep(const std::string& name, const std::string& parameters, std::uint64_t first,
                  int count, unsigned jobs, Fn&& ratio);

LabResult run_lab(const LabConfig& cfg);

// Rows for the RatioReport CSV.
std::vector<std::string> report_header();
std::vector<std::string> report_row(const RatioReport& r);

namespace detail {
RatioReport reduce(const std::string& name, const std::string& parameters,
                   std::uint64_t first, const std::vector<double>& values);
}  // namespace detail

template <typename Fn>
RatioReport sweep(const std::string& name, const std::string& parameters, std::uint64_t first,
                  int count, unsigned jobs, Fn&& ratio) {
  std::vector<double> values(static_cast<std::size_t>(count));
  parallel_for(count, jobs, [&](int k) {
    values[static_cast<std::size_t>(k)] = ratio(first + static_cast<std::uint64_t>(k));
  });
  return detail::reduce(name, parameters, first, values);
}

}  // namespace vkns::lab
