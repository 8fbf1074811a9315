#include "vkns/inequality_lab.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "vkns/fluid_state.hpp"
#include "vkns/parallel.hpp"

namespace vkns::lab {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stream(std::uint64_t seed, std::uint64_t k) { return splitmix(seed * 8 + k); }

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string label(const std::string& key, double v) {
  std::ostringstream os;
  os << key << '=' << v;
  return os.str();
}

double l2_squared(const RealField& f) {
  const double v = lp_norm(f, 2.0);
  return v * v;
}

}  // namespace

RealField random_scalar(const Grid& g, std::uint64_t seed, int band) {
  return random_band_limited(g, stream(seed, 0), band);
}

VectorField random_vector(const Grid& g, std::uint64_t seed, int band) {
  return VectorField(random_band_limited(g, stream(seed, 1), band),
                     random_band_limited(g, stream(seed, 2), band));
}

RealField random_positive(const Grid& g, std::uint64_t seed, int band) {
  RealField rho = map(random_band_limited(g, stream(seed, 3), band),
                      [](double v) { return std::exp(v); });
  rho *= 1.0 / integral(rho);
  return rho;
}

double h1_norm(const RealField& f) {
  return std::sqrt(l2_squared(f) + std::pow(lp_norm(gradient(f), 2.0), 2.0));
}

double gns_ratio(const RealField& f, double q) {
  if (!(q > 2.0)) throw std::invalid_argument("gns_ratio needs q > 2");
  const double l2 = lp_norm(f, 2.0);
  if (l2 == 0.0) throw std::invalid_argument("gns_ratio of the zero field");
  return lp_norm(f, q) /
         (std::sqrt(q) * std::pow(l2, 2.0 / q) * std::pow(h1_norm(f), 1.0 - 2.0 / q));
}

double divcurl_residual(const VectorField& f) {
  const double grad = std::pow(gradient_lp_norm(f, 2.0), 2.0);
  if (grad == 0.0) throw std::invalid_argument("divcurl_residual with zero gradient");
  return std::abs(grad - l2_squared(divergence(f)) - l2_squared(rot(f))) / grad;
}

double divcurl_ratio(const VectorField& f, double q) {
  const double grad = gradient_lp_norm(f, q);
  if (grad == 0.0) throw std::invalid_argument("divcurl_ratio with zero gradient");
  return grad / (lp_norm(divergence(f), q) + lp_norm(rot(f), q));
}

double brezis_wainger_ratio(const RealField& f, double q) {
  if (!(q > 2.0)) throw std::invalid_argument("brezis_wainger_ratio needs q > 2");
  const VectorField g = gradient(f);
  const double denom = lp_norm(g, 2.0) * std::sqrt(std::log(std::numbers::e + lp_norm(g, q))) +
                       lp_norm(f, 2.0) + 1.0;
  return max_abs(f) / denom;
}

double trudinger_integral(const RealField& f, double c1) {
  if (!(c1 > 0.0)) throw std::invalid_argument("trudinger_integral needs c1 > 0");
  const double fbar = mean(f);
  const double grad = std::pow(lp_norm(gradient(f), 2.0), 2.0);
  if (grad == 0.0) throw std::invalid_argument("trudinger_integral of a constant field");
  return mean(map(f, [&](double v) { return std::exp((v - fbar) * (v - fbar) / (c1 * grad)); }));
}

RealField riesz_commutator(const VectorField& g, const VectorField& f) {
  RealField C(g.grid());
  for (int i = 0; i < 2; ++i) {
    const SpectralField Fi = to_spectral(f[i]);
    for (int j = 0; j < 2; ++j) {
      const RealField a = to_real(riesz_composition(i + 1, j + 1, Fi));
      const RealField b = to_real(riesz_composition(i + 1, j + 1, to_spectral(g[j] * f[i])));
      for (std::size_t k = 0; k < C.size(); ++k) C[k] += g[j][k] * a[k] - b[k];
    }
  }
  return C;
}

std::pair<double, double> commutator_ratio(const VectorField& g, const VectorField& f, double q,
                                           const HolderTriple& r) {
  if (!(q > 1.0)) throw std::invalid_argument("commutator_ratio needs 1 < q");
  const double g2 = gradient_lp_norm(g, 2.0);
  const double fq = lp_norm(f, q);
  if (g2 == 0.0 || fq == 0.0) return {0.0, 0.0};
  const RealField C = riesz_commutator(g, f);
  const double first = lp_norm(C, q) / (g2 * fq);
  const double second =
      lp_norm(gradient(C), r.r3) / (gradient_lp_norm(g, r.r1) * lp_norm(f, r.r2));
  return {first, second};
}

double desjardins_ratio(const RealField& rho, const VectorField& u, double q, double gamma) {
  if (!(q > 1.0)) throw std::invalid_argument("desjardins_ratio needs q > 1");
  require_positive(rho);
  double a2 = 0.0, lhs = 0.0;
  for (std::size_t k = 0; k < rho.size(); ++k) {
    const double s2 = u.x[k] * u.x[k] + u.y[k] * u.y[k];
    a2 += rho[k] * s2;
    lhs += rho[k] * std::pow(s2, q);
  }
  const double cells = static_cast<double>(rho.size());
  a2 /= cells;
  lhs = std::sqrt(lhs / cells);
  if (a2 == 0.0) throw std::invalid_argument("desjardins_ratio of the zero velocity");
  const double a = std::sqrt(a2);
  const double gu = gradient_lp_norm(u, 2.0);
  const double um = std::hypot(integral(u.x), integral(u.y));
  const double logt = std::log(2.0 + gu * gu * lp_norm(rho, gamma) / a2);
  const double denom =
      a * std::pow(gu, q - 1.0) * std::pow(logt, (q - 1.0) / 2.0) + a * std::pow(um, q - 1.0);
  return lhs / denom;
}

// ---------------------------------------------------------------------------
// Sweeps

namespace detail {

RatioReport reduce(const std::string& name, const std::string& parameters,
                   std::uint64_t first, const std::vector<double>& values) {
  RatioReport r;
  r.inequality = name;
  r.parameters = parameters;
  r.samples = static_cast<int>(values.size());
  r.sup = -std::numeric_limits<double>::infinity();
  double total = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    total += values[k];
    if (std::isnan(r.sup)) continue;
    // NaN wins the sup so that it surfaces as non-finite.
    if (std::isnan(values[k]) || values[k] > r.sup) {
      r.sup = values[k];
      r.argmax_seed = first + k;
    }
  }
  r.mean = values.empty() ? 0.0 : total / static_cast<double>(values.size());
  return r;
}

}  // namespace detail

void LabConfig::validate() const {
  if (n < 8 || n % 2 != 0) throw std::invalid_argument("lab grid size must be even and >= 8");
  if (band < 1 || band > n / 3) throw std::invalid_argument("lab band must lie in [1, n/3]");
  if (samples < 1 || commutator_samples < 1) throw std::invalid_argument("sample count must be >= 1");
  for (double q : gns_q)
    if (!(q > 2.0)) throw std::invalid_argument("GNS exponents must exceed 2");
  for (int b : gns_bands)
    if (b < 1 || b > n / 3) throw std::invalid_argument("GNS bands must lie in [1, n/3]");
  for (double q : desjardins_q)
    if (!(q > 1.0)) throw std::invalid_argument("Desjardins exponents must exceed 1");
}

bool LabResult::passed() const {
  for (const auto& s : sweeps)
    if (!s.passed()) return false;
  for (const auto& c : checks)
    if (!c.report_only && !c.passed) return false;
  return true;
}

namespace {

template <typename Fn>
SweepCheck sweep_check(const std::string& name, const std::string& parameters,
                       const LabConfig& cfg, int count, double tolerance, Fn&& ratio) {
  std::vector<double> values(static_cast<std::size_t>(2 * count));
  parallel_for(2 * count, cfg.jobs, [&](int k) {
    values[static_cast<std::size_t>(k)] = ratio(cfg.seed + static_cast<std::uint64_t>(k));
  });
  SweepCheck s;
  s.base = detail::reduce(name, parameters, cfg.seed,
                          std::vector<double>(values.begin(), values.begin() + count));
  s.doubled = detail::reduce(name, parameters, cfg.seed, values);
  s.tolerance = tolerance;
  s.finite = std::isfinite(s.doubled.sup) && std::isfinite(s.doubled.mean);
  s.drift = s.base.sup > 0.0 ? s.doubled.sup / s.base.sup - 1.0 : 0.0;
  s.stable = s.finite && std::abs(s.drift) < tolerance;
  return s;
}

NamedCheck exact(const std::string& name, double value, double expected, double tol) {
  return {name, value, expected, std::abs(value - expected) <= tol, false};
}

}  // namespace

LabResult run_lab(const LabConfig& cfg) {
  cfg.validate();
  const Grid g(cfg.n);
  const int band = cfg.band;
  LabResult out;

  // Equality and identity cases.
  const RealField c(g, 3.0);
  for (double q : cfg.gns_q)
    out.checks.push_back(exact("gns_constant_" + label("q", q), gns_ratio(c, q), 1.0 / std::sqrt(q), 1e-12));
  out.checks.push_back(exact("brezis_wainger_constant", brezis_wainger_ratio(RealField(g, 5.0), 4.0),
                             5.0 / 6.0, 1e-12));
  const VectorField cu(RealField(g, 0.7), RealField(g, -0.4));
  for (double q : cfg.desjardins_q)
    out.checks.push_back(exact("desjardins_constant_" + label("q", q),
                               desjardins_ratio(RealField(g, 1.3), cu, q, cfg.desjardins_gamma), 1.0,
                               1e-12));
  const RealField phi = RealField::from_function(
      g, [](double x, double) { return std::sin(2.0 * std::numbers::pi * x); });
  out.checks.push_back(exact("divcurl_gradient_field", divcurl_residual(gradient(phi)), 0.0, 1e-12));
  out.checks.push_back(exact("divcurl_perp_gradient_field", divcurl_residual(perp_gradient(phi)), 0.0,
                             1e-12));
  {
    std::vector<double> res(static_cast<std::size_t>(cfg.samples));
    parallel_for(cfg.samples, cfg.jobs, [&](int k) {
      res[static_cast<std::size_t>(k)] =
          divcurl_residual(random_vector(g, cfg.seed + static_cast<std::uint64_t>(k), band));
    });
    out.checks.push_back(
        exact("divcurl_random_residual_max", *std::max_element(res.begin(), res.end()), 0.0, 1e-12));
  }

  // GNS across q.
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (double q : cfg.gns_q) {
    SweepCheck s = sweep_check("gns", label("q", q), cfg, cfg.samples, cfg.stability_tolerance,
                               [&](std::uint64_t seed) { return gns_ratio(random_scalar(g, seed, band), q); });
    lo = std::min(lo, s.doubled.sup);
    hi = std::max(hi, s.doubled.sup);
    out.sweeps.push_back(s);
  }
  if (!cfg.gns_q.empty()) {
    out.gns_spread = hi / lo;
    out.checks.push_back({"gns_sup_spread_over_q", out.gns_spread, cfg.gns_spread_limit,
                          out.gns_spread < cfg.gns_spread_limit, false});
  }

  out.sweeps.push_back(sweep_check(
      "divcurl", label("q", cfg.divcurl_q), cfg, cfg.samples, cfg.stability_tolerance,
      [&](std::uint64_t seed) { return divcurl_ratio(random_vector(g, seed, band), cfg.divcurl_q); }));

  out.sweeps.push_back(sweep_check(
      "brezis_wainger", label("q", cfg.brezis_wainger_q), cfg, cfg.samples, cfg.stability_tolerance,
      [&](std::uint64_t seed) {
        return brezis_wainger_ratio(random_scalar(g, seed, band), cfg.brezis_wainger_q);
      }));

  // Trudinger: smallest c1 on the grid whose sup is finite and stable.
  std::vector<double> c1_grid = cfg.trudinger_c1;
  if (c1_grid.empty()) {
    const double pi = std::numbers::pi;
    c1_grid = {1.0 / (4.0 * pi), 1.0 / (2.0 * pi), 1.0 / pi, 2.0 / pi};
  }
  std::sort(c1_grid.begin(), c1_grid.end());
  for (double c1 : c1_grid) {
    SweepCheck s = sweep_check("trudinger", label("c1", c1), cfg, cfg.samples, cfg.trudinger_tolerance,
                               [&](std::uint64_t seed) {
                                 return trudinger_integral(random_scalar(g, seed, band), c1);
                               });
    if (s.passed()) {
      out.trudinger_c1 = c1;
      out.trudinger_c2 = s.doubled.sup;
      out.sweeps.push_back(s);
      break;
    }
    out.checks.push_back({"trudinger_rejected_" + label("c1", c1), s.drift, cfg.trudinger_tolerance,
                          false, true});
  }
  if (out.trudinger_c1 == 0.0) out.checks.push_back({"trudinger_calibration", 0.0, 0.0, false, false});

  {
    const std::string params = label("q", cfg.commutator_q) + " " + label("r1", cfg.commutator_r.r1) +
                               " " + label("r2", cfg.commutator_r.r2) + " " +
                               label("r3", cfg.commutator_r.r3);
    auto pair = [&](std::uint64_t seed) {
      return commutator_ratio(random_vector(g, seed, band), random_vector(g, splitmix(seed), band),
                              cfg.commutator_q, cfg.commutator_r);
    };
    out.sweeps.push_back(sweep_check("commutator_lq", params, cfg, cfg.commutator_samples,
                                     cfg.stability_tolerance,
                                     [&](std::uint64_t seed) { return pair(seed).first; }));
    out.sweeps.push_back(sweep_check("commutator_gradient", params, cfg, cfg.commutator_samples,
                                     cfg.stability_tolerance,
                                     [&](std::uint64_t seed) { return pair(seed).second; }));
  }

  for (double q : cfg.desjardins_q) {
    out.sweeps.push_back(sweep_check(
        "desjardins", label("q", q) + " " + label("gamma", cfg.desjardins_gamma), cfg, cfg.samples,
        cfg.stability_tolerance, [&](std::uint64_t seed) {
          return desjardins_ratio(random_positive(g, seed, band), random_vector(g, seed, band), q,
                                  cfg.desjardins_gamma);
        }));
  }

  // GNS sup against the band limit (report only).
  for (int b : cfg.gns_bands) {
    const RatioReport r = sweep("gns", label("q", cfg.gns_band_q) + " " + label("band", b), cfg.seed,
                                cfg.samples, cfg.jobs, [&](std::uint64_t seed) {
                                  return gns_ratio(random_scalar(g, seed, b), cfg.gns_band_q);
                                });
    out.gns_band_sups.push_back(r.sup);
    out.checks.push_back({"gns_sup_" + label("band", b), r.sup, 0.0, std::isfinite(r.sup), true});
  }
  return out;
}

std::vector<std::string> report_header() {
  return {"inequality", "parameters", "samples", "sup", "mean", "argmax_seed"};
}

std::vector<std::string> report_row(const RatioReport& r) {
  return {r.inequality, r.parameters, std::to_string(r.samples), fmt(r.sup), fmt(r.mean),
          std::to_string(r.argmax_seed)};
}

}  // namespace vkns::lab
