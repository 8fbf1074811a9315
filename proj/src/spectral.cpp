#include "vkns/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>

namespace vkns {

Grid::Grid(int n) : n_(n) {
  if (n < 8 || n % 2 != 0) {
    throw std::invalid_argument("grid size must be even and >= 8, got " +
                                std::to_string(n));
  }
}

// ---------------------------------------------------------------------------
// RealField / VectorField / SpectralField

RealField::RealField(Grid grid, double fill) : grid_(grid), values_(grid.size(), fill) {}

RealField::RealField(Grid grid, std::vector<double> values)
    : grid_(grid), values_(values.begin(), values.end()) {
  if (values_.size() != grid_.size()) {
    throw std::invalid_argument("field size does not match grid");
  }
}

namespace {
void require_same_grid(const Grid& a, const Grid& b) {
  if (!(a == b)) throw std::invalid_argument("fields live on different grids");
}
}  // namespace

RealField& RealField::operator+=(const RealField& o) {
  require_same_grid(grid_, o.grid_);
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
  return *this;
}
RealField& RealField::operator-=(const RealField& o) {
  require_same_grid(grid_, o.grid_);
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= o.values_[k];
  return *this;
}
RealField& RealField::operator*=(const RealField& o) {
  require_same_grid(grid_, o.grid_);
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] *= o.values_[k];
  return *this;
}
RealField& RealField::operator*=(double s) {
  for (auto& v : values_) v *= s;
  return *this;
}
RealField& RealField::operator+=(double s) {
  for (auto& v : values_) v += s;
  return *this;
}

bool RealField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

RealField operator+(RealField a, const RealField& b) { return a += b; }
RealField operator-(RealField a, const RealField& b) { return a -= b; }
RealField operator*(RealField a, const RealField& b) { return a *= b; }
RealField operator*(double s, RealField a) { return a *= s; }
RealField operator*(RealField a, double s) { return a *= s; }

VectorField::VectorField(RealField a, RealField b) : x(std::move(a)), y(std::move(b)) {
  require_same_grid(x.grid(), y.grid());
}

SpectralField::SpectralField(Grid grid)
    : grid_(grid), coeffs_(grid.spectral_size(), value_type{0.0, 0.0}) {}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
  require_same_grid(grid_, o.grid_);
  for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] += o.coeffs_[k];
  return *this;
}
SpectralField& SpectralField::operator-=(const SpectralField& o) {
  require_same_grid(grid_, o.grid_);
  for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] -= o.coeffs_[k];
  return *this;
}
SpectralField& SpectralField::operator*=(double s) {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

// ---------------------------------------------------------------------------
// FFTW plumbing. A 2D transform is done as a batch of 1D real transforms
// along x2 followed by a batch of in-place complex transforms along x1.
// Plans are created once per grid size under a lock (the planner is not
// thread-safe) with FFTW_ESTIMATE, so the algorithm and hence every rounding
// is identical from run to run. Execution uses the new-array interface on
// 64-byte aligned buffers and is safe from any thread.

namespace {

struct Plans {
  fftw_plan rows_forward = nullptr;
  fftw_plan cols_forward = nullptr;
  fftw_plan cols_backward = nullptr;
  fftw_plan rows_backward = nullptr;
  // Column passes restricted to the columns b <= n/3.
  fftw_plan band_forward = nullptr;
  fftw_plan band_backward = nullptr;
};

const Plans& plans_for(int n) {
  static std::mutex mutex;
  static std::map<int, Plans> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  const int h = n / 2 + 1;
  double* r = fftw_alloc_real(static_cast<std::size_t>(n) * n);
  fftw_complex* c = fftw_alloc_complex(static_cast<std::size_t>(n) * h);
  Plans p;
  p.rows_forward = fftw_plan_many_dft_r2c(1, &n, n, r, nullptr, 1, n, c, nullptr, 1, h,
                                          FFTW_ESTIMATE);
  p.cols_forward = fftw_plan_many_dft(1, &n, h, c, nullptr, h, 1, c, nullptr, h, 1,
                                      FFTW_FORWARD, FFTW_ESTIMATE);
  p.cols_backward = fftw_plan_many_dft(1, &n, h, c, nullptr, h, 1, c, nullptr, h, 1,
                                       FFTW_BACKWARD, FFTW_ESTIMATE);
  p.rows_backward = fftw_plan_many_dft_c2r(1, &n, n, c, nullptr, 1, h, r, nullptr, 1, n,
                                           FFTW_ESTIMATE);
  const int cols = n / 3 + 1;
  p.band_forward = fftw_plan_many_dft(1, &n, cols, c, nullptr, h, 1, c, nullptr, h, 1,
                                      FFTW_FORWARD, FFTW_ESTIMATE);
  p.band_backward = fftw_plan_many_dft(1, &n, cols, c, nullptr, h, 1, c, nullptr, h, 1,
                                       FFTW_BACKWARD, FFTW_ESTIMATE);
  fftw_free(r);
  fftw_free(c);
  return cache.emplace(n, p).first->second;
}

// Per-thread scratch for the destructive complex-to-real pass.
SpectralField& backward_scratch(const Grid& g) {
  thread_local std::map<int, std::unique_ptr<SpectralField>> spaces;
  auto& slot = spaces[g.n()];
  if (!slot) slot = std::make_unique<SpectralField>(g);
  return *slot;
}

fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }

// exp(-i k . x0) with x0 = (-1/2, -1/2) reduces to (-1)^(m1 + m2).
inline double shift_sign(int m1, int m2) { return ((m1 + m2) & 1) ? -1.0 : 1.0; }

}  // namespace

namespace detail {

void forward_raw(const RealField& f, SpectralField& out) {
  const Plans& p = plans_for(f.grid().n());
  // r2c along rows preserves its input.
  double* in = const_cast<double*>(f.values().data());
  fftw_complex* c = as_fftw(out.coeffs().data());
  fftw_execute_dft_r2c(p.rows_forward, in, c);
  fftw_execute_dft(p.cols_forward, c, c);
  const double scale = 1.0 / static_cast<double>(f.grid().size());
  for (auto& v : out.coeffs()) v *= scale;
}

void backward_raw(const SpectralField& F, RealField& out) {
  SpectralField& scratch = backward_scratch(F.grid());
  std::copy(F.coeffs().begin(), F.coeffs().end(), scratch.coeffs().begin());
  backward_raw_destroy(scratch, out);
}

void backward_raw_destroy(SpectralField& F, RealField& out) {
  const Plans& p = plans_for(F.grid().n());
  fftw_complex* c = as_fftw(F.coeffs().data());
  fftw_execute_dft(p.cols_backward, c, c);
  fftw_execute_dft_c2r(p.rows_backward, c, out.values().data());
}

void forward_raw_band(const RealField& f, SpectralField& out) {
  const Grid& g = f.grid();
  const Plans& p = plans_for(g.n());
  double* in = const_cast<double*>(f.values().data());
  fftw_complex* c = as_fftw(out.coeffs().data());
  fftw_execute_dft_r2c(p.rows_forward, in, c);
  fftw_execute_dft(p.band_forward, c, c);
  const double scale = 1.0 / static_cast<double>(g.size());
  const int cols = g.n() / 3 + 1;
  for (int a = 0; a < g.n(); ++a) {
    std::complex<double>* row = &out(a, 0);
    for (int b = 0; b < cols; ++b) row[b] *= scale;
    for (int b = cols; b < g.half(); ++b) row[b] = 0.0;
  }
}

void backward_raw_band(const SpectralField& F, RealField& out) {
  const Plans& p = plans_for(F.grid().n());
  SpectralField& scratch = backward_scratch(F.grid());
  std::copy(F.coeffs().begin(), F.coeffs().end(), scratch.coeffs().begin());
  fftw_complex* c = as_fftw(scratch.coeffs().data());
  fftw_execute_dft(p.band_backward, c, c);
  fftw_execute_dft_c2r(p.rows_backward, c, out.values().data());
}

}  // namespace detail

SpectralField to_spectral(const RealField& f) {
  const Grid& g = f.grid();
  const int n = g.n();
  auto values = f.values();
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!std::isfinite(values[k])) {
      std::ostringstream os;
      os << "non-finite value " << values[k] << " at grid point (" << k / n << ", "
         << k % n << ")";
      throw NonFiniteError(os.str());
    }
  }
  SpectralField F(g);
  detail::forward_raw(f, F);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < g.half(); ++b)
      if (shift_sign(g.mode(a), g.half_mode(b)) < 0.0) F(a, b) = -F(a, b);
  return F;
}

RealField to_real(const SpectralField& F) {
  const Grid& g = F.grid();
  SpectralField shifted = F;
  for (int a = 0; a < g.n(); ++a)
    for (int b = 0; b < g.half(); ++b)
      if (shift_sign(g.mode(a), g.half_mode(b)) < 0.0) shifted(a, b) = -shifted(a, b);
  RealField out(g);
  detail::backward_raw(shifted, out);
  return out;
}

// ---------------------------------------------------------------------------
// Fourier multipliers

bool in_dealiased_band(const Grid& g, int a, int b) {
  const int cut = g.n() / 3;
  return std::abs(g.mode(a)) <= cut && std::abs(g.half_mode(b)) <= cut;
}

void dealias_in_place(SpectralField& F) {
  const Grid& g = F.grid();
  for (int a = 0; a < g.n(); ++a)
    for (int b = 0; b < g.half(); ++b)
      if (!in_dealiased_band(g, a, b)) F(a, b) = 0.0;
}

SpectralField dealias(SpectralField F) {
  dealias_in_place(F);
  return F;
}

namespace {

template <typename Symbol>
SpectralField apply_symbol(const SpectralField& F, Symbol&& symbol) {
  const Grid& g = F.grid();
  SpectralField out(g);
  for (int a = 0; a < g.n(); ++a) {
    const double k1 = F.k1(a);
    for (int b = 0; b < g.half(); ++b) {
      out(a, b) = symbol(a, b, k1, F.k2(b)) * F(a, b);
    }
  }
  return out;
}

bool on_nyquist(const Grid& g, int a, int b, int axis) {
  return axis == 0 ? g.mode(a) == -g.n() / 2 : g.half_mode(b) == -g.n() / 2;
}

int checked_axis(int i) {
  if (i != 1 && i != 2) throw std::invalid_argument("Riesz index must be 1 or 2");
  return i - 1;
}

}  // namespace

SpectralField derivative(const SpectralField& F, Axis axis) {
  const Grid& g = F.grid();
  const int ax = static_cast<int>(axis);
  return apply_symbol(F, [&](int a, int b, double k1, double k2) {
    if (on_nyquist(g, a, b, ax)) return std::complex<double>(0.0, 0.0);
    return std::complex<double>(0.0, ax == 0 ? k1 : k2);
  });
}

SpectralField laplacian(const SpectralField& F) {
  return apply_symbol(F, [](int, int, double k1, double k2) {
    return std::complex<double>(-(k1 * k1 + k2 * k2), 0.0);
  });
}

SpectralField inv_laplacian_zero_mean(const SpectralField& F) {
  return apply_symbol(F, [](int a, int b, double k1, double k2) {
    if (a == 0 && b == 0) return std::complex<double>(0.0, 0.0);
    return std::complex<double>(-1.0 / (k1 * k1 + k2 * k2), 0.0);
  });
}

SpectralField riesz_composition(int i, int j, const SpectralField& F) {
  const int ai = checked_axis(i);
  const int aj = checked_axis(j);
  const Grid& g = F.grid();
  return apply_symbol(F, [&](int a, int b, double k1, double k2) {
    if (a == 0 && b == 0) return std::complex<double>(0.0, 0.0);
    // R_i R_j == riesz(i) o riesz(j) exactly: the Nyquist lines of the
    // involved axes are dropped, as for the first derivatives.
    if (on_nyquist(g, a, b, ai) || on_nyquist(g, a, b, aj)) {
      return std::complex<double>(0.0, 0.0);
    }
    const double k[2] = {k1, k2};
    return std::complex<double>(-k[ai] * k[aj] / (k1 * k1 + k2 * k2), 0.0);
  });
}

SpectralField riesz(int i, const SpectralField& F) {
  const int ai = checked_axis(i);
  const Grid& g = F.grid();
  return apply_symbol(F, [&](int a, int b, double k1, double k2) {
    if ((a == 0 && b == 0) || on_nyquist(g, a, b, ai)) {
      return std::complex<double>(0.0, 0.0);
    }
    const double k[2] = {k1, k2};
    return std::complex<double>(0.0, k[ai] / std::sqrt(k1 * k1 + k2 * k2));
  });
}

RealField derivative(const RealField& f, Axis axis) {
  return to_real(derivative(to_spectral(f), axis));
}

VectorField gradient(const RealField& f) {
  const SpectralField F = to_spectral(f);
  return {to_real(derivative(F, Axis::x1)), to_real(derivative(F, Axis::x2))};
}

VectorField perp_gradient(const RealField& f) {
  const SpectralField F = to_spectral(f);
  RealField second = to_real(derivative(F, Axis::x1));
  second *= -1.0;
  return {to_real(derivative(F, Axis::x2)), std::move(second)};
}

RealField divergence(const VectorField& u) {
  SpectralField d = derivative(to_spectral(u.x), Axis::x1);
  d += derivative(to_spectral(u.y), Axis::x2);
  return to_real(d);
}

RealField rot(const VectorField& u) {
  SpectralField d = derivative(to_spectral(u.x), Axis::x2);
  d -= derivative(to_spectral(u.y), Axis::x1);
  return to_real(d);
}

RealField laplacian(const RealField& f) { return to_real(laplacian(to_spectral(f))); }

RealField inv_laplacian_zero_mean(const RealField& f) {
  SpectralField F = to_spectral(f);
  const double m = std::abs(F(0, 0).real());
  const double scale = max_abs(f);
  if (m > 1e-10 * scale) {
    std::clog << "warning: inv_laplacian_zero_mean: removing mean " << F(0, 0).real()
              << " from input\n";
  }
  return to_real(inv_laplacian_zero_mean(F));
}

RealField riesz_composition(int i, int j, const RealField& f) {
  return to_real(riesz_composition(i, j, to_spectral(f)));
}

// ---------------------------------------------------------------------------
// Quadrature

double integral(const RealField& f) { return mean(f); }

double mean(const RealField& f) {
  double s = 0.0;
  for (double v : f.values()) s += v;
  return s / static_cast<double>(f.size());
}

double lp_norm(const RealField& f, double p) {
  if (std::isinf(p)) return max_abs(f);
  double s = 0.0;
  if (p == 2.0) {
    for (double v : f.values()) s += v * v;
    return std::sqrt(s / static_cast<double>(f.size()));
  }
  for (double v : f.values()) s += std::pow(std::abs(v), p);
  return std::pow(s / static_cast<double>(f.size()), 1.0 / p);
}

double max_abs(const RealField& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

double min_value(const RealField& f) {
  return *std::min_element(f.values().begin(), f.values().end());
}

double max_value(const RealField& f) {
  return *std::max_element(f.values().begin(), f.values().end());
}

double lp_norm(const VectorField& u, double p) {
  if (std::isinf(p)) return max_abs(u);
  double s = 0.0;
  for (std::size_t k = 0; k < u.x.size(); ++k) {
    const double m2 = u.x[k] * u.x[k] + u.y[k] * u.y[k];
    s += p == 2.0 ? m2 : std::pow(m2, 0.5 * p);
  }
  s /= static_cast<double>(u.x.size());
  return p == 2.0 ? std::sqrt(s) : std::pow(s, 1.0 / p);
}

double max_abs(const VectorField& u) {
  double m = 0.0;
  for (std::size_t k = 0; k < u.x.size(); ++k) {
    m = std::max(m, std::hypot(u.x[k], u.y[k]));
  }
  return m;
}

double parseval_sum(const SpectralField& F) {
  const Grid& g = F.grid();
  double s = 0.0;
  for (int a = 0; a < g.n(); ++a)
    for (int b = 0; b < g.half(); ++b) s += F.weight(b) * std::norm(F(a, b));
  return s;
}

double gradient_lp_norm(const VectorField& u, double p) {
  const VectorField g1 = gradient(u.x);
  const VectorField g2 = gradient(u.y);
  const std::size_t N = u.x.size();
  double s = 0.0;
  double mx = 0.0;
  for (std::size_t k = 0; k < N; ++k) {
    const double m2 =
        g1.x[k] * g1.x[k] + g1.y[k] * g1.y[k] + g2.x[k] * g2.x[k] + g2.y[k] * g2.y[k];
    if (std::isinf(p)) {
      mx = std::max(mx, std::sqrt(m2));
    } else {
      s += p == 2.0 ? m2 : std::pow(m2, 0.5 * p);
    }
  }
  if (std::isinf(p)) return mx;
  s /= static_cast<double>(N);
  return p == 2.0 ? std::sqrt(s) : std::pow(s, 1.0 / p);
}

}  // namespace vkns
