// Fourier machinery on the unit torus [-1/2, 1/2]^2.
//
// Real fields are stored row-major with the first index along x1 and the
// second along x2. Spectral fields hold the non-redundant half spectrum
// (FFTW r2c layout): index a in [0, n) for m1, index b in [0, n/2] for m2.
// Coefficients are normalized Fourier coefficients,
//
//     f^(k) = (1/n^2) sum_j f(x_j) exp(-i k . x_j),   x_j = -1/2 + j/n,
//
// so the (0,0) coefficient is the grid mean of f.
#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <new>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vkns {

// 64-byte aligned storage so FFTW's SIMD plans can run on field buffers
// directly.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t alignment{64};

  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t count) {
    return static_cast<T*>(::operator new(count * sizeof(T), alignment));
  }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, alignment); }

  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

template <typename T>
using AlignedVector = std::vector<T, AlignedAllocator<T>>;

class Grid {
 public:
  explicit Grid(int n);

  int n() const { return n_; }
  double dx() const { return 1.0 / n_; }
  double coord(int j) const { return -0.5 + static_cast<double>(j) / n_; }
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_; }
  int half() const { return n_ / 2 + 1; }
  std::size_t spectral_size() const {
    return static_cast<std::size_t>(n_) * static_cast<std::size_t>(half());
  }

  // Signed mode number m in [-n/2, n/2 - 1] for FFT index a in [0, n).
  int mode(int a) const { return a < n_ / 2 ? a : a - n_; }
  // Mode number of the half-spectrum column b in [0, n/2]; the Nyquist
  // column maps to -n/2.
  int half_mode(int b) const { return b < n_ / 2 ? b : -n_ / 2; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int n_;
};

class RealField {
 public:
  explicit RealField(Grid grid, double fill = 0.0);
  RealField(Grid grid, std::vector<double> values);

  template <typename Fn>
  static RealField from_function(Grid grid, Fn&& fn) {
    RealField f(grid);
    for (int i = 0; i < grid.n(); ++i)
      for (int j = 0; j < grid.n(); ++j)
        f(i, j) = fn(grid.coord(i), grid.coord(j));
    return f;
  }

  const Grid& grid() const { return grid_; }
  double& operator()(int i, int j) { return values_[index(i, j)]; }
  double operator()(int i, int j) const { return values_[index(i, j)]; }
  double& operator[](std::size_t k) { return values_[k]; }
  double operator[](std::size_t k) const { return values_[k]; }
  std::size_t size() const { return values_.size(); }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  RealField& operator+=(const RealField& o);
  RealField& operator-=(const RealField& o);
  RealField& operator*=(const RealField& o);
  RealField& operator*=(double s);
  RealField& operator+=(double s);

  bool all_finite() const;

 private:
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * grid_.n() + j;
  }

  Grid grid_;
  AlignedVector<double> values_;
};

RealField operator+(RealField a, const RealField& b);
RealField operator-(RealField a, const RealField& b);
RealField operator*(RealField a, const RealField& b);
RealField operator*(double s, RealField a);
RealField operator*(RealField a, double s);

// Pointwise application of a scalar map.
template <typename Fn>
RealField map(const RealField& f, Fn&& fn) {
  RealField out(f.grid());
  for (std::size_t k = 0; k < f.size(); ++k) out[k] = fn(f[k]);
  return out;
}

struct VectorField {
  explicit VectorField(Grid grid) : x(grid), y(grid) {}
  VectorField(RealField a, RealField b);

  const Grid& grid() const { return x.grid(); }
  RealField& operator[](int axis) { return axis == 0 ? x : y; }
  const RealField& operator[](int axis) const { return axis == 0 ? x : y; }

  RealField x;
  RealField y;
};

class SpectralField {
 public:
  using value_type = std::complex<double>;

  explicit SpectralField(Grid grid);

  const Grid& grid() const { return grid_; }
  value_type& operator()(int a, int b) { return coeffs_[index(a, b)]; }
  const value_type& operator()(int a, int b) const { return coeffs_[index(a, b)]; }
  std::span<value_type> coeffs() { return coeffs_; }
  std::span<const value_type> coeffs() const { return coeffs_; }

  // Wavenumber 2*pi*m of index (a, b).
  double k1(int a) const { return two_pi * grid_.mode(a); }
  double k2(int b) const { return two_pi * grid_.half_mode(b); }

  // Multiplicity of column b in the full spectrum (1 on the self-conjugate
  // columns b = 0 and b = n/2, 2 elsewhere).
  int weight(int b) const { return (b == 0 || b == grid_.n() / 2) ? 1 : 2; }

  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator-=(const SpectralField& o);
  SpectralField& operator*=(double s);

  static constexpr double two_pi = 6.283185307179586476925286766559;

 private:
  std::size_t index(int a, int b) const {
    return static_cast<std::size_t>(a) * grid_.half() + b;
  }

  Grid grid_;
  AlignedVector<value_type> coeffs_;
};

class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Axis { x1 = 0, x2 = 1 };

SpectralField to_spectral(const RealField& f);
RealField to_real(const SpectralField& F);

namespace detail {
// Transforms without the half-cell phase factor (coefficients of the field
// sampled from x = 0), normalized by 1/n^2 on the forward side. Only
// meaningful to code that applies diagonal multipliers and pointwise
// products; no finiteness check. Output buffers must be distinct from input.
void forward_raw(const RealField& f, SpectralField& out);
void backward_raw(const SpectralField& F, RealField& out);
// Uses F as scratch.
void backward_raw_destroy(SpectralField& F, RealField& out);
// Band-limited variants: the forward transform only produces coefficients
// with |m2| <= n/3 (the rest are set to 0), the backward one assumes F
// vanishes there.
void forward_raw_band(const RealField& f, SpectralField& out);
void backward_raw_band(const SpectralField& F, RealField& out);
}  // namespace detail

// 2/3-rule truncation: zero every coefficient with max(|m1|,|m2|) > n/3.
SpectralField dealias(SpectralField F);
void dealias_in_place(SpectralField& F);
bool in_dealiased_band(const Grid& g, int a, int b);

// Spectral-space operators. Odd symbols vanish on the Nyquist row/column so
// that real fields stay real.
SpectralField derivative(const SpectralField& F, Axis axis);
SpectralField laplacian(const SpectralField& F);
SpectralField inv_laplacian_zero_mean(const SpectralField& F);
SpectralField riesz_composition(int i, int j, const SpectralField& F);
// (-Delta)^{-1/2} d_i, i.e. the Riesz transform R_i (symbol i k_i / |k|).
SpectralField riesz(int i, const SpectralField& F);

RealField derivative(const RealField& f, Axis axis);
VectorField gradient(const RealField& f);
VectorField perp_gradient(const RealField& f);  // (d2 f, -d1 f)
RealField divergence(const VectorField& u);
RealField rot(const VectorField& u);             // d2 u1 - d1 u2
RealField laplacian(const RealField& f);
// Solves Delta g = f - mean(f) with mean(g) = 0. Warns if f carries a mean
// larger than 1e-10 of its max norm.
RealField inv_laplacian_zero_mean(const RealField& f);
// Applies the multiplier -k_i k_j / |k|^2 (i, j in {1, 2}), mean mode -> 0.
// Coefficients on the Nyquist lines of axes i and j are dropped, so
// sum_i R_i R_i f = -(f - mean f) holds for fields without Nyquist content.
RealField riesz_composition(int i, int j, const RealField& f);

// Grid (trapezoid) quadrature on the unit torus.
double integral(const RealField& f);
double mean(const RealField& f);
double lp_norm(const RealField& f, double p);
double max_abs(const RealField& f);
double min_value(const RealField& f);
double max_value(const RealField& f);
// Norms of the pointwise Euclidean magnitude of a vector field.
double lp_norm(const VectorField& u, double p);
double max_abs(const VectorField& u);
// sum over the full spectrum of |F(k)|^2, equal to the L2 norm squared.
double parseval_sum(const SpectralField& F);

// L^p norm of the Frobenius norm of the Jacobian of u.
double gradient_lp_norm(const VectorField& u, double p);

}  // namespace vkns
