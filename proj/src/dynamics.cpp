#include "vkns/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <vector>

namespace vkns {

void StepControl::validate() const {
  if (!(cfl > 0.0 && cfl <= 1.0)) throw std::invalid_argument("cfl must lie in (0, 1]");
  if (!(dt_max > 0.0)) throw std::invalid_argument("dt_max must be > 0");
  if (!(t_end >= 0.0)) throw std::invalid_argument("t_end must be >= 0");
  if (!(output_interval > 0.0)) throw std::invalid_argument("output_interval must be > 0");
}

namespace {

using cplx = std::complex<double>;

inline cplx times_i(cplx c) { return {-c.imag(), c.real()}; }

// Calls fn with the map r -> r^e, using exact products for the small
// integer exponents used in practice.
template <typename Fn>
decltype(auto) with_power(int ie, double e, Fn&& fn) {
  switch (ie) {
    case 1: return fn([](double r) { return r; });
    case 2: return fn([](double r) { return r * r; });
    case 3: return fn([](double r) { return r * r * r; });
    case 4: return fn([](double r) { const double r2 = r * r; return r2 * r2; });
    default: return fn([e](double r) { return std::pow(r, e); });
  }
}

inline double rpow(double r, double e, int ie) {
  return with_power(ie, e, [r](auto pw) { return pw(r); });
}

int integer_exponent(double e) {
  const double rounded = std::round(e);
  return (rounded == e && rounded >= 1.0 && rounded <= 4.0) ? static_cast<int>(rounded) : 0;
}

struct Spectra {
  explicit Spectra(const Grid& g) : r(g), m1(g), m2(g) {}
  SpectralField r, m1, m2;
};

struct StageInfo {
  double dissipation = 0.0;
  double pressure_deviation = 0.0;
  double max_speed = 0.0;  // max |u| + c_s
  double max_visc = 0.0;   // max lambda + 2 mu
  double min_rho = 0.0;
};

// Evaluates tendencies in transform space. Nine transforms per evaluation:
// the caller supplies the state both in real and spectral form.
class Integrator {
 public:
  Integrator(const Grid& g, const Params& p, const Forcing& forcing)
      : g_(g), p_(p), forcing_(forcing), ib_(integer_exponent(p.beta())),
        ig_(integer_exponent(p.gamma())), u1_(g), u2_(g), divu_(g), t11_(g), t12_(g),
        t22_(g), U1_(g), U2_(g), DivU_(g), T11_(g), T12_(g), T22_(g), extra_(g) {
    const int n = g.n();
    for (int a = 0; a < n; ++a) {
      k1_.push_back(SpectralField::two_pi * g.mode(a));
      d1_.push_back(g.mode(a) == -n / 2 ? 0.0 : k1_.back());
      band_row_.push_back(std::abs(g.mode(a)) <= n / 3);
    }
    for (int b = 0; b < g.half(); ++b) {
      k2_.push_back(SpectralField::two_pi * g.half_mode(b));
      d2_.push_back(g.half_mode(b) == -n / 2 ? 0.0 : k2_.back());
      weight_.push_back(DivU_.weight(b));
    }
  }

  // Zeroes every coefficient outside the 2/3 band.
  void project(SpectralField& F) const {
    const int h = g_.half();
    const int cols = g_.n() / 3 + 1;
    for (int a = 0; a < g_.n(); ++a) {
      std::complex<double>* row = &F(a, 0);
      const int keep = band_row_[a] ? cols : 0;
      for (int b = keep; b < h; ++b) row[b] = 0.0;
    }
  }

  StageInfo evaluate(double t, const RealField& rho, const RealField& m1, const RealField& m2,
                     const Spectra& S, Spectra& D) {
    const int n = g_.n();
    const int h = g_.half();
    const std::size_t N = g_.size();
    bool positive = true;
    for (std::size_t k = 0; k < N; ++k) {
      positive &= rho[k] > 0.0;
      u1_[k] = m1[k] / rho[k];
      u2_[k] = m2[k] / rho[k];
    }
    if (!positive) require_positive(rho);
    detail::forward_raw(u1_, U1_);
    detail::forward_raw(u2_, U2_);

    double rot_sq = 0.0;
    for (int a = 0; a < n; ++a) {
      const double d1 = d1_[a];
      const cplx* u1 = &U1_(a, 0);
      const cplx* u2 = &U2_(a, 0);
      cplx* dv = &DivU_(a, 0);
      for (int b = 0; b < h; ++b) {
        const double d2 = d2_[b];
        dv[b] = times_i(d1 * u1[b] + d2 * u2[b]);
        rot_sq += weight_[b] * std::norm(d2 * u1[b] - d1 * u2[b]);
      }
    }
    detail::backward_raw_destroy(DivU_, divu_);

    StageInfo info = with_power(ib_, p_.beta(), [&](auto lam_of) {
      return with_power(ig_, p_.gamma(), [&](auto p_of) {
        return fluxes(lam_of, p_of, rho, m1, m2);
      });
    });
    info.dissipation += p_.mu() * rot_sq;
    if (!std::isfinite(info.dissipation) || !std::isfinite(info.pressure_deviation)) {
      throw NonFiniteError("non-finite value in state at t = " + std::to_string(t));
    }

    detail::forward_raw_band(t11_, T11_);
    detail::forward_raw_band(t12_, T12_);
    detail::forward_raw_band(t22_, T22_);

    const double mu = p_.mu();
    const int cols = n / 3 + 1;
    for (int a = 0; a < n; ++a) {
      cplx* dr = &D.r(a, 0);
      cplx* dm1 = &D.m1(a, 0);
      cplx* dm2 = &D.m2(a, 0);
      if (!band_row_[a]) {
        std::fill(dr, dr + h, cplx{});
        std::fill(dm1, dm1 + h, cplx{});
        std::fill(dm2, dm2 + h, cplx{});
        continue;
      }
      const double k1 = k1_[a];
      const double d1 = d1_[a];
      const cplx* sm1 = &S.m1(a, 0);
      const cplx* sm2 = &S.m2(a, 0);
      const cplx* t11 = &T11_(a, 0);
      const cplx* t12 = &T12_(a, 0);
      const cplx* t22 = &T22_(a, 0);
      const cplx* u1 = &U1_(a, 0);
      const cplx* u2 = &U2_(a, 0);
      for (int b = 0; b < cols; ++b) {
        const double d2 = d2_[b];
        const double visc = mu * (k1 * k1 + k2_[b] * k2_[b]);
        dr[b] = -times_i(d1 * sm1[b] + d2 * sm2[b]);
        dm1[b] = -times_i(d1 * t11[b] + d2 * t12[b]) - visc * u1[b];
        dm2[b] = -times_i(d1 * t12[b] + d2 * t22[b]) - visc * u2[b];
      }
      std::fill(dr + cols, dr + h, cplx{});
      std::fill(dm1 + cols, dm1 + h, cplx{});
      std::fill(dm2 + cols, dm2 + h, cplx{});
    }
    D.r(0, 0) = 0.0;
    D.m1(0, 0) = 0.0;
    D.m2(0, 0) = 0.0;

    if (forcing_) {
      const FluidState s(t, rho, VectorField(m1, m2));
      RealField fr(g_);
      VectorField fm(g_);
      forcing_(s, fr, fm);
      detail::forward_raw_band(fr, extra_);
      project(extra_);
      D.r += extra_;
      detail::forward_raw_band(fm.x, extra_);
      project(extra_);
      D.m1 += extra_;
      detail::forward_raw_band(fm.y, extra_);
      project(extra_);
      D.m2 += extra_;
    }
    return info;
  }

  const Grid& grid() const { return g_; }

 private:
  // Pointwise pass: momentum flux tensor minus the isotropic stress, plus
  // the real-space parts of the stage diagnostics.
  template <typename LamOf, typename POf>
  StageInfo fluxes(LamOf lam_of, POf p_of, const RealField& rho, const RealField& m1,
                   const RealField& m2) {
    const std::size_t N = g_.size();
    const double mu = p_.mu();
    const double gamma = p_.gamma();
    StageInfo info;
    info.min_rho = std::numeric_limits<double>::infinity();
    double div_sq = 0.0, p_sum = 0.0, p_sq = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
      const double r = rho[k];
      const double lam = lam_of(r);
      const double P = p_of(r);
      const double dv = divu_[k];
      const double s = (lam + mu) * dv - P;
      const double v1 = u1_[k];
      const double v2 = u2_[k];
      t11_[k] = m1[k] * v1 - s;
      t12_[k] = m1[k] * v2;
      t22_[k] = m2[k] * v2 - s;
      div_sq += (lam + 2.0 * mu) * dv * dv;
      p_sum += P;
      p_sq += P * P;
      const double speed = std::sqrt(v1 * v1 + v2 * v2) + std::sqrt(gamma * P / r);
      info.max_speed = std::max(info.max_speed, speed);
      info.max_visc = std::max(info.max_visc, lam + 2.0 * mu);
      info.min_rho = std::min(info.min_rho, r);
    }
    const double inv_n = 1.0 / static_cast<double>(N);
    const double p_mean = p_sum * inv_n;
    info.dissipation = div_sq * inv_n;
    info.pressure_deviation = std::max(0.0, p_sq * inv_n - p_mean * p_mean);
    return info;
  }

  Grid g_;
  Params p_;
  const Forcing& forcing_;
  int ib_, ig_;
  // Wavenumbers, and the same with the Nyquist line zeroed for odd symbols.
  std::vector<double> k1_, k2_, d1_, d2_;
  std::vector<char> band_row_;
  std::vector<int> weight_;
  RealField u1_, u2_, divu_, t11_, t12_, t22_;
  SpectralField U1_, U2_, DivU_, T11_, T12_, T22_, extra_;
};

double stable_dt(const StageInfo& info, double dx, double cfl) {
  const double advective = dx / info.max_speed;
  const double diffusive = dx * dx / (2.0 * info.max_visc / info.min_rho);
  return cfl * std::min(advective, diffusive);
}

// out = a * x + b * (y + dt * d), coefficientwise.
void combine(SpectralField& out, double a, const SpectralField& x, double b,
             const SpectralField& y, double dt, const SpectralField& d) {
  auto o = out.coeffs();
  auto xs = x.coeffs();
  auto ys = y.coeffs();
  auto ds = d.coeffs();
  for (std::size_t k = 0; k < o.size(); ++k) o[k] = a * xs[k] + b * (ys[k] + dt * ds[k]);
}

void combine(Spectra& out, double a, const Spectra& x, double b, const Spectra& y, double dt,
             const Spectra& d) {
  combine(out.r, a, x.r, b, y.r, dt, d.r);
  combine(out.m1, a, x.m1, b, y.m1, dt, d.m1);
  combine(out.m2, a, x.m2, b, y.m2, dt, d.m2);
}

void to_real_state(const Spectra& S, FluidState& s) {
  detail::backward_raw_band(S.r, s.rho);
  detail::backward_raw_band(S.m1, s.m.x);
  detail::backward_raw_band(S.m2, s.m.y);
}

void require_finite(const FluidState& s) {
  if (!s.rho.all_finite() || !s.m.x.all_finite() || !s.m.y.all_finite()) {
    throw NonFiniteError("non-finite value in state at t = " + std::to_string(s.t));
  }
}

// One SSP-RK3 step. The state is kept in real form between steps; stage 0
// (already evaluated by the caller into S0, D0, info0) is reused.
class Stepper {
 public:
  Stepper(const Grid& g, const Params& p, const Forcing& forcing)
      : integ_(g, p, forcing), S0_(g), S1_(g), S2_(g), D0_(g), D1_(g), D2_(g), work_(0.0, RealField(g), VectorField(g)) {}

  // Loads s and evaluates the first stage. With `continuing`, s must be the
  // unmodified output of the previous finish(); its spectra are reused.
  const StageInfo& begin(const FluidState& s, bool continuing = false) {
    if (!continuing) {
      detail::forward_raw_band(s.rho, S0_.r);
      detail::forward_raw_band(s.m.x, S0_.m1);
      detail::forward_raw_band(s.m.y, S0_.m2);
      integ_.project(S0_.r);
      integ_.project(S0_.m1);
      integ_.project(S0_.m2);
    }
    info0_ = integ_.evaluate(s.t, s.rho, s.m.x, s.m.y, S0_, D0_);
    return info0_;
  }

  // Completes the step started by begin(s), overwriting s.
  void finish(FluidState& s, double dt, TrajectoryIntegrals* acc) {
    const double t0 = s.t;
    combine(S1_, 0.0, S0_, 1.0, S0_, dt, D0_);
    to_real_state(S1_, work_);
    const StageInfo i1 = integ_.evaluate(t0 + dt, work_.rho, work_.m.x, work_.m.y, S1_, D1_);
    combine(S2_, 0.75, S0_, 0.25, S1_, dt, D1_);
    to_real_state(S2_, work_);
    const StageInfo i2 =
        integ_.evaluate(t0 + 0.5 * dt, work_.rho, work_.m.x, work_.m.y, S2_, D2_);
    combine(S1_, 1.0 / 3.0, S0_, 2.0 / 3.0, S2_, dt, D2_);
    to_real_state(S1_, s);
    std::swap(S0_, S1_);
    s.t = t0 + dt;
    if (acc) {
      // Quadrature weights implied by the Shu-Osher form: 1/6, 1/6, 2/3.
      acc->dissipation +=
          dt * (info0_.dissipation / 6.0 + i1.dissipation / 6.0 + 2.0 * i2.dissipation / 3.0);
      acc->pressure_deviation +=
          dt * (info0_.pressure_deviation / 6.0 + i1.pressure_deviation / 6.0 +
                2.0 * i2.pressure_deviation / 3.0);
    }
  }

  // Replaces s by its projection onto the 2/3 band.
  void project(FluidState& s) {
    detail::forward_raw_band(s.rho, S0_.r);
    detail::forward_raw_band(s.m.x, S0_.m1);
    detail::forward_raw_band(s.m.y, S0_.m2);
    integ_.project(S0_.r);
    integ_.project(S0_.m1);
    integ_.project(S0_.m2);
    to_real_state(S0_, s);
  }

  Integrator& integrator() { return integ_; }
  const Spectra& stage0() const { return S0_; }
  const Spectra& tendency0() const { return D0_; }

 private:
  Integrator integ_;
  Spectra S0_, S1_, S2_, D0_, D1_, D2_;
  FluidState work_;
  StageInfo info0_;
};

}  // namespace

Tendency rhs(const FluidState& s, const Params& p, const Forcing& forcing) {
  Stepper stepper(s.grid(), p, forcing);
  const StageInfo info = stepper.begin(s);
  const Spectra& D = stepper.tendency0();
  Tendency out{RealField(s.grid()), VectorField(s.grid()), info.dissipation,
               info.pressure_deviation};
  detail::backward_raw(D.r, out.d_rho);
  detail::backward_raw(D.m1, out.d_m.x);
  detail::backward_raw(D.m2, out.d_m.y);
  return out;
}

double cfl_dt(const FluidState& s, const Params& p, double cfl) {
  require_positive(s.rho);
  const double dx = s.grid().dx();
  const int ib = integer_exponent(p.beta());
  const int ig = integer_exponent(p.gamma());
  StageInfo info;
  info.min_rho = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < s.rho.size(); ++k) {
    const double r = s.rho[k];
    const double speed = std::hypot(s.m.x[k], s.m.y[k]) / r;
    const double c = std::sqrt(p.gamma() * rpow(r, p.gamma(), ig) / r);
    info.max_speed = std::max(info.max_speed, speed + c);
    info.max_visc = std::max(info.max_visc, rpow(r, p.beta(), ib) + 2.0 * p.mu());
    info.min_rho = std::min(info.min_rho, r);
  }
  return stable_dt(info, dx, cfl);
}

FluidState step(const FluidState& s, const Params& p, double dt, TrajectoryIntegrals* integrals,
                const Forcing& forcing) {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be > 0");
  Stepper stepper(s.grid(), p, forcing);
  FluidState out = s;
  stepper.project(out);
  const StageInfo& info = stepper.begin(out);
  const double limit = stable_dt(info, s.grid().dx(), 1.0);
  if (dt > limit) {
    std::ostringstream os;
    os << "time step " << dt << " exceeds the stability limit " << limit;
    throw std::invalid_argument(os.str());
  }
  stepper.finish(out, dt, integrals);
  require_finite(out);
  return out;
}

std::string to_string(RunStatus status) {
  switch (status) {
    case RunStatus::completed: return "completed";
    case RunStatus::vacuum_breach: return "vacuum-breach";
    case RunStatus::non_finite: return "non-finite";
    case RunStatus::cfl_collapse: return "cfl-collapse";
  }
  return "unknown";
}

TrajectorySummary simulate(const FluidState& init, const Params& p, const StepControl& ctl,
                           const Observer& observer, const SimulateOptions& opts) {
  ctl.validate();
  TrajectorySummary out{init, RunStatus::completed, {}, 0, opts.start};
  FluidState& s = out.final_state;
  const double interval = ctl.output_interval;
  const double eps = 1e-9 * interval;
  Stepper stepper(s.grid(), p, opts.forcing);
  if (!opts.resumed) stepper.project(s);

  // Index of the next output time strictly after the start (or at it).
  long k = static_cast<long>(std::floor(s.t / interval + 1e-9));
  // Spectra are recomputed from the real state after every output time, so a
  // run restarted from a saved output state follows the same bits.
  bool reuse = false;
  try {
    if (std::abs(k * interval - s.t) <= eps) {
      if (observer && !opts.resumed && s.t <= ctl.t_end + eps) observer(s, out.integrals);
      ++k;
    } else if (k * interval < s.t) {
      ++k;
    }
    while (s.t < ctl.t_end) {
      const double target = std::min(static_cast<double>(k) * interval, ctl.t_end);
      const StageInfo& info = stepper.begin(s, reuse);
      reuse = true;
      const double stable = stable_dt(info, s.grid().dx(), ctl.cfl);
      if (!(stable >= 1e-12)) {
        // A collapse driven by a density minimum within 1e-6 of zero (relative
        // to the mean) is the numerical face of vacuum formation.
        const double rho_min = min_value(s.rho);
        char buf[128];
        if (rho_min <= 1e-6 * mean(s.rho)) {
          out.status = RunStatus::vacuum_breach;
          std::snprintf(buf, sizeof buf,
                        "density minimum %.3e approaches vacuum, time step %.3e at t = %.6g",
                        rho_min, stable, s.t);
        } else {
          out.status = RunStatus::cfl_collapse;
          std::snprintf(buf, sizeof buf, "time step collapsed to %.3e at t = %.6g", stable, s.t);
        }
        out.reason = buf;
        return out;
      }
      double dt = std::min(stable, ctl.dt_max);
      bool lands = false;
      if (s.t + dt >= target - eps) {
        dt = target - s.t;
        lands = true;
      }
      stepper.finish(s, dt, &out.integrals);
      ++out.steps;
      if (lands) {
        s.t = target;
        if (std::abs(target - static_cast<double>(k) * interval) <= eps) {
          if (observer) observer(s, out.integrals);
          ++k;
          reuse = false;
        }
      }
    }
    require_finite(s);
  } catch (const VacuumBreach& e) {
    out.status = RunStatus::vacuum_breach;
    out.reason = e.what();
  } catch (const NonFiniteError& e) {
    out.status = RunStatus::non_finite;
    out.reason = e.what();
  }
  return out;
}

}  // namespace vkns
