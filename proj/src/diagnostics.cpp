#include "vkns/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <sstream>

namespace vkns {

namespace {

constexpr double kFloor = 1e-300;

double floored(double x) { return std::max(x, kFloor); }

std::string exponent_label(double e) {
  std::ostringstream os;
  os << e;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// Exponent schedule

double ExponentSchedule::worst() const {
  return std::max({alpha1, alpha2 + varsigma / q, alpha3, alpha4});
}

double ExponentSchedule::nu(double rho_hat, double beta) const {
  return std::pow(rho_hat, -0.5 * beta) * nu0;
}

ExponentSchedule ExponentSchedule::compute(const Params& p, double epsilon, double q, double nu0) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
  if (!(q > 4.0)) throw std::invalid_argument("q must be > 4");
  if (!(nu0 > 0.0 && nu0 <= 0.5)) throw std::invalid_argument("nu0 must lie in (0, 1/2]");
  const double b = p.beta();
  const double g = p.gamma();
  ExponentSchedule s;
  s.epsilon = epsilon;
  s.q = q;
  s.nu0 = nu0;
  s.varsigma = 1.0 + b * epsilon + std::max({0.0, g - 2.0 * b, b - g - 2.0});
  const double tail = (0.5 - 1.0 / q) * s.varsigma;
  s.alpha1 = (b * epsilon / 2.0 + std::abs(g - b) / 4.0) * (4.0 / q) + 1.0 - 1.0 / q + tail;
  s.alpha2 = (b * epsilon / 2.0 + std::max((g - b) / 2.0, 0.0)) * (4.0 / q) + 1.0 + tail;
  s.alpha3 = std::max(0.0, 0.75 * g - b) * (4.0 / q) + 1.0 - 1.0 / q + tail;
  s.alpha4 = std::max((1.0 + s.varsigma) / 2.0,
                      1.0 - 1.0 / (2.0 * q) + (0.25 - 1.0 / (2.0 * q)) * s.varsigma);
  s.admissible = s.worst() < b;
  return s;
}

ExponentSchedule ExponentSchedule::search(const Params& p, double nu0,
                                          const std::vector<double>& epsilons,
                                          const std::vector<double>& qs) {
  std::vector<double> q_sorted = qs;
  std::vector<double> e_sorted = epsilons;
  std::sort(q_sorted.begin(), q_sorted.end());
  std::sort(e_sorted.begin(), e_sorted.end(), std::greater<>());
  std::optional<ExponentSchedule> best;
  for (double q : q_sorted) {
    for (double e : e_sorted) {
      ExponentSchedule s = compute(p, e, q, nu0);
      if (s.admissible) return s;
      if (!best || s.worst() < best->worst()) best = s;
    }
  }
  if (!best) throw std::invalid_argument("empty schedule search grid");
  return *best;
}

// ---------------------------------------------------------------------------
// Fields

RealField effective_viscous_flux(const FluidState& s, const Params& p) {
  const VectorField u = s.velocity();
  const RealField divu = divergence(u);
  const RealField lambda = bulk_viscosity(s.rho, p);
  const RealField P = pressure(s.rho, p);
  const double p_bar = mean(P);
  RealField B(s.grid());
  for (std::size_t k = 0; k < B.size(); ++k) {
    B[k] = (lambda[k] + 2.0 * p.mu()) * divu[k] - (P[k] - p_bar);
  }
  return B;
}

RealField theta(const RealField& rho, const Params& p) {
  require_positive(rho);
  return map(rho, [&](double r) {
    return 2.0 * p.mu() * std::log(r) + std::pow(r, p.beta()) / p.beta();
  });
}

RealField desjardins_F(const FluidState& s, const Params& p) {
  // -(-Delta)^{-1} = Delta^{-1}
  return theta(s.rho, p) + inv_laplacian_zero_mean(divergence(s.m));
}

RealField commutator_G(const FluidState& s, CommutatorRoute route) {
  const Grid& g = s.grid();
  const VectorField u = s.velocity();
  const SpectralField M[2] = {to_spectral(s.m.x), to_spectral(s.m.y)};
  RealField G(g);
  if (route == CommutatorRoute::riesz_pairs) {
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        const RealField a = to_real(riesz_composition(i + 1, j + 1, M[j]));
        const RealField b = to_real(riesz_composition(i + 1, j + 1, to_spectral(u[i] * s.m[j])));
        for (std::size_t k = 0; k < G.size(); ++k) G[k] += u[i][k] * a[k] - b[k];
      }
    }
    return G;
  }
  // u . (-Delta)^{-1/2} grad (-Delta)^{-1/2} div(rho u)
  SpectralField W = riesz(1, M[0]);
  W += riesz(2, M[1]);
  for (int i = 0; i < 2; ++i) {
    const RealField a = to_real(riesz(i + 1, W));
    for (std::size_t k = 0; k < G.size(); ++k) G[k] += u[i][k] * a[k];
  }
  // (-Delta)^{-1/2} div (-Delta)^{-1/2} div(rho u (x) u)
  SpectralField V(g);
  for (int i = 0; i < 2; ++i) {
    SpectralField Vi = riesz(1, to_spectral(s.m[i] * u.x));
    Vi += riesz(2, to_spectral(s.m[i] * u.y));
    V += riesz(i + 1, Vi);
  }
  G -= to_real(V);
  return G;
}

EnergyQuantities quantities_DYX(const FluidState& s, const Params& p) {
  const VectorField u = s.velocity();
  const RealField divu = divergence(u);
  const RealField w = rot(u);
  const RealField lambda = bulk_viscosity(s.rho, p);
  const RealField B = effective_viscous_flux(s, p);
  const VectorField gB = gradient(B);
  const VectorField gw = perp_gradient(w);
  const double mu = p.mu();
  double d2 = 0.0, y2 = 0.0, x2 = 0.0;
  for (std::size_t k = 0; k < divu.size(); ++k) {
    const double visc = lambda[k] + 2.0 * mu;
    d2 += visc * divu[k] * divu[k] + mu * w[k] * w[k];
    y2 += mu * w[k] * w[k] + B[k] * B[k] / visc;
    const double z1 = gB.x[k] + mu * gw.x[k];
    const double z2 = gB.y[k] + mu * gw.y[k];
    x2 += (z1 * z1 + z2 * z2) / s.rho[k];
  }
  const double n = static_cast<double>(divu.size());
  return {d2 / n, y2 / n, x2 / n};
}

Norms norms(const FluidState& s, const std::vector<double>& q_list,
            const std::vector<double>& p_list, double nu) {
  const VectorField u = s.velocity();
  Norms out;
  out.grad_u_L2 = gradient_lp_norm(u, 2.0);
  for (double q : q_list) out.grad_u_Lq.push_back(gradient_lp_norm(u, q));
  for (double pe : p_list) out.rho_Lp.push_back(lp_norm(s.rho, pe));
  out.u_mean = {integral(u.x), integral(u.y)};
  double acc = 0.0;
  for (std::size_t k = 0; k < s.rho.size(); ++k) {
    const double speed = std::hypot(u.x[k], u.y[k]);
    acc += s.rho[k] * std::pow(speed, 2.0 + nu);
  }
  out.weighted_moment = acc / static_cast<double>(s.rho.size());
  return out;
}

namespace {

struct BoundInputs {
  double rho_max = 0.0;
  double D2 = 0.0;
  double Y2 = 0.0;
  double X2 = 0.0;
  double grad_u_L2 = 0.0;
  double G_Linf = 0.0;
  std::array<double, 2> u_mean{0.0, 0.0};
  bool at_rest = false;
};

BoundTerms bound_terms_from(const BoundInputs& in, const Params& p,
                            const ExponentSchedule& sched, double rho_hat,
                            const std::vector<double>& q_list) {
  const double b = p.beta();
  const double g = p.gamma();
  const double eps = sched.epsilon;
  const double D = std::sqrt(in.D2);
  const double xy = in.X2 / (10.0 + in.Y2);
  BoundTerms out;
  for (double q : q_list) {
    GradientBoundTerms t;
    t.q = q;
    const double e1 = b * eps / 2.0 + std::max(0.0, (g - b) / 2.0) * (2.0 / q) +
                      std::max(0.0, (b - g) / 2.0) * (1.0 - 2.0 / q);
    const double e2 = b * eps / 2.0 + 0.5 - 1.0 / q + std::max(0.0, (g - b) / 2.0);
    const double e3 = std::max(0.0, (q - 1.0) / q * g - b);
    t.density_term = std::pow(in.rho_max, e1) * (1.0 + D);
    t.interpolation_term = std::pow(in.rho_max, e2) * (1.0 + D) * std::pow(xy, 0.5 - 1.0 / q);
    t.pressure_term = std::pow(in.rho_max, e3);
    out.gradient.push_back(t);
  }
  if (in.at_rest) return out;

  out.ratio_logY = std::log(10.0 + in.grad_u_L2 * in.grad_u_L2) /
                   floored(std::pow(rho_hat, sched.varsigma));
  const double q = sched.q;
  const double da = std::pow(D, 2.0 - 2.0 / q) + std::pow(D, 2.0 - 6.0 / q);
  const double denom = std::pow(rho_hat, sched.alpha1) * da +
                       std::pow(rho_hat, sched.alpha2) * da * std::pow(xy, 1.0 / q) +
                       std::pow(rho_hat, sched.alpha3) * std::pow(D, 2.0 - 6.0 / q);
  out.ratio_G = in.G_Linf / floored(denom);
  out.ratio_umean = std::hypot(in.u_mean[0], in.u_mean[1]) / floored(in.grad_u_L2);
  return out;
}

bool at_rest(const FluidState& s) {
  return max_abs(s.m.x) == 0.0 && max_abs(s.m.y) == 0.0;
}

}  // namespace

BoundTerms bound_terms(const FluidState& s, const Params& p, const ExponentSchedule& sched,
                       double rho_hat, const std::vector<double>& q_list) {
  const EnergyQuantities e = quantities_DYX(s, p);
  const VectorField u = s.velocity();
  BoundInputs in;
  in.rho_max = max_value(s.rho);
  in.D2 = e.D2;
  in.Y2 = e.Y2;
  in.X2 = e.X2;
  in.grad_u_L2 = gradient_lp_norm(u, 2.0);
  in.G_Linf = max_abs(commutator_G(s));
  in.u_mean = {integral(u.x), integral(u.y)};
  in.at_rest = at_rest(s);
  return bound_terms_from(in, p, sched, rho_hat, q_list);
}

// ---------------------------------------------------------------------------
// Monitor

Monitor::Monitor(Params p, MonitorConfig cfg) : p_(p), cfg_(std::move(cfg)) {}

DiagnosticsRecord Monitor::observe(const FluidState& s, const TrajectoryIntegrals& integrals) {
  DiagnosticsRecord r;
  r.t = s.t;
  r.mass = mass(s);
  r.momentum = momentum(s);
  r.energy = energy(s, p_);
  const EnergyQuantities e = quantities_DYX(s, p_);
  r.D2 = e.D2;
  r.Y2 = e.Y2;
  r.X2 = e.X2;
  r.rho_min = min_value(s.rho);
  r.rho_max = max_value(s.rho);
  carry_.rho_hat = std::max(carry_.rho_hat, r.rho_max);
  r.rho_hat = carry_.rho_hat;

  const Norms nr = norms(s, cfg_.q_list, cfg_.p_list, cfg_.schedule.nu(r.rho_hat, p_.beta()));
  r.grad_u_L2 = nr.grad_u_L2;
  r.grad_u_Lq = nr.grad_u_Lq;
  r.rho_Lp = nr.rho_Lp;
  r.u_mean = nr.u_mean;
  r.weighted_moment = nr.weighted_moment;

  const RealField B = effective_viscous_flux(s, p_);
  r.B_L2 = lp_norm(B, 2.0);
  r.B_bar = mean(B);
  r.P_bar = mean(pressure(s.rho, p_));
  r.G_Linf = max_abs(commutator_G(s));
  const RealField F = desjardins_F(s, p_);
  r.F_min = min_value(F);
  r.F_max = max_value(F);
  r.theta_min = min_value(theta(s.rho, p_));

  BoundInputs in;
  in.rho_max = r.rho_max;
  in.D2 = r.D2;
  in.Y2 = r.Y2;
  in.X2 = r.X2;
  in.grad_u_L2 = r.grad_u_L2;
  in.G_Linf = r.G_Linf;
  in.u_mean = r.u_mean;
  in.at_rest = at_rest(s);
  const BoundTerms bt = bound_terms_from(in, p_, cfg_.schedule, r.rho_hat, cfg_.q_list);
  r.ratio_logY = bt.ratio_logY;
  r.ratio_G = bt.ratio_G;
  r.ratio_umean = bt.ratio_umean;
  r.gradient_bounds = bt.gradient;

  const double xy = r.X2 / (10.0 + r.Y2);
  if (carry_.started) carry_.int_XY += 0.5 * (s.t - carry_.last_t) * (xy + carry_.last_XY);
  carry_.started = true;
  carry_.last_t = s.t;
  carry_.last_XY = xy;
  r.int_XY = carry_.int_XY;
  r.int_D2 = integrals.dissipation;
  r.int_PP = integrals.pressure_deviation;
  return r;
}

std::vector<std::string> csv_header(const MonitorConfig& cfg) {
  std::vector<std::string> h{"t",        "mass",     "mom_x",      "mom_y",      "energy",
                             "D2",       "Y2",       "X2",         "rho_min",    "rho_max",
                             "rho_hat",  "grad_u_L2", "B_L2",      "B_bar",      "P_bar",
                             "G_Linf",   "theta_min", "u_mean_x",  "u_mean_y",   "ratio_logY",
                             "ratio_G"};
  for (double q : cfg.q_list) h.push_back("grad_u_Lq_" + exponent_label(q));
  for (double pe : cfg.p_list) h.push_back("rho_Lp_" + exponent_label(pe));
  for (const char* extra : {"F_min", "F_max", "int_D2", "int_PP", "int_XY"}) h.push_back(extra);
  return h;
}

std::vector<double> csv_row(const DiagnosticsRecord& r) {
  std::vector<double> row{r.t,         r.mass,      r.momentum[0], r.momentum[1], r.energy,
                          r.D2,        r.Y2,        r.X2,          r.rho_min,     r.rho_max,
                          r.rho_hat,   r.grad_u_L2, r.B_L2,        r.B_bar,       r.P_bar,
                          r.G_Linf,    r.theta_min, r.u_mean[0],   r.u_mean[1],   r.ratio_logY,
                          r.ratio_G};
  row.insert(row.end(), r.grad_u_Lq.begin(), r.grad_u_Lq.end());
  row.insert(row.end(), r.rho_Lp.begin(), r.rho_Lp.end());
  row.insert(row.end(), {r.F_min, r.F_max, r.int_D2, r.int_PP, r.int_XY});
  return row;
}

}  // namespace vkns
