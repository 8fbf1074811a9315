// Functionals monitored along a trajectory: effective viscous flux, the
// Desjardins potential, the Riesz commutator term, the (D, Y, X) energies,
// norms, and constant-free bound ratios.
#pragma once

#include <string>
#include <vector>

#include "vkns/dynamics.hpp"
#include "vkns/fluid_state.hpp"

namespace vkns {

// Exponents of the running density maximum rho_hat in the logarithmic
// gradient bound and the commutator bound.
struct ExponentSchedule {
  double epsilon = 0.0;
  double q = 0.0;
  double varsigma = 0.0;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double alpha3 = 0.0;
  double alpha4 = 0.0;
  double nu0 = 0.5;
  // max{alpha1, alpha2 + varsigma / q, alpha3, alpha4} < beta
  bool admissible = false;

  double worst() const;
  // nu = rho_hat^(-beta/2) nu0
  double nu(double rho_hat, double beta) const;

  // Requires 0 < epsilon < 1, q > 4, 0 < nu0 <= 1/2.
  static ExponentSchedule compute(const Params& p, double epsilon, double q, double nu0 = 0.5);
  // First admissible pair scanning q ascending, then epsilon descending, over
  // the given grids. Without an admissible pair, returns the pair with the
  // smallest worst() and admissible = false.
  static ExponentSchedule search(const Params& p, double nu0 = 0.5,
                                 const std::vector<double>& epsilons = {0.5, 0.2, 0.1, 0.05, 0.01},
                                 const std::vector<double>& qs = {5, 8, 16, 32, 64});
};

// B = (lambda + 2 mu) div u - (P - Pbar)
RealField effective_viscous_flux(const FluidState& s, const Params& p);
// F = 2 mu log rho + rho^beta / beta - (-Delta)^{-1} div(rho u)
RealField desjardins_F(const FluidState& s, const Params& p);
// theta = 2 mu log rho + rho^beta / beta
RealField theta(const RealField& rho, const Params& p);

enum class CommutatorRoute { riesz_pairs, nested };
// G = sum_{i,j} [u_i, R_i R_j](rho u_j). The nested route evaluates
// u . R grad-div-form of the same expression through single Riesz transforms.
RealField commutator_G(const FluidState& s, CommutatorRoute route = CommutatorRoute::riesz_pairs);

struct EnergyQuantities {
  double D2 = 0.0;
  double Y2 = 0.0;
  double X2 = 0.0;
};
// D^2 = int (lambda + 2 mu)|div u|^2 + mu |rot u|^2
// Y^2 = int mu |rot u|^2 + B^2 / (lambda + 2 mu)
// X^2 = int |grad B + mu grad-perp rot u|^2 / rho
EnergyQuantities quantities_DYX(const FluidState& s, const Params& p);

struct Norms {
  double grad_u_L2 = 0.0;
  std::vector<double> grad_u_Lq;
  std::vector<double> rho_Lp;
  std::array<double, 2> u_mean{0.0, 0.0};
  double weighted_moment = 0.0;  // int rho |u|^(2 + nu)
};
Norms norms(const FluidState& s, const std::vector<double>& q_list,
            const std::vector<double>& p_list, double nu);

// Right-hand side terms of the L^q gradient estimate, without constants,
// with rho_tilde the current maximum of rho.
struct GradientBoundTerms {
  double q = 0.0;
  double density_term = 0.0;      // rho~^(...) (1 + D)
  double interpolation_term = 0.0;  // rho~^(...) (1 + D) (X^2 / (10 + Y^2))^(1/2 - 1/q)
  double pressure_term = 0.0;     // rho~^max(0, (q - 1) gamma / q - beta)
};

struct BoundTerms {
  std::vector<GradientBoundTerms> gradient;
  double ratio_logY = 0.0;   // log(10 + |grad u|_2^2) / rho_hat^varsigma
  double ratio_G = 0.0;      // |G|_inf / (commutator bound without constant)
  double ratio_umean = 0.0;  // |int u| / |grad u|_2
};
// Zero-velocity states report every ratio as 0; denominators are floored at
// 1e-300.
BoundTerms bound_terms(const FluidState& s, const Params& p, const ExponentSchedule& sched,
                       double rho_hat, const std::vector<double>& q_list);

struct DiagnosticsRecord {
  double t = 0.0;
  double mass = 0.0;
  std::array<double, 2> momentum{0.0, 0.0};
  double energy = 0.0;
  double D2 = 0.0;
  double Y2 = 0.0;
  double X2 = 0.0;
  double rho_min = 0.0;
  double rho_max = 0.0;
  double rho_hat = 0.0;
  double grad_u_L2 = 0.0;
  double B_L2 = 0.0;
  double B_bar = 0.0;
  double P_bar = 0.0;
  double G_Linf = 0.0;
  double F_min = 0.0;
  double F_max = 0.0;
  double theta_min = 0.0;
  std::array<double, 2> u_mean{0.0, 0.0};
  double ratio_logY = 0.0;
  double ratio_G = 0.0;
  double ratio_umean = 0.0;
  double weighted_moment = 0.0;
  std::vector<double> grad_u_Lq;
  std::vector<double> rho_Lp;
  std::vector<GradientBoundTerms> gradient_bounds;
  // Trajectory integrals up to t.
  double int_D2 = 0.0;
  double int_PP = 0.0;
  double int_XY = 0.0;  // int X^2 / (10 + Y^2) dt, trapezoid over samples
};

struct MonitorConfig {
  std::vector<double> q_list{4.0, 8.0};
  std::vector<double> p_list{2.0, 4.0};
  ExponentSchedule schedule;
};

// Carries the running quantities of a trajectory (rho_hat over output
// samples, the trapezoid integral of X^2 / (10 + Y^2)).
class Monitor {
 public:
  struct Carry {
    double rho_hat = 0.0;
    double int_XY = 0.0;
    double last_t = 0.0;
    double last_XY = 0.0;
    bool started = false;
  };

  Monitor(Params p, MonitorConfig cfg);

  DiagnosticsRecord observe(const FluidState& s, const TrajectoryIntegrals& integrals);

  const Carry& carry() const { return carry_; }
  void restore(const Carry& c) { carry_ = c; }
  const MonitorConfig& config() const { return cfg_; }

 private:
  Params p_;
  MonitorConfig cfg_;
  Carry carry_;
};

// Column names in CSV order.
std::vector<std::string> csv_header(const MonitorConfig& cfg);
std::vector<double> csv_row(const DiagnosticsRecord& r);

}  // namespace vkns
