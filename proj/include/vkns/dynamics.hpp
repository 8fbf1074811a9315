// Pseudo-spectral right-hand side and explicit SSP-RK3 time integration of
//
//   rho_t + div(rho u) = 0
//   (rho u)_t + div(rho u (x) u) + grad P = grad((lambda + mu) div u) + mu Lap u
//
// with P = rho^gamma, lambda = rho^beta on the unit torus.
#pragma once

#include <functional>
#include <string>

#include "vkns/fluid_state.hpp"

namespace vkns {

struct StepControl {
  double cfl = 0.4;
  double dt_max = 1e-2;
  double t_end = 1.0;
  double output_interval = 0.1;

  void validate() const;
};

// Optional extra tendency added to the right-hand side (test fixtures).
using Forcing = std::function<void(const FluidState&, RealField& d_rho, VectorField& d_m)>;

struct Tendency {
  RealField d_rho;
  VectorField d_m;
  // By-products of the evaluation: D^2 and int (P - Pbar)^2 of the input state.
  double dissipation = 0.0;
  double pressure_deviation = 0.0;
};

// Tendencies are projected onto the 2/3 band; their mean modes are exactly 0.
Tendency rhs(const FluidState& s, const Params& p, const Forcing& forcing = {});

// Time integrals carried along a trajectory, advanced with the same RK
// weights as the state: int D^2 dt and int ||P - Pbar||_2^2 dt.
struct TrajectoryIntegrals {
  double dissipation = 0.0;
  double pressure_deviation = 0.0;
};

// cfl * min(dx / max(|u| + c_s), dx^2 / (2 max(lambda + 2 mu) / min rho)),
// c_s = sqrt(gamma rho^(gamma - 1)).
double cfl_dt(const FluidState& s, const Params& p, double cfl = 0.4);

// One Shu-Osher SSP-RK3 step. Requires 0 < dt <= cfl_dt(s, p, 1.0).
FluidState step(const FluidState& s, const Params& p, double dt,
                TrajectoryIntegrals* integrals = nullptr, const Forcing& forcing = {});

enum class RunStatus { completed, vacuum_breach, non_finite, cfl_collapse };

std::string to_string(RunStatus status);

using Observer = std::function<void(const FluidState&, const TrajectoryIntegrals&)>;

struct SimulateOptions {
  Forcing forcing;
  TrajectoryIntegrals start;
  // The initial state is a saved output state of an earlier run: skip the
  // band projection and the observation at the start time.
  bool resumed = false;
};

struct TrajectorySummary {
  FluidState final_state;
  RunStatus status = RunStatus::completed;
  std::string reason;
  long steps = 0;
  TrajectoryIntegrals integrals;
};

// Advances init to ctl.t_end, landing exactly on every output time
// k * output_interval and calling observer there (including the start when
// it is an output time). Aborts on vacuum, non-finite values or dt < 1e-12;
// a collapse with min rho <= 1e-6 mean(rho) is reported as a vacuum breach.
TrajectorySummary simulate(const FluidState& init, const Params& p, const StepControl& ctl,
                           const Observer& observer = {}, const SimulateOptions& opts = {});

}  // namespace vkns
