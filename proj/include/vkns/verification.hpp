// Scenario runners: a trajectory is simulated with the diagnostics monitor,
// reduced to named measures, and the measures are checked against
// assertions.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vkns/diagnostics.hpp"
#include "vkns/dynamics.hpp"
#include "vkns/fluid_state.hpp"

namespace vkns {

enum class ScenarioKind {
  conservation,
  energy_inequality,
  density_bounds,
  large_time,
  ratios,
  mollification_ladder
};
std::string to_string(ScenarioKind kind);
ScenarioKind scenario_kind_from_string(const std::string& name);

enum class Comparator { lt, le, gt, ge, finite };
enum class AssertionMode { pass_fail, report_only };

struct Assertion {
  std::string functional;
  Comparator cmp = Comparator::le;
  double threshold = 0.0;
  AssertionMode mode = AssertionMode::pass_fail;
};
// "name <= 0.05", "name finite", optionally followed by "report".
Assertion parse_assertion(const std::string& text);
std::string to_string(const Assertion& a);

struct ScheduleConfig {
  double nu0 = 0.5;
  std::vector<double> epsilons{0.5, 0.2, 0.1, 0.05, 0.01};
  std::vector<double> qs{5, 8, 16, 32, 64};
};

struct ScenarioSpec {
  std::string name = "scenario";
  ScenarioKind kind = ScenarioKind::conservation;
  int n = 64;
  Params params{1.0, 2.0, 2.0};
  InitConfig init;
  StepControl control;
  // Appended to the defaults of the kind.
  std::vector<Assertion> assertions;
  std::vector<double> q_list{4.0, 8.0};
  std::vector<double> p_list{2.0, 4.0};
  ScheduleConfig schedule;
  // Additive slack of the energy inequality, per unit time and unit E0.
  double energy_slack = 1e-6;
  // Density ceiling of the bounds scenario.
  double rho_ceiling = 5.0;
  // Large-time residual fraction and plateau growth limit.
  double decay_fraction = 0.05;
  double plateau_growth = 0.05;
  // Ratio scenario: allowed growth of the second-half sup over the first.
  double half_growth = 0.5;
  // Ladder widths (empty: 8/n, 4/n, 2/n, 1/n) and the allowed final/first gap.
  std::vector<double> widths;
  double ladder_fraction = 0.5;
  unsigned jobs = 1;
  // Extra tendency (test fixtures only).
  Forcing forcing;

  void validate() const;
};

enum class ScenarioStatus { pass, fail, aborted, insufficient_horizon };
std::string to_string(ScenarioStatus status);

struct AssertionOutcome {
  Assertion assertion;
  double value = 0.0;
  bool passed = false;
};

struct Provenance {
  std::string config_hash;
  std::string version;
  std::uint64_t seed = 0;
};

// A monitored trajectory. Samples are the output times of the run.
struct TrajectoryRun {
  std::vector<DiagnosticsRecord> series;
  std::vector<double> rho_deviation;  // |rho - mass0|_2 per sample
  TrajectorySummary summary;
  Monitor::Carry carry;
  double mass0 = 0.0;
  ExponentSchedule schedule;
};

struct ScenarioResult {
  std::string name;
  ScenarioKind kind = ScenarioKind::conservation;
  ScenarioStatus status = ScenarioStatus::fail;
  std::string reason;
  std::vector<AssertionOutcome> outcomes;
  std::map<std::string, double> measures;
  std::vector<DiagnosticsRecord> series;
  Provenance provenance;
  RunStatus run_status = RunStatus::completed;
  long steps = 0;
  // Ladder only: L2 gaps between consecutive rungs and int rho_h^2 per rung.
  std::vector<double> ladder_gaps;
  std::vector<double> ladder_rho_sq;

  bool passed() const { return status == ScenarioStatus::pass; }
};

// Simulates spec from its initial data, or continues `from` (its final
// state, integrals and monitor carry) to spec.control.t_end.
TrajectoryRun run_trajectory(const ScenarioSpec& spec, const TrajectoryRun* from = nullptr);

// Reduces a trajectory with the measures and assertions of spec.kind (not
// the ladder).
ScenarioResult evaluate(const ScenarioSpec& spec, const TrajectoryRun& run);

ScenarioResult run_conservation(const ScenarioSpec& spec);
ScenarioResult run_energy_inequality(const ScenarioSpec& spec);
ScenarioResult run_density_bounds(const ScenarioSpec& spec);
// Requires params.huang_li_regime(); throws std::invalid_argument naming
// the violated inequality otherwise.
ScenarioResult run_large_time(const ScenarioSpec& spec);
ScenarioResult run_logY_and_G_ratios(const ScenarioSpec& spec);
// Requires at least 3 widths.
ScenarioResult run_mollification_ladder(const ScenarioSpec& spec);

// Dispatches on spec.kind.
ScenarioResult run_scenario(const ScenarioSpec& spec);

// Canonical text of every field that influences the result.
std::string fingerprint(const ScenarioSpec& spec);
// 64-bit FNV-1a as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

}  // namespace vkns
