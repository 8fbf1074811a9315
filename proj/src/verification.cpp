#include "vkns/verification.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "vkns/parallel.hpp"
#include "vkns/version.hpp"

namespace vkns {

namespace {

const std::vector<std::string>& trajectory_measure_names() {
  static const std::vector<std::string> names{
      "mass_drift",        "momentum_drift",        "energy_residual_max",
      "energy_step_residual_max", "dissipation_total", "rho_min_inf",
      "rho_max_sup",       "rho_max_half_ratio",    "rho_decay",
      "grad_u_decay",      "pp_integral",           "pp_plateau_growth",
      "ratio_logY_sup",    "ratio_G_sup",           "ratio_logY_half_growth",
      "ratio_G_half_growth", "int_XY",              "final_time"};
  return names;
}

const std::vector<std::string>& ladder_measure_names() {
  static const std::vector<std::string> names{"gaps_strictly_decreasing", "final_gap_fraction",
                                              "first_gap", "final_gap", "rho_sq_defect"};
  return names;
}

bool known_measure(ScenarioKind kind, const std::string& name) {
  const auto& names =
      kind == ScenarioKind::mollification_ladder ? ladder_measure_names() : trajectory_measure_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

Assertion make(const std::string& f, Comparator c, double v,
               AssertionMode m = AssertionMode::pass_fail) {
  return {f, c, v, m};
}

std::vector<Assertion> default_assertions(const ScenarioSpec& s) {
  using C = Comparator;
  const auto report = AssertionMode::report_only;
  switch (s.kind) {
    case ScenarioKind::conservation:
      return {make("mass_drift", C::le, 1e-10), make("momentum_drift", C::le, 1e-10)};
    case ScenarioKind::energy_inequality:
      return {make("energy_residual_max", C::le, 0.0), make("energy_step_residual_max", C::le, 0.0),
              make("dissipation_total", C::finite, 0.0)};
    case ScenarioKind::density_bounds:
      return {make("rho_min_inf", C::gt, 0.0), make("rho_max_sup", C::le, s.rho_ceiling),
              make("rho_max_half_ratio", C::finite, 0.0, report)};
    case ScenarioKind::large_time:
      return {make("rho_decay", C::le, s.decay_fraction),
              make("grad_u_decay", C::le, s.decay_fraction),
              make("pp_integral", C::finite, 0.0),
              make("pp_plateau_growth", C::lt, s.plateau_growth)};
    case ScenarioKind::ratios:
      return {make("ratio_logY_sup", C::finite, 0.0), make("ratio_G_sup", C::finite, 0.0),
              make("ratio_logY_half_growth", C::lt, s.half_growth),
              make("ratio_G_half_growth", C::lt, s.half_growth), make("int_XY", C::finite, 0.0)};
    case ScenarioKind::mollification_ladder:
      return {make("gaps_strictly_decreasing", C::ge, 1.0),
              make("final_gap_fraction", C::le, s.ladder_fraction),
              make("rho_sq_defect", C::finite, 0.0, report)};
  }
  return {};
}

bool holds(Comparator c, double value, double threshold) {
  switch (c) {
    case Comparator::lt: return value < threshold;
    case Comparator::le: return value <= threshold;
    case Comparator::gt: return value > threshold;
    case Comparator::ge: return value >= threshold;
    case Comparator::finite: return std::isfinite(value);
  }
  return false;
}

// (b - a) / a with 0/0 -> 0.
double growth(double first, double second) {
  if (first > 0.0) return second / first - 1.0;
  return second > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

double fraction(double num, double den) {
  if (den > 0.0) return num / den;
  return num > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

std::map<std::string, double> trajectory_measures(const ScenarioSpec& spec,
                                                  const TrajectoryRun& run) {
  std::map<std::string, double> m;
  const auto& S = run.series;
  if (S.empty()) return m;
  const DiagnosticsRecord& first = S.front();
  const DiagnosticsRecord& last = S.back();
  const double E0 = first.energy;
  const double t0 = first.t;
  const double T = last.t;

  double mass_drift = 0.0, mom_drift = 0.0, res = -std::numeric_limits<double>::infinity();
  double step_res = -std::numeric_limits<double>::infinity();
  double rho_min = std::numeric_limits<double>::infinity(), rho_max = 0.0;
  double sup1_rho = 0.0, sup2_rho = 0.0, sup1_logY = 0.0, sup2_logY = 0.0, sup1_G = 0.0,
         sup2_G = 0.0, sup_logY = 0.0, sup_G = 0.0;
  const double mid = t0 + 0.5 * (T - t0);
  auto bump = [](double& sup, double v) { sup = std::max(sup, v); };
  for (std::size_t k = 0; k < S.size(); ++k) {
    const DiagnosticsRecord& r = S[k];
    mass_drift = std::max(mass_drift, std::abs(r.mass - first.mass));
    mom_drift = std::max(mom_drift, std::hypot(r.momentum[0] - first.momentum[0],
                                               r.momentum[1] - first.momentum[1]));
    res = std::max(res, r.energy + r.int_D2 - E0 * (1.0 + spec.energy_slack * r.t));
    if (k > 0) {
      const DiagnosticsRecord& p = S[k - 1];
      step_res = std::max(step_res, r.energy + (r.int_D2 - p.int_D2) - p.energy -
                                        spec.energy_slack * E0 * (r.t - p.t));
    }
    rho_min = std::min(rho_min, r.rho_min);
    rho_max = std::max(rho_max, r.rho_max);
    sup_logY = std::max(sup_logY, r.ratio_logY);
    sup_G = std::max(sup_G, r.ratio_G);
    const bool early = r.t <= mid;
    bump(early ? sup1_rho : sup2_rho, r.rho_max);
    bump(early ? sup1_logY : sup2_logY, r.ratio_logY);
    bump(early ? sup1_G : sup2_G, r.ratio_G);
  }
  if (S.size() < 2) step_res = 0.0;

  m["mass_drift"] = mass_drift;
  m["momentum_drift"] = mom_drift;
  m["energy_residual_max"] = res;
  m["energy_step_residual_max"] = step_res;
  m["dissipation_total"] = last.int_D2;
  m["rho_min_inf"] = rho_min;
  m["rho_max_sup"] = rho_max;
  m["rho_max_half_ratio"] = fraction(sup2_rho, sup1_rho);
  m["rho_decay"] = fraction(run.rho_deviation.back(), run.rho_deviation.front());
  m["grad_u_decay"] = fraction(last.grad_u_L2, first.grad_u_L2);
  m["pp_integral"] = last.int_PP;
  // Growth of int (P - Pbar)^2 dt over [0.9 T, T] relative to its total.
  const double t_late = t0 + 0.9 * (T - t0);
  double at_late = first.int_PP;
  for (const auto& r : S) {
    if (r.t <= t_late + 1e-12) at_late = r.int_PP;
  }
  m["pp_plateau_growth"] = fraction(last.int_PP - at_late, last.int_PP);
  m["ratio_logY_sup"] = sup_logY;
  m["ratio_G_sup"] = sup_G;
  m["ratio_logY_half_growth"] = growth(sup1_logY, sup2_logY);
  m["ratio_G_half_growth"] = growth(sup1_G, sup2_G);
  m["int_XY"] = last.int_XY;
  m["final_time"] = T;
  return m;
}

// Index of the last sample at or before 3/4 of the run.
std::size_t last_quarter_start(const std::vector<DiagnosticsRecord>& S) {
  const double t0 = S.front().t;
  const double cut = t0 + 0.75 * (S.back().t - t0);
  std::size_t idx = 0;
  for (std::size_t k = 0; k < S.size(); ++k)
    if (S[k].t <= cut + 1e-12) idx = k;
  return idx;
}

void finish(ScenarioResult& r, const ScenarioSpec& spec) {
  std::vector<Assertion> all = default_assertions(spec);
  all.insert(all.end(), spec.assertions.begin(), spec.assertions.end());
  std::vector<std::string> failed;
  for (const Assertion& a : all) {
    auto it = r.measures.find(a.functional);
    const double v = it == r.measures.end() ? std::numeric_limits<double>::quiet_NaN() : it->second;
    AssertionOutcome o{a, v, holds(a.cmp, v, a.threshold)};
    if (!o.passed && a.mode == AssertionMode::pass_fail) failed.push_back(a.functional);
    r.outcomes.push_back(o);
  }
  if (r.status == ScenarioStatus::aborted) return;
  if (failed.empty()) {
    r.status = ScenarioStatus::pass;
    return;
  }
  r.status = ScenarioStatus::fail;
  std::string list;
  for (const auto& f : failed) list += (list.empty() ? "" : ", ") + f;
  r.reason = "failed: " + list;
}

Provenance provenance(const ScenarioSpec& spec) {
  return {fnv1a_hex(fingerprint(spec)), kVersion, spec.init.seed};
}

}  // namespace

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::conservation: return "conservation";
    case ScenarioKind::energy_inequality: return "energy-inequality";
    case ScenarioKind::density_bounds: return "density-bounds";
    case ScenarioKind::large_time: return "large-time";
    case ScenarioKind::ratios: return "ratios";
    case ScenarioKind::mollification_ladder: return "mollification-ladder";
  }
  return "unknown";
}

ScenarioKind scenario_kind_from_string(const std::string& name) {
  for (ScenarioKind k : {ScenarioKind::conservation, ScenarioKind::energy_inequality,
                         ScenarioKind::density_bounds, ScenarioKind::large_time,
                         ScenarioKind::ratios, ScenarioKind::mollification_ladder}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown scenario kind '" + name + "'");
}

std::string to_string(ScenarioStatus status) {
  switch (status) {
    case ScenarioStatus::pass: return "pass";
    case ScenarioStatus::fail: return "fail";
    case ScenarioStatus::aborted: return "aborted";
    case ScenarioStatus::insufficient_horizon: return "insufficient-horizon";
  }
  return "unknown";
}

Assertion parse_assertion(const std::string& text) {
  std::istringstream in(text);
  std::string name, op, value, extra;
  in >> name >> op;
  if (name.empty() || op.empty()) throw std::invalid_argument("malformed assertion '" + text + "'");
  Assertion a;
  a.functional = name;
  if (op == "finite") {
    a.cmp = Comparator::finite;
  } else {
    if (op == "<") a.cmp = Comparator::lt;
    else if (op == "<=") a.cmp = Comparator::le;
    else if (op == ">") a.cmp = Comparator::gt;
    else if (op == ">=") a.cmp = Comparator::ge;
    else throw std::invalid_argument("unknown comparator '" + op + "' in assertion '" + text + "'");
    if (!(in >> value)) throw std::invalid_argument("assertion '" + text + "' lacks a threshold");
    std::size_t used = 0;
    try {
      a.threshold = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != value.size())
      throw std::invalid_argument("bad threshold '" + value + "' in assertion '" + text + "'");
  }
  if (in >> extra) {
    if (extra != "report") throw std::invalid_argument("unexpected '" + extra + "' in assertion '" + text + "'");
    a.mode = AssertionMode::report_only;
  }
  return a;
}

std::string to_string(const Assertion& a) {
  std::ostringstream os;
  os << a.functional << ' ';
  switch (a.cmp) {
    case Comparator::lt: os << "< "; break;
    case Comparator::le: os << "<= "; break;
    case Comparator::gt: os << "> "; break;
    case Comparator::ge: os << ">= "; break;
    case Comparator::finite: os << "finite"; break;
  }
  if (a.cmp != Comparator::finite) os << std::setprecision(17) << a.threshold;
  if (a.mode == AssertionMode::report_only) os << " report";
  return os.str();
}

void ScenarioSpec::validate() const {
  if (n < 8 || n % 2 != 0) throw std::invalid_argument("grid size must be even and >= 8");
  control.validate();
  if (q_list.empty() || p_list.empty()) throw std::invalid_argument("q and p lists must be non-empty");
  for (const Assertion& a : assertions) {
    if (!known_measure(kind, a.functional))
      throw std::invalid_argument("assertion references unknown functional '" + a.functional + "'");
  }
  if (kind == ScenarioKind::mollification_ladder && !widths.empty() && widths.size() < 3)
    throw std::invalid_argument("mollification ladder needs at least 3 rungs, got " +
                                std::to_string(widths.size()));
}

TrajectoryRun run_trajectory(const ScenarioSpec& spec, const TrajectoryRun* from) {
  spec.validate();
  if (from && from->summary.status != RunStatus::completed)
    throw std::invalid_argument("cannot continue an aborted trajectory");
  std::vector<DiagnosticsRecord> series = from ? from->series : std::vector<DiagnosticsRecord>{};
  std::vector<double> deviation = from ? from->rho_deviation : std::vector<double>{};
  const ExponentSchedule schedule = ExponentSchedule::search(
      spec.params, spec.schedule.nu0, spec.schedule.epsilons, spec.schedule.qs);
  Monitor monitor(spec.params, MonitorConfig{spec.q_list, spec.p_list, schedule});
  FluidState init = from ? from->summary.final_state : make_initial_state(Grid(spec.n), spec.init);
  if (from) monitor.restore(from->carry);
  const double mass0 = from ? from->mass0 : mass(init);

  auto observer = [&](const FluidState& s, const TrajectoryIntegrals& integrals) {
    series.push_back(monitor.observe(s, integrals));
    RealField dev = s.rho;
    dev += -mass0;
    deviation.push_back(lp_norm(dev, 2.0));
  };
  SimulateOptions opts;
  opts.forcing = spec.forcing;
  if (from) {
    opts.start = from->summary.integrals;
    opts.resumed = true;
  }
  TrajectorySummary summary = simulate(init, spec.params, spec.control, observer, opts);
  if (from) summary.steps += from->summary.steps;
  return TrajectoryRun{std::move(series), std::move(deviation), std::move(summary),
                       monitor.carry(), mass0, schedule};
}

ScenarioResult evaluate(const ScenarioSpec& spec, const TrajectoryRun& run) {
  if (spec.kind == ScenarioKind::mollification_ladder)
    throw std::invalid_argument("the mollification ladder is not a single trajectory");
  ScenarioResult r;
  r.name = spec.name;
  r.kind = spec.kind;
  r.series = run.series;
  r.provenance = provenance(spec);
  r.run_status = run.summary.status;
  r.steps = run.summary.steps;
  r.measures = trajectory_measures(spec, run);
  if (run.summary.status != RunStatus::completed) {
    r.status = ScenarioStatus::aborted;
    r.reason = to_string(run.summary.status) + ": " + run.summary.reason;
  }
  finish(r, spec);

  if (spec.kind == ScenarioKind::large_time && r.status == ScenarioStatus::fail &&
      !run.series.empty()) {
    // Decay or plateau thresholds missed while the norms still decrease: the
    // horizon is too short rather than the decay absent.
    bool only_decay = true;
    for (const auto& o : r.outcomes) {
      if (o.passed || o.assertion.mode == AssertionMode::report_only) continue;
      const std::string& f = o.assertion.functional;
      if (f != "rho_decay" && f != "grad_u_decay" && f != "pp_plateau_growth") only_decay = false;
    }
    const std::size_t q = last_quarter_start(run.series);
    const bool decreasing = run.rho_deviation.back() <= run.rho_deviation[q] &&
                            run.series.back().grad_u_L2 <= run.series[q].grad_u_L2 &&
                            (run.rho_deviation.back() < run.rho_deviation[q] ||
                             run.series.back().grad_u_L2 < run.series[q].grad_u_L2);
    if (only_decay && decreasing) {
      r.status = ScenarioStatus::insufficient_horizon;
      r.reason = "insufficient horizon: decay thresholds not met at t = " +
                 std::to_string(run.series.back().t) + " while norms still decrease";
    }
  }
  return r;
}

ScenarioResult run_conservation(const ScenarioSpec& spec) {
  ScenarioSpec s = spec;
  s.kind = ScenarioKind::conservation;
  return evaluate(s, run_trajectory(s));
}

ScenarioResult run_energy_inequality(const ScenarioSpec& spec) {
  ScenarioSpec s = spec;
  s.kind = ScenarioKind::energy_inequality;
  return evaluate(s, run_trajectory(s));
}

ScenarioResult run_density_bounds(const ScenarioSpec& spec) {
  ScenarioSpec s = spec;
  s.kind = ScenarioKind::density_bounds;
  return evaluate(s, run_trajectory(s));
}

ScenarioResult run_large_time(const ScenarioSpec& spec) {
  const Params& p = spec.params;
  if (!(p.beta() > 1.5))
    throw std::invalid_argument("large-time scenario requires beta > 3/2 (beta = " +
                                std::to_string(p.beta()) + ")");
  if (!(p.gamma() < 4.0 * p.beta() - 3.0))
    throw std::invalid_argument("large-time scenario requires gamma < 4 beta - 3 (gamma = " +
                                std::to_string(p.gamma()) + ", 4 beta - 3 = " +
                                std::to_string(4.0 * p.beta() - 3.0) + ")");
  ScenarioSpec s = spec;
  s.kind = ScenarioKind::large_time;
  return evaluate(s, run_trajectory(s));
}

ScenarioResult run_logY_and_G_ratios(const ScenarioSpec& spec) {
  ScenarioSpec s = spec;
  s.kind = ScenarioKind::ratios;
  return evaluate(s, run_trajectory(s));
}

ScenarioResult run_mollification_ladder(const ScenarioSpec& spec) {
  ScenarioSpec s = spec;
  s.kind = ScenarioKind::mollification_ladder;
  if (s.widths.empty()) {
    const double h0 = 8.0 / s.n;
    s.widths = {h0, h0 / 2.0, h0 / 4.0, h0 / 8.0};
  }
  s.validate();

  const std::size_t rungs = s.widths.size();
  std::vector<std::optional<TrajectoryRun>> slots(rungs);
  parallel_for(static_cast<int>(rungs), s.jobs, [&](int k) {
    ScenarioSpec rung = s;
    rung.kind = ScenarioKind::conservation;
    rung.assertions.clear();
    rung.init.kind = InitKind::mollified_target;
    rung.init.mollify_width = s.widths[static_cast<std::size_t>(k)];
    slots[static_cast<std::size_t>(k)] = run_trajectory(rung);
  });
  std::vector<TrajectoryRun> runs;
  for (auto& slot : slots) runs.push_back(std::move(*slot));

  ScenarioResult r;
  r.name = s.name;
  r.kind = s.kind;
  r.provenance = provenance(s);
  r.series = runs.back().series;
  for (const auto& run : runs) {
    r.steps += run.summary.steps;
    if (run.summary.status != RunStatus::completed && r.status != ScenarioStatus::aborted) {
      r.status = ScenarioStatus::aborted;
      r.run_status = run.summary.status;
      r.reason = to_string(run.summary.status) + ": " + run.summary.reason;
    }
  }
  if (r.status != ScenarioStatus::aborted) {
    for (std::size_t k = 0; k < rungs; ++k) {
      const RealField& rho = runs[k].summary.final_state.rho;
      r.ladder_rho_sq.push_back(integral(rho * rho));
      if (k + 1 < rungs)
        r.ladder_gaps.push_back(lp_norm(rho - runs[k + 1].summary.final_state.rho, 2.0));
    }
    bool decreasing = true;
    for (std::size_t k = 1; k < r.ladder_gaps.size(); ++k)
      decreasing = decreasing && r.ladder_gaps[k] < r.ladder_gaps[k - 1];
    r.measures["gaps_strictly_decreasing"] = decreasing ? 1.0 : 0.0;
    r.measures["first_gap"] = r.ladder_gaps.front();
    r.measures["final_gap"] = r.ladder_gaps.back();
    r.measures["final_gap_fraction"] = fraction(r.ladder_gaps.back(), r.ladder_gaps.front());
    r.measures["rho_sq_defect"] = r.ladder_rho_sq.front() - r.ladder_rho_sq.back();
  }
  finish(r, s);
  return r;
}

ScenarioResult run_scenario(const ScenarioSpec& spec) {
  switch (spec.kind) {
    case ScenarioKind::conservation: return run_conservation(spec);
    case ScenarioKind::energy_inequality: return run_energy_inequality(spec);
    case ScenarioKind::density_bounds: return run_density_bounds(spec);
    case ScenarioKind::large_time: return run_large_time(spec);
    case ScenarioKind::ratios: return run_logY_and_G_ratios(spec);
    case ScenarioKind::mollification_ladder: return run_mollification_ladder(spec);
  }
  throw std::invalid_argument("unknown scenario kind");
}

std::string fingerprint(const ScenarioSpec& s) {
  std::ostringstream os;
  os << std::setprecision(17);
  auto list = [&](const char* key, const std::vector<double>& v) {
    os << key << '=';
    for (double x : v) os << x << ',';
    os << '\n';
  };
  os << "name=" << s.name << "\nkind=" << to_string(s.kind) << "\nn=" << s.n << "\nmu="
     << s.params.mu() << "\nbeta=" << s.params.beta() << "\ngamma=" << s.params.gamma() << '\n';
  const InitConfig& i = s.init;
  os << "init=" << to_string(i.kind) << ',' << i.seed << ',' << i.density_mean << ','
     << i.density_amplitude << ',' << i.velocity_amplitude << ',' << i.band << ',' << i.mode << ','
     << i.mollify_width << ',' << i.roughness_slope << ',' << i.bound_min << ',' << i.bound_max
     << '\n';
  const StepControl& c = s.control;
  os << "time=" << c.cfl << ',' << c.dt_max << ',' << c.t_end << ',' << c.output_interval << '\n';
  for (const Assertion& a : s.assertions) os << "assert=" << to_string(a) << '\n';
  list("q", s.q_list);
  list("p", s.p_list);
  os << "nu0=" << s.schedule.nu0 << '\n';
  list("epsilons", s.schedule.epsilons);
  list("qs", s.schedule.qs);
  os << "slack=" << s.energy_slack << "\nceiling=" << s.rho_ceiling << "\ndecay=" << s.decay_fraction
     << "\nplateau=" << s.plateau_growth << "\nhalf=" << s.half_growth
     << "\nladder=" << s.ladder_fraction << '\n';
  list("widths", s.widths);
  os << "forcing=" << (s.forcing ? 1 : 0) << '\n';
  return os.str();
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace vkns
