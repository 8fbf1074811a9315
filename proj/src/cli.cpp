#include "vkns/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "vkns/inequality_lab.hpp"
#include "vkns/io.hpp"
#include "vkns/parallel.hpp"
#include "vkns/verification.hpp"
#include "vkns/version.hpp"

namespace vkns::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct Manifest {
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string start_time;
  std::vector<std::string> outputs;
  std::string status;
  std::string reason;
  json extra = json::object();

  void write(const fs::path& dir) const {
    json j;
    j["command"] = command;
    j["version"] = kVersion;
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    j["start_time"] = start_time;
    j["end_time"] = io::utc_now();
    j["status"] = status;
    j["reason"] = reason;
    j["outputs"] = outputs;
    for (const auto& [k, v] : extra.items()) j[k] = v;
    io::write_atomic(dir / "manifest.json", j.dump(2) + "\n");
  }
};

bool prepare_dir(const fs::path& dir, std::ostream& err) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    err << "error: cannot create output directory '" << dir.string() << "': " << ec.message() << "\n";
    return false;
  }
  return true;
}

std::string snapshot_name(double t, double interval) {
  std::ostringstream os;
  os << "snapshot_" << std::setw(6) << std::setfill('0') << std::llround(t / interval) << ".bin";
  return os.str();
}

struct DriveInput {
  FluidState init;
  Params params;
  StepControl control;
  MonitorConfig monitor;
  std::optional<Monitor::Carry> carry;
  TrajectoryIntegrals start;
  bool resumed = false;
  long steps_before = 0;
  int snapshot_every = 0;
  bool checkpoint = true;
};

// Runs the monitored trajectory, writing the CSV, snapshots and the final
// checkpoint into dir. Returns the exit code.
int drive(const DriveInput& in, Manifest& manifest, const fs::path& dir, std::ostream& out) {
  Monitor monitor(in.params, in.monitor);
  if (in.carry) monitor.restore(*in.carry);
  io::CsvWriter csv(dir / "timeseries.csv", csv_header(in.monitor));
  long rows = 0;
  std::vector<std::string> snapshots;
  auto observer = [&](const FluidState& s, const TrajectoryIntegrals& integrals) {
    csv.row(csv_row(monitor.observe(s, integrals)));
    if (in.snapshot_every > 0 && rows % in.snapshot_every == 0) {
      const std::string name = snapshot_name(s.t, in.control.output_interval);
      io::write_snapshot(dir / name, s);
      snapshots.push_back(name);
    }
    ++rows;
  };
  SimulateOptions opts;
  opts.start = in.start;
  opts.resumed = in.resumed;
  TrajectorySummary summary = simulate(in.init, in.params, in.control, observer, opts);
  csv.close();
  summary.steps += in.steps_before;

  manifest.outputs.push_back("timeseries.csv");
  manifest.outputs.insert(manifest.outputs.end(), snapshots.begin(), snapshots.end());
  if (summary.status == RunStatus::completed && in.checkpoint) {
    const ExponentSchedule& sched = in.monitor.schedule;
    io::Checkpoint c{summary.final_state, in.params,        in.control,     summary.integrals,
                     monitor.carry(),     in.monitor.q_list, in.monitor.p_list, sched.epsilon,
                     sched.q,             sched.nu0,         manifest.seed,  summary.steps,
                     manifest.config_hash};
    io::write_checkpoint(dir / "checkpoint.bin", c);
    manifest.outputs.push_back("checkpoint.bin");
  }
  manifest.status = to_string(summary.status);
  manifest.reason = summary.reason;
  manifest.extra["steps"] = summary.steps;
  manifest.extra["t_final"] = summary.final_state.t;
  manifest.extra["rows"] = rows;
  manifest.write(dir);

  out << manifest.command << ": " << manifest.status << " at t = " << summary.final_state.t
      << " after " << summary.steps << " steps, " << rows << " rows -> " << (dir / "timeseries.csv").string()
      << "\n";
  if (!summary.reason.empty()) out << "  reason: " << summary.reason << "\n";
  return summary.status == RunStatus::completed ? ExitCode::ok : ExitCode::aborted;
}

json measures_json(const std::map<std::string, double>& m) {
  json j = json::object();
  for (const auto& [k, v] : m) j[k] = std::isfinite(v) ? json(v) : json(io::format_double(v));
  return j;
}

}  // namespace

fs::path resolve_out_dir(const std::string& flag, const std::string& from_config) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("VKNS2D_OUT_DIR"); env && *env) {
    return from_config.empty() ? fs::path(env) : fs::path(env) / from_config;
  }
  if (!from_config.empty()) return from_config;
  return "vkns2d_out";
}

int cmd_simulate(const CommonOptions& opts, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = load_config(opts.config, opts.overrides);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return ExitCode::config_error;
  }
  const fs::path dir = resolve_out_dir(opts.out_dir, cfg.output.dir);
  if (!prepare_dir(dir, err)) return ExitCode::config_error;

  Manifest manifest;
  manifest.command = "simulate";
  manifest.config_hash = cfg.hash();
  manifest.seed = cfg.init.seed;
  manifest.start_time = io::utc_now();
  std::optional<FluidState> init;
  try {
    init = make_initial_state(Grid(cfg.n), cfg.init);
  } catch (const std::exception& e) {
    err << "config error: initial data: " << e.what() << "\n";
    return ExitCode::config_error;
  }
  DriveInput in{*init,  cfg.params, cfg.control, cfg.monitor_config(), std::nullopt,
                {},     false,      0,           cfg.output.snapshot_every, cfg.output.checkpoint};
  return drive(in, manifest, dir, out);
}

int cmd_resume(const std::string& checkpoint, std::optional<double> t_end,
               const CommonOptions& opts, std::ostream& out, std::ostream& err) {
  std::optional<io::Checkpoint> c;
  try {
    c = io::read_checkpoint(checkpoint);
  } catch (const std::exception& e) {
    err << "error: cannot restore checkpoint: " << e.what() << "\n";
    return ExitCode::config_error;
  }
  StepControl ctl = c->control;
  if (t_end) ctl.t_end = *t_end;
  try {
    ctl.validate();
  } catch (const std::invalid_argument& e) {
    err << "config error: --t-end: " << e.what() << "\n";
    return ExitCode::config_error;
  }
  const fs::path dir = resolve_out_dir(opts.out_dir, "");
  if (!prepare_dir(dir, err)) return ExitCode::config_error;

  Manifest manifest;
  manifest.command = "resume";
  manifest.config_hash = c->config_hash;
  manifest.seed = c->seed;
  manifest.start_time = io::utc_now();
  manifest.extra["resumed_from"] = checkpoint;
  manifest.extra["resumed_at"] = c->state.t;

  const ExponentSchedule sched =
      ExponentSchedule::compute(c->params, c->schedule_epsilon, c->schedule_q, c->schedule_nu0);
  const int every = opts.overrides.snapshot_every.value_or(0);
  DriveInput in{c->state, c->params, ctl,     MonitorConfig{c->q_list, c->p_list, sched},
                c->carry, c->integrals, true, c->steps,
                every,    true};
  return drive(in, manifest, dir, out);
}

int cmd_verify(const CommonOptions& opts, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = load_config(opts.config, opts.overrides);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return ExitCode::config_error;
  }
  if (cfg.scenarios.empty()) {
    err << "config error: " << opts.config << ": no [scenario.<name>] tables\n";
    return ExitCode::config_error;
  }
  const fs::path dir = resolve_out_dir(opts.out_dir, cfg.output.dir);
  if (!prepare_dir(dir, err)) return ExitCode::config_error;

  Manifest manifest;
  manifest.command = "verify";
  manifest.config_hash = cfg.hash();
  manifest.seed = cfg.init.seed;
  manifest.start_time = io::utc_now();

  const std::size_t count = cfg.scenarios.size();
  std::vector<std::optional<ScenarioResult>> results(count);
  std::vector<std::string> errors(count);
  parallel_for(static_cast<int>(count), opts.overrides.jobs.value_or(1), [&](int k) {
    const auto i = static_cast<std::size_t>(k);
    try {
      results[i] = run_scenario(cfg.scenarios[i]);
    } catch (const std::invalid_argument& e) {
      errors[i] = e.what();
    }
  });

  int code = ExitCode::ok;
  json summary = json::array();
  out << std::left << std::setw(24) << "scenario" << std::setw(36) << "assertion" << std::setw(26)
      << "value" << std::setw(12) << "mode" << "result\n";
  for (std::size_t i = 0; i < count; ++i) {
    const ScenarioSpec& spec = cfg.scenarios[i];
    json js;
    js["name"] = spec.name;
    js["kind"] = to_string(spec.kind);
    if (!results[i]) {
      out << std::setw(24) << spec.name << "precondition error: " << errors[i] << "\n";
      js["status"] = "error";
      js["reason"] = errors[i];
      summary.push_back(js);
      code = ExitCode::config_error;
      continue;
    }
    const ScenarioResult& r = *results[i];
    for (const AssertionOutcome& o : r.outcomes) {
      out << std::setw(24) << spec.name << std::setw(35) << to_string(o.assertion) << ' '
          << std::setw(26) << io::format_double(o.value) << std::setw(12)
          << (o.assertion.mode == AssertionMode::pass_fail ? "pass/fail" : "report")
          << (o.passed ? "ok" : "FAILED") << "\n";
    }
    out << std::setw(24) << spec.name << "status: " << to_string(r.status)
        << (r.reason.empty() ? "" : " (" + r.reason + ")") << "\n";

    const std::string csv_name = spec.name + ".csv";
    {
      io::CsvWriter csv(dir / csv_name,
                        csv_header(MonitorConfig{spec.q_list, spec.p_list, ExponentSchedule{}}));
      for (const auto& rec : r.series) csv.row(csv_row(rec));
      csv.close();
    }
    manifest.outputs.push_back(csv_name);

    js["status"] = to_string(r.status);
    js["reason"] = r.reason;
    js["config_hash"] = r.provenance.config_hash;
    js["version"] = r.provenance.version;
    js["seed"] = r.provenance.seed;
    js["steps"] = r.steps;
    js["measures"] = measures_json(r.measures);
    json outcomes = json::array();
    for (const auto& o : r.outcomes) {
      outcomes.push_back({{"assertion", to_string(o.assertion)},
                          {"value", std::isfinite(o.value) ? json(o.value) : json(io::format_double(o.value))},
                          {"passed", o.passed}});
    }
    js["outcomes"] = outcomes;
    if (!r.ladder_gaps.empty()) {
      js["ladder_gaps"] = r.ladder_gaps;
      js["ladder_rho_sq"] = r.ladder_rho_sq;
    }
    summary.push_back(js);

    if (code == ExitCode::config_error) continue;
    if (r.status == ScenarioStatus::aborted) code = ExitCode::aborted;
    else if (r.status != ScenarioStatus::pass && code == ExitCode::ok) code = ExitCode::checks_failed;
  }
  io::write_atomic(dir / "verify_summary.json", summary.dump(2) + "\n");
  manifest.outputs.push_back("verify_summary.json");
  manifest.status = code == ExitCode::ok ? "pass" : "fail";
  manifest.write(dir);
  return code;
}

int cmd_ineq_lab(const CommonOptions& opts, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = load_config(opts.config, opts.overrides);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return ExitCode::config_error;
  }
  const fs::path dir = resolve_out_dir(opts.out_dir, cfg.output.dir);
  if (!prepare_dir(dir, err)) return ExitCode::config_error;

  Manifest manifest;
  manifest.command = "ineq-lab";
  manifest.config_hash = cfg.hash();
  manifest.seed = cfg.lab.seed;
  manifest.start_time = io::utc_now();

  const lab::LabResult result = lab::run_lab(cfg.lab);
  {
    io::CsvWriter csv(dir / "ratio_reports.csv", lab::report_header());
    for (const auto& s : result.sweeps) {
      csv.row(lab::report_row(s.base));
      csv.row(lab::report_row(s.doubled));
    }
    csv.close();
  }
  {
    io::CsvWriter csv(dir / "lab_checks.csv", {"check", "value", "expected", "passed", "mode"});
    for (const auto& c : result.checks) {
      csv.row(std::vector<std::string>{c.name, io::format_double(c.value), io::format_double(c.expected),
                                       c.passed ? "true" : "false", c.report_only ? "report" : "pass/fail"});
    }
    csv.close();
  }
  manifest.outputs = {"ratio_reports.csv", "lab_checks.csv"};

  out << std::left;
  for (const auto& s : result.sweeps) {
    out << std::setw(22) << s.base.inequality << std::setw(30) << s.base.parameters << " sup "
        << std::setw(24) << io::format_double(s.doubled.sup) << " drift " << std::setw(24)
        << io::format_double(s.drift) << (s.passed() ? "ok" : "FAILED") << "\n";
  }
  for (const auto& c : result.checks) {
    out << std::setw(40) << c.name << std::setw(24) << io::format_double(c.value)
        << (c.report_only ? "report" : (c.passed ? "ok" : "FAILED")) << "\n";
  }
  out << "trudinger c1 = " << result.trudinger_c1 << ", c2 = " << result.trudinger_c2 << "\n";

  manifest.status = result.passed() ? "pass" : "fail";
  manifest.extra["gns_spread"] = result.gns_spread;
  manifest.extra["trudinger_c1"] = result.trudinger_c1;
  manifest.extra["trudinger_c2"] = result.trudinger_c2;
  manifest.write(dir);
  return result.passed() ? ExitCode::ok : ExitCode::checks_failed;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"vkns2d: compressible Navier-Stokes with density-dependent bulk viscosity on the "
               "periodic unit square"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  CommonOptions common;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  int snapshot_every = 0;
  std::string checkpoint;
  double t_end = 0.0;

  std::vector<CLI::Option*> seed_opts, jobs_opts, snap_opts;
  auto add_common = [&](CLI::App* sub, bool with_config) {
    if (with_config) sub->add_option("--config", common.config, "TOML configuration file")->required();
    sub->add_option("--out-dir", common.out_dir, "output directory (default: $VKNS2D_OUT_DIR)");
    seed_opts.push_back(sub->add_option("--seed", seed, "override the random seed"));
    jobs_opts.push_back(sub->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber));
    snap_opts.push_back(
        sub->add_option("--snapshot-every", snapshot_every, "write a snapshot every k output samples")
            ->check(CLI::NonNegativeNumber));
  };
  CLI::App* sim = app.add_subcommand("simulate", "run a trajectory and write diagnostics");
  add_common(sim, true);
  CLI::App* ver = app.add_subcommand("verify", "run the [scenario.*] checks of a config");
  add_common(ver, true);
  CLI::App* lab_cmd = app.add_subcommand("ineq-lab", "run the inequality sweeps of a config");
  add_common(lab_cmd, true);
  CLI::App* res = app.add_subcommand("resume", "continue a checkpoint");
  add_common(res, false);
  res->add_option("checkpoint", checkpoint, "checkpoint file")->required();
  CLI::Option* t_end_opt = res->add_option("--t-end", t_end, "new final time");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ExitCode::ok : ExitCode::config_error;
  }
  auto given = [](const std::vector<CLI::Option*>& v) {
    for (auto* o : v)
      if (o->count()) return true;
    return false;
  };
  if (given(seed_opts)) common.overrides.seed = seed;
  if (given(jobs_opts)) common.overrides.jobs = jobs;
  if (given(snap_opts)) common.overrides.snapshot_every = snapshot_every;

  try {
    if (sim->parsed()) return cmd_simulate(common, out, err);
    if (ver->parsed()) return cmd_verify(common, out, err);
    if (lab_cmd->parsed()) return cmd_ineq_lab(common, out, err);
    std::optional<double> te;
    if (t_end_opt->count()) te = t_end;
    return cmd_resume(checkpoint, te, common, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return ExitCode::aborted;
  }
}

}  // namespace vkns::cli
