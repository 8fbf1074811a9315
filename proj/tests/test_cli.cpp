#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "vkns/cli.hpp"
#include "vkns/diagnostics.hpp"
#include "vkns/io.hpp"

using namespace vkns;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "vkns2d");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path workdir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / "vkns_cli_tests" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

fs::path write(const fs::path& p, const std::string& text) {
  io::write_atomic(p, text);
  return p;
}

std::vector<std::vector<double>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json manifest(const fs::path& dir) { return nlohmann::json::parse(io::read_file(dir / "manifest.json")); }

const char* kRest = R"([grid]
n = 16
[init]
kind = "constant-plus-mode"
density_amplitude = 0.0
velocity_amplitude = 0.0
[time]
t_end = 1.0
output_interval = 0.25
)";

const char* kPerturbed = R"([grid]
n = 16
[init]
seed = 4
[time]
t_end = 2.0
output_interval = 0.25
[output]
snapshot_every = 4
)";

}  // namespace

TEST_CASE("simulate a rest state") {
  const fs::path d = workdir("rest");
  const fs::path cfg = write(d / "rest.toml", kRest);
  const Outcome o = run_cli({"simulate", "--config", cfg.string(), "--out-dir", (d / "out").string()});
  CHECK(o.code == 0);
  const auto rows = read_csv(d / "out" / "timeseries.csv");
  CHECK(rows.size() == 5);  // floor(1 / 0.25) + 1
  const auto m = manifest(d / "out");
  CHECK(m["status"] == "completed");
  CHECK(m["command"] == "simulate");
  CHECK(m["config_hash"].get<std::string>().size() == 16);
  for (const auto& f : m["outputs"]) CHECK(fs::exists(d / "out" / f.get<std::string>()));
  CHECK(fs::exists(d / "out" / "checkpoint.bin"));
}

TEST_CASE("csv columns follow the fixed order") {
  const fs::path d = workdir("columns");
  const fs::path cfg = write(d / "rest.toml", std::string(kRest) + "[output]\nq_list = [4, 8]\np_list = [2]\n");
  REQUIRE(run_cli({"simulate", "--config", cfg.string(), "--out-dir", d.string()}).code == 0);
  std::ifstream in(d / "timeseries.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header.rfind("t,mass,mom_x,mom_y,energy,D2,Y2,X2,rho_min,rho_max,rho_hat,grad_u_L2,B_L2,B_bar,"
                     "P_bar,G_Linf,theta_min,u_mean_x,u_mean_y,ratio_logY,ratio_G,grad_u_Lq_4,grad_u_Lq_8,"
                     "rho_Lp_2,",
                     0) == 0);
}

TEST_CASE("config errors exit with 1") {
  const fs::path d = workdir("errors");
  Outcome o = run_cli({"simulate", "--config", (d / "missing.toml").string()});
  CHECK(o.code == 1);
  CHECK(o.err.find("missing.toml") != std::string::npos);
  const fs::path bad = write(d / "bad.toml", "[grid]\nsize = 16\n");
  o = run_cli({"simulate", "--config", bad.string(), "--out-dir", d.string()});
  CHECK(o.code == 1);
  CHECK(o.err.find("size") != std::string::npos);
  CHECK(run_cli({"simulate"}).code == 1);
  CHECK(run_cli({"launch"}).code == 1);
  CHECK(run_cli({"--version"}).code == 0);
}

TEST_CASE("vacuum-adjacent stress run aborts with 2") {
  const fs::path d = workdir("stress");
  const fs::path cfg = write(d / "stress.toml", R"([grid]
n = 16
[init]
kind = "constant-plus-mode"
density_amplitude = 0.99
velocity_amplitude = 40.0
bound_min = 1e-6
[time]
t_end = 0.5
output_interval = 0.01
)");
  const Outcome o = run_cli({"simulate", "--config", cfg.string(), "--out-dir", d.string()});
  CHECK(o.code == 2);
  const auto m = manifest(d);
  CHECK(m["status"] == "vacuum-breach");
  CHECK(m["reason"].get<std::string>().find("vacuum") != std::string::npos);
  CHECK_FALSE(fs::exists(d / "checkpoint.bin"));
}

TEST_CASE("same config and seed give byte-identical csv") {
  const fs::path d = workdir("determinism");
  const fs::path cfg = write(d / "p.toml", kPerturbed);
  REQUIRE(run_cli({"simulate", "--config", cfg.string(), "--out-dir", (d / "a").string()}).code == 0);
  REQUIRE(run_cli({"simulate", "--config", cfg.string(), "--out-dir", (d / "b").string()}).code == 0);
  CHECK(io::read_file(d / "a" / "timeseries.csv") == io::read_file(d / "b" / "timeseries.csv"));
  REQUIRE(run_cli({"simulate", "--config", cfg.string(), "--seed", "5", "--out-dir", (d / "c").string()}).code ==
          0);
  CHECK(io::read_file(d / "a" / "timeseries.csv") != io::read_file(d / "c" / "timeseries.csv"));
  CHECK(manifest(d / "c")["seed"] == 5);
  // Snapshots at samples 0, 4, 8
  CHECK(fs::exists(d / "a" / "snapshot_000000.bin"));
  CHECK(fs::exists(d / "a" / "snapshot_000004.bin"));
  CHECK(fs::exists(d / "a" / "snapshot_000008.bin"));
  CHECK(io::read_snapshot(d / "a" / "snapshot_000008.bin").t == 2.0);
}

TEST_CASE("resume matches a straight run") {
  const fs::path d = workdir("resume");
  const fs::path full = write(d / "full.toml", kPerturbed);
  std::string half_text = kPerturbed;
  half_text.replace(half_text.find("t_end = 2.0"), 11, "t_end = 1.0");
  const fs::path half = write(d / "half.toml", half_text);
  REQUIRE(run_cli({"simulate", "--config", full.string(), "--out-dir", (d / "straight").string()}).code == 0);
  REQUIRE(run_cli({"simulate", "--config", half.string(), "--out-dir", (d / "first").string()}).code == 0);
  const Outcome o = run_cli({"resume", (d / "first" / "checkpoint.bin").string(), "--t-end", "2.0", "--out-dir",
                             (d / "second").string()});
  REQUIRE(o.code == 0);
  const auto straight = read_csv(d / "straight" / "timeseries.csv");
  const auto first = read_csv(d / "first" / "timeseries.csv");
  const auto second = read_csv(d / "second" / "timeseries.csv");
  REQUIRE(first.size() + second.size() == straight.size());
  double worst = 0.0;
  for (std::size_t k = 0; k < second.size(); ++k) {
    const auto& a = second[k];
    const auto& b = straight[first.size() + k];
    REQUIRE(a.size() == b.size());
    for (std::size_t c = 0; c < a.size(); ++c) worst = std::max(worst, std::abs(a[c] - b[c]) / std::max(1.0, std::abs(b[c])));
  }
  CHECK(worst <= 1e-12);
  const auto m = manifest(d / "second");
  CHECK(m["command"] == "resume");
  CHECK(m["resumed_at"] == 1.0);
  CHECK(m["steps"] == manifest(d / "straight")["steps"]);
}

TEST_CASE("resume rejects a corrupted checkpoint") {
  const fs::path d = workdir("corrupt");
  const fs::path p = write(d / "x.bin", "NOTACHECKPOINT");
  const Outcome o = run_cli({"resume", p.string(), "--out-dir", d.string()});
  CHECK(o.code == 1);
  CHECK(o.err.find("magic") != std::string::npos);
  CHECK_FALSE(fs::exists(d / "manifest.json"));
}

TEST_CASE("verify exit codes") {
  const fs::path d = workdir("verify");
  const std::string base = "[grid]\nn = 16\n[time]\nt_end = 0.1\noutput_interval = 0.05\n";
  const fs::path ok = write(d / "ok.toml", base + "[scenario.cons]\nkind = \"conservation\"\n");
  Outcome o = run_cli({"verify", "--config", ok.string(), "--out-dir", (d / "ok").string()});
  CHECK(o.code == 0);
  CHECK(o.out.find("mass_drift") != std::string::npos);
  CHECK(fs::exists(d / "ok" / "cons.csv"));
  const auto summary = nlohmann::json::parse(io::read_file(d / "ok" / "verify_summary.json"));
  CHECK(summary[0]["status"] == "pass");

  const fs::path bad = write(d / "bad.toml", base + "[scenario.tight]\nkind = \"conservation\"\n"
                                                     "assertions = [\"dissipation_total <= 0\"]\n");
  o = run_cli({"verify", "--config", bad.string(), "--out-dir", (d / "bad").string()});
  CHECK(o.code == 3);
  CHECK(o.out.find("FAILED") != std::string::npos);

  const fs::path pre = write(d / "pre.toml", base + "[scenario.lt]\nkind = \"large-time\"\nbeta = 1.2\n");
  o = run_cli({"verify", "--config", pre.string(), "--out-dir", (d / "pre").string()});
  CHECK(o.code == 1);
  CHECK(o.out.find("beta > 3/2") != std::string::npos);

  const fs::path none = write(d / "none.toml", base);
  CHECK(run_cli({"verify", "--config", none.string(), "--out-dir", d.string()}).code == 1);
}

TEST_CASE("ineq-lab writes reports") {
  const fs::path d = workdir("lab");
  const fs::path cfg = write(d / "lab.toml", R"([lab]
n = 32
band = 6
samples = 30
commutator_samples = 10
gns_bands = [4, 8]
stability_tolerance = 10.0
trudinger_tolerance = 10.0
gns_spread_limit = 100.0
)");
  const Outcome o = run_cli({"ineq-lab", "--config", cfg.string(), "--out-dir", d.string(), "--jobs", "2"});
  CHECK(o.code == 0);
  const std::string reports = io::read_file(d / "ratio_reports.csv");
  CHECK(reports.rfind("inequality,parameters,samples,sup,mean,argmax_seed\n", 0) == 0);
  CHECK(reports.find("gns,q=64,60,") != std::string::npos);
  CHECK(fs::exists(d / "lab_checks.csv"));
  CHECK(manifest(d)["status"] == "pass");

  const fs::path strict = write(d / "strict.toml", R"([lab]
n = 32
band = 6
samples = 30
commutator_samples = 10
gns_bands = [4]
gns_spread_limit = 1.0
)");
  CHECK(run_cli({"ineq-lab", "--config", strict.string(), "--out-dir", (d / "s").string()}).code == 3);
}

TEST_CASE("output directory resolution") {
  CHECK(cli::resolve_out_dir("flag", "cfg") == fs::path("flag"));
  unsetenv("VKNS2D_OUT_DIR");
  CHECK(cli::resolve_out_dir("", "cfg") == fs::path("cfg"));
  CHECK(cli::resolve_out_dir("", "") == fs::path("vkns2d_out"));
  setenv("VKNS2D_OUT_DIR", "/tmp/root", 1);
  CHECK(cli::resolve_out_dir("", "cfg") == fs::path("/tmp/root/cfg"));
  CHECK(cli::resolve_out_dir("", "") == fs::path("/tmp/root"));
  unsetenv("VKNS2D_OUT_DIR");
}
