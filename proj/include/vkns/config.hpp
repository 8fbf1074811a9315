// Run configuration. Files use a TOML subset: [table] and [table.sub]
// headers, bare or quoted keys, strings, integers, floats, booleans and
// (possibly multi-line, nested) arrays, '#' comments. Inline tables, arrays
// of tables, dotted keys and dates are rejected.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "vkns/inequality_lab.hpp"
#include "vkns/verification.hpp"

namespace vkns {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parses TOML-subset text into an ordered JSON object.
nlohmann::ordered_json parse_toml(const std::string& text);

struct OutputConfig {
  std::string dir;
  std::vector<double> q_list{4.0, 8.0};
  std::vector<double> p_list{2.0, 4.0};
  int snapshot_every = 0;  // output samples between snapshots, 0 = none
  bool checkpoint = true;
};

struct RunConfig {
  int n = 64;
  Params params{1.0, 2.0, 2.0};
  InitConfig init;
  StepControl control;
  OutputConfig output;
  ScheduleConfig schedule;
  std::vector<ScenarioSpec> scenarios;  // in file order
  lab::LabConfig lab;
  bool has_lab = false;
  // Effective configuration after overrides; hashed for provenance.
  nlohmann::ordered_json effective;

  std::string hash() const;
  ExponentSchedule exponent_schedule() const;
  MonitorConfig monitor_config() const;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> snapshot_every;
  std::optional<unsigned> jobs;
};

// Throws ConfigError with the offending key, section or line.
RunConfig parse_config(const std::string& text, const Overrides& overrides = {});
RunConfig load_config(const std::filesystem::path& path, const Overrides& overrides = {});

}  // namespace vkns
