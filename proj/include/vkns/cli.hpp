// vkns2d command line: simulate, verify, ineq-lab, resume.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "vkns/config.hpp"

namespace vkns::cli {

enum ExitCode : int { ok = 0, config_error = 1, aborted = 2, checks_failed = 3 };

struct CommonOptions {
  std::string config;
  std::string out_dir;
  Overrides overrides;
};

// Output directory: --out-dir, else $VKNS2D_OUT_DIR, else [output] dir,
// else "vkns2d_out".
std::filesystem::path resolve_out_dir(const std::string& flag, const std::string& from_config);

int cmd_simulate(const CommonOptions& opts, std::ostream& out, std::ostream& err);
int cmd_verify(const CommonOptions& opts, std::ostream& out, std::ostream& err);
int cmd_ineq_lab(const CommonOptions& opts, std::ostream& out, std::ostream& err);
// Continues a checkpoint to t_end (the stored one unless given).
int cmd_resume(const std::string& checkpoint, std::optional<double> t_end,
               const CommonOptions& opts, std::ostream& out, std::ostream& err);

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace vkns::cli
