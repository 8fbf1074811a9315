// Binary snapshots and checkpoints, CSV output and atomic file writes.
//
// Snapshot layout (little endian):
//   "VKNS2D\0\0" | u32 version | u32 n | f64 t | rho, u1, u2 (n*n f64 each, row-major)
// A checkpoint is a snapshot followed by Params (mu, beta, gamma), StepControl
// (cfl, dt_max, t_end, output_interval) and a tagged extension block holding
// what an exact restart needs: the momentum fields, trajectory integrals,
// monitor state and run metadata.
#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "vkns/diagnostics.hpp"
#include "vkns/dynamics.hpp"

namespace vkns::io {

inline constexpr std::uint32_t kSnapshotVersion = 1;

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string encode_snapshot(const FluidState& s);
// Momentum is rebuilt as rho * u.
FluidState decode_snapshot(const std::string& bytes);

void write_snapshot(const std::filesystem::path& path, const FluidState& s);
FluidState read_snapshot(const std::filesystem::path& path);

struct Checkpoint {
  FluidState state;
  Params params;
  StepControl control;
  TrajectoryIntegrals integrals;
  Monitor::Carry carry;
  std::vector<double> q_list;
  std::vector<double> p_list;
  double schedule_epsilon = 0.0;
  double schedule_q = 0.0;
  double schedule_nu0 = 0.5;
  std::uint64_t seed = 0;
  long steps = 0;
  std::string config_hash;
};

std::string encode_checkpoint(const Checkpoint& c);
Checkpoint decode_checkpoint(const std::string& bytes);

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& c);
// Throws FormatError on a bad magic, version or truncated file; nothing is
// returned unless the whole file decodes.
Checkpoint read_checkpoint(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
// Writes to a sibling temporary file and renames it over path.
void write_atomic(const std::filesystem::path& path, const std::string& content);

// 17 significant digits.
std::string format_double(double v);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

  void row(const std::vector<double>& values);
  void row(const std::vector<std::string>& cells);
  void close();

 private:
  std::ofstream out_;
  std::filesystem::path path_;
};

// ISO 8601 UTC timestamp of the current wall time.
std::string utc_now();

}  // namespace vkns::io
