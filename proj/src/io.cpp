#include "vkns/io.hpp"

#include <bit>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <sstream>

namespace vkns::io {

namespace {

constexpr char kMagic[8] = {'V', 'K', 'N', 'S', '2', 'D', '\0', '\0'};
constexpr char kExtensionTag[8] = {'V', 'K', 'N', 'S', 'E', 'X', 'T', '1'};
constexpr std::uint32_t kMaxN = 1u << 15;

class Writer {
 public:
  void bytes(const char* p, std::size_t n) { buf_.append(p, n); }
  void u32(std::uint32_t v) {
    for (int k = 0; k < 4; ++k) buf_.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
  }
  void u64(std::uint64_t v) {
    for (int k = 0; k < 8; ++k) buf_.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void field(const RealField& f) {
    for (std::size_t k = 0; k < f.size(); ++k) f64(f[k]);
  }
  void doubles(const std::vector<double>& v) {
    u32(static_cast<std::uint32_t>(v.size()));
    for (double x : v) f64(x);
  }
  void text(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  std::string take() { return std::move(buf_); }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(const std::string& buf) : buf_(buf) {}

  void need(std::size_t n, const char* what) const {
    if (buf_.size() - pos_ < n) throw FormatError(std::string("truncated data while reading ") + what);
  }
  std::string bytes(std::size_t n, const char* what) {
    need(n, what);
    std::string s = buf_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf_[pos_ + k])) << (8 * k);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf_[pos_ + k])) << (8 * k);
    pos_ += 8;
    return v;
  }
  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }
  RealField field(const Grid& g, const char* what) {
    need(g.size() * 8, what);
    RealField f(g);
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = f64(what);
    return f;
  }
  std::vector<double> doubles(const char* what) {
    const std::uint32_t count = u32(what);
    need(static_cast<std::size_t>(count) * 8, what);
    std::vector<double> v(count);
    for (auto& x : v) x = f64(what);
    return v;
  }
  std::string text(const char* what) { return bytes(u32(what), what); }
  bool done() const { return pos_ == buf_.size(); }

 private:
  const std::string& buf_;
  std::size_t pos_ = 0;
};

void put_snapshot(Writer& w, const FluidState& s) {
  w.bytes(kMagic, 8);
  w.u32(kSnapshotVersion);
  w.u32(static_cast<std::uint32_t>(s.grid().n()));
  w.f64(s.t);
  const VectorField u = s.velocity();
  w.field(s.rho);
  w.field(u.x);
  w.field(u.y);
}

struct RawSnapshot {
  double t;
  RealField rho;
  VectorField u;
};

RawSnapshot get_snapshot(Reader& r) {
  if (r.bytes(8, "magic") != std::string(kMagic, 8)) throw FormatError("bad magic bytes");
  const std::uint32_t version = r.u32("version");
  if (version != kSnapshotVersion)
    throw FormatError("unsupported snapshot version " + std::to_string(version));
  const std::uint32_t n = r.u32("grid size");
  if (n < 2 || n > kMaxN || n % 2 != 0) throw FormatError("invalid grid size " + std::to_string(n));
  const Grid g(static_cast<int>(n));
  const double t = r.f64("time");
  RealField rho = r.field(g, "rho");
  RealField u1 = r.field(g, "u1");
  RealField u2 = r.field(g, "u2");
  return {t, std::move(rho), VectorField(std::move(u1), std::move(u2))};
}

}  // namespace

std::string encode_snapshot(const FluidState& s) {
  Writer w;
  put_snapshot(w, s);
  return w.take();
}

FluidState decode_snapshot(const std::string& bytes) {
  Reader r(bytes);
  RawSnapshot raw = get_snapshot(r);
  if (!r.done()) throw FormatError("trailing bytes after snapshot");
  return from_primitive(raw.t, std::move(raw.rho), raw.u);
}

void write_snapshot(const std::filesystem::path& path, const FluidState& s) {
  write_atomic(path, encode_snapshot(s));
}

FluidState read_snapshot(const std::filesystem::path& path) {
  try {
    return decode_snapshot(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string encode_checkpoint(const Checkpoint& c) {
  Writer w;
  put_snapshot(w, c.state);
  w.f64(c.params.mu());
  w.f64(c.params.beta());
  w.f64(c.params.gamma());
  w.f64(c.control.cfl);
  w.f64(c.control.dt_max);
  w.f64(c.control.t_end);
  w.f64(c.control.output_interval);

  w.bytes(kExtensionTag, 8);
  w.field(c.state.m.x);
  w.field(c.state.m.y);
  w.f64(c.integrals.dissipation);
  w.f64(c.integrals.pressure_deviation);
  w.f64(c.carry.rho_hat);
  w.f64(c.carry.int_XY);
  w.f64(c.carry.last_t);
  w.f64(c.carry.last_XY);
  w.u32(c.carry.started ? 1 : 0);
  w.doubles(c.q_list);
  w.doubles(c.p_list);
  w.f64(c.schedule_epsilon);
  w.f64(c.schedule_q);
  w.f64(c.schedule_nu0);
  w.u64(c.seed);
  w.u64(static_cast<std::uint64_t>(c.steps));
  w.text(c.config_hash);
  return w.take();
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  Reader r(bytes);
  RawSnapshot raw = get_snapshot(r);
  const double mu = r.f64("params");
  const double beta = r.f64("params");
  const double gamma = r.f64("params");
  StepControl ctl;
  ctl.cfl = r.f64("step control");
  ctl.dt_max = r.f64("step control");
  ctl.t_end = r.f64("step control");
  ctl.output_interval = r.f64("step control");
  if (r.bytes(8, "extension tag") != std::string(kExtensionTag, 8))
    throw FormatError("missing checkpoint extension block");
  const Grid g = raw.rho.grid();
  RealField m1 = r.field(g, "m1");
  RealField m2 = r.field(g, "m2");

  TrajectoryIntegrals integrals;
  integrals.dissipation = r.f64("integrals");
  integrals.pressure_deviation = r.f64("integrals");
  Monitor::Carry carry;
  carry.rho_hat = r.f64("monitor");
  carry.int_XY = r.f64("monitor");
  carry.last_t = r.f64("monitor");
  carry.last_XY = r.f64("monitor");
  carry.started = r.u32("monitor") != 0;
  std::vector<double> q_list = r.doubles("q list");
  std::vector<double> p_list = r.doubles("p list");
  const double eps = r.f64("schedule");
  const double q = r.f64("schedule");
  const double nu0 = r.f64("schedule");
  const std::uint64_t seed = r.u64("seed");
  const long steps = static_cast<long>(r.u64("steps"));
  std::string hash = r.text("config hash");
  if (!r.done()) throw FormatError("trailing bytes after checkpoint");

  try {
    Params params(mu, beta, gamma);
    ctl.validate();
    FluidState state(raw.t, std::move(raw.rho), VectorField(std::move(m1), std::move(m2)));
    return Checkpoint{std::move(state), params, ctl, integrals, carry, std::move(q_list),
                      std::move(p_list), eps, q, nu0, seed, steps, std::move(hash)};
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("invalid checkpoint contents: ") + e.what());
  }
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  write_atomic(path, encode_checkpoint(c));
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  try {
    return decode_checkpoint(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary | std::ios::trunc), path_(path) {
  if (!out_) throw std::runtime_error("cannot write '" + path.string() + "'");
  row(header);
}

void CsvWriter::row(const std::vector<double>& values) {
  std::string line;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k) line += ',';
    line += format_double(values[k]);
  }
  line += '\n';
  out_ << line;
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (k) line += ',';
    const std::string& c = cells[k];
    if (c.find_first_of(",\"\n") == std::string::npos) {
      line += c;
    } else {
      line += '"';
      for (char ch : c) line += ch == '"' ? std::string("\"\"") : std::string(1, ch);
      line += '"';
    }
  }
  line += '\n';
  out_ << line;
}

void CsvWriter::close() {
  out_.close();
  if (!out_) throw std::runtime_error("write failed for '" + path_.string() + "'");
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace vkns::io
