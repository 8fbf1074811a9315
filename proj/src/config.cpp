#include "vkns/config.hpp"

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <set>

#include "vkns/io.hpp"

namespace vkns {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// TOML subset

namespace {

class TomlParser {
 public:
  explicit TomlParser(const std::string& text) : s_(text) {}

  json parse() {
    json root = json::object();
    json* table = &root;
    while (true) {
      skip_blank_lines();
      if (eof()) break;
      if (peek() == '[') {
        table = &open_table(root);
      } else {
        key_value(*table);
      }
      end_of_line();
    }
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("line " + std::to_string(line_) + ": " + msg);
  }

  bool eof() const { return pos_ >= s_.size(); }
  char peek() const { return eof() ? '\0' : s_[pos_]; }
  char get() {
    const char c = s_[pos_++];
    if (c == '\n') ++line_;
    return c;
  }

  void skip_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }
  void skip_comment() {
    if (peek() == '#')
      while (!eof() && peek() != '\n') ++pos_;
  }
  void skip_blank_lines() {
    while (!eof()) {
      skip_ws();
      skip_comment();
      if (peek() == '\r') ++pos_;
      if (peek() == '\n') {
        get();
        continue;
      }
      break;
    }
  }
  // Whitespace, comments and newlines inside arrays.
  void skip_array_space() {
    while (!eof()) {
      skip_ws();
      skip_comment();
      if (peek() == '\n' || peek() == '\r') {
        get();
        continue;
      }
      break;
    }
  }
  void end_of_line() {
    skip_ws();
    skip_comment();
    if (peek() == '\r') ++pos_;
    if (eof()) return;
    if (peek() != '\n') fail(std::string("unexpected '") + peek() + "' after value");
    get();
  }

  static bool bare_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  }

  std::string key() {
    skip_ws();
    if (peek() == '"') return basic_string();
    if (peek() == '\'') return literal_string();
    const std::size_t start = pos_;
    while (!eof() && bare_char(peek())) ++pos_;
    if (pos_ == start) fail("expected a key");
    return s_.substr(start, pos_ - start);
  }

  json& open_table(json& root) {
    get();  // '['
    if (peek() == '[') fail("arrays of tables are not supported");
    std::vector<std::string> path;
    std::string dotted;
    while (true) {
      path.push_back(key());
      dotted += (dotted.empty() ? "" : ".") + path.back();
      skip_ws();
      if (peek() == '.') {
        get();
        continue;
      }
      if (peek() != ']') fail("expected ']' to close table header");
      get();
      break;
    }
    if (!defined_.insert(dotted).second) fail("table [" + dotted + "] defined twice");
    json* t = &root;
    for (const auto& part : path) {
      if (!t->contains(part)) (*t)[part] = json::object();
      t = &(*t)[part];
      if (!t->is_object()) fail("[" + dotted + "] redefines the non-table key '" + part + "'");
    }
    return *t;
  }

  void key_value(json& table) {
    const std::string k = key();
    skip_ws();
    if (peek() == '.') fail("dotted keys are not supported ('" + k + "')");
    if (peek() != '=') fail("expected '=' after key '" + k + "'");
    get();
    skip_ws();
    json v = value();
    if (table.contains(k)) fail("duplicate key '" + k + "'");
    table[k] = std::move(v);
  }

  json value() {
    const char c = peek();
    if (c == '"') {
      if (s_.compare(pos_, 3, "\"\"\"") == 0) fail("multi-line strings are not supported");
      return basic_string();
    }
    if (c == '\'') {
      if (s_.compare(pos_, 3, "'''") == 0) fail("multi-line strings are not supported");
      return literal_string();
    }
    if (c == '[') return array();
    if (c == '{') fail("inline tables are not supported");
    return scalar();
  }

  std::string basic_string() {
    get();  // '"'
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      const char c = get();
      if (c == '"') break;
      if (c != '\\') {
        out += c;
        continue;
      }
      if (eof()) fail("unterminated escape");
      const char e = get();
      switch (e) {
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        default: fail(std::string("unsupported escape '\\") + e + "'");
      }
    }
    return out;
  }

  std::string literal_string() {
    get();  // '\''
    const std::size_t start = pos_;
    while (!eof() && peek() != '\'' && peek() != '\n') ++pos_;
    if (peek() != '\'') fail("unterminated string");
    std::string out = s_.substr(start, pos_ - start);
    get();
    return out;
  }

  json array() {
    get();  // '['
    json arr = json::array();
    while (true) {
      skip_array_space();
      if (peek() == ']') {
        get();
        return arr;
      }
      arr.push_back(value());
      skip_array_space();
      if (peek() == ',') {
        get();
        continue;
      }
      if (peek() != ']') fail("expected ',' or ']' in array");
    }
  }

  // Booleans and numbers.
  json scalar() {
    const std::size_t start = pos_;
    while (!eof() && (bare_char(peek()) || peek() == '.' || peek() == '+')) ++pos_;
    std::string tok = s_.substr(start, pos_ - start);
    if (tok.empty()) fail("expected a value");
    if (tok == "true") return true;
    if (tok == "false") return false;
    std::string clean;
    for (char c : tok)
      if (c != '_') clean += c;
    std::string body = clean;
    if (!body.empty() && (body[0] == '+' || body[0] == '-')) body = body.substr(1);
    if (body == "inf") return clean[0] == '-' ? -HUGE_VAL : HUGE_VAL;
    if (body == "nan") return std::nan("");
    const bool is_float = clean.find_first_of(".eE") != std::string::npos;
    char* end = nullptr;
    if (is_float) {
      const double v = std::strtod(clean.c_str(), &end);
      if (end != clean.c_str() + clean.size()) fail("invalid number '" + tok + "'");
      return v;
    }
    errno = 0;
    const long long v = std::strtoll(clean.c_str(), &end, 10);
    if (end != clean.c_str() + clean.size() || errno != 0) fail("invalid value '" + tok + "'");
    return v;
  }

  const std::string& s_;
  std::size_t pos_ = 0;
  int line_ = 1;
  std::set<std::string> defined_;
};

// ---------------------------------------------------------------------------
// Binding

class Section {
 public:
  Section(const json* obj, std::string name) : obj_(obj), name_(std::move(name)) {
    if (obj_ && !obj_->is_object()) throw ConfigError("'" + name_ + "' must be a table");
  }

  bool has(const std::string& key) const { return obj_ && obj_->contains(key); }

  double number(const std::string& key, double def) {
    const json* v = lookup(key);
    if (!v) return def;
    if (!v->is_number()) bad(key, "a number");
    return v->get<double>();
  }

  long long integer(const std::string& key, long long def) {
    const json* v = lookup(key);
    if (!v) return def;
    if (!v->is_number_integer()) bad(key, "an integer");
    return v->get<long long>();
  }

  std::string text(const std::string& key, const std::string& def) {
    const json* v = lookup(key);
    if (!v) return def;
    if (!v->is_string()) bad(key, "a string");
    return v->get<std::string>();
  }

  bool boolean(const std::string& key, bool def) {
    const json* v = lookup(key);
    if (!v) return def;
    if (!v->is_boolean()) bad(key, "a boolean");
    return v->get<bool>();
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> def) {
    const json* v = lookup(key);
    if (!v) return def;
    if (!v->is_array()) bad(key, "an array of numbers");
    std::vector<double> out;
    for (const auto& x : *v) {
      if (!x.is_number()) bad(key, "an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  std::vector<std::string> strings(const std::string& key) {
    const json* v = lookup(key);
    if (!v) return {};
    if (!v->is_array()) bad(key, "an array of strings");
    std::vector<std::string> out;
    for (const auto& x : *v) {
      if (!x.is_string()) bad(key, "an array of strings");
      out.push_back(x.get<std::string>());
    }
    return out;
  }

  // Rejects keys that were never read.
  void finish() const {
    if (!obj_) return;
    for (const auto& [k, v] : obj_->items())
      if (!used_.count(k)) throw ConfigError("unknown key '" + k + "' in [" + name_ + "]");
  }

  [[noreturn]] void error(const std::string& key, const std::string& msg) const {
    throw ConfigError("[" + name_ + "] " + key + ": " + msg);
  }

 private:
  const json* lookup(const std::string& key) {
    if (!obj_ || !obj_->contains(key)) return nullptr;
    used_.insert(key);
    return &(*obj_)[key];
  }
  [[noreturn]] void bad(const std::string& key, const std::string& what) const {
    error(key, "expected " + what);
  }

  const json* obj_;
  std::string name_;
  std::set<std::string> used_;
};

const json* child(const json& root, const std::string& key) {
  return root.contains(key) ? &root[key] : nullptr;
}

int grid_size(Section& s, int def) {
  const long long n = s.integer("n", def);
  if (n < 8 || n % 2 != 0 || n > 4096) s.error("n", "must be even and in [8, 4096]");
  return static_cast<int>(n);
}

Params read_params(Section& s, const Params& def) {
  const double mu = s.number("mu", def.mu());
  const double beta = s.number("beta", def.beta());
  const double gamma = s.number("gamma", def.gamma());
  try {
    return Params(mu, beta, gamma);
  } catch (const std::invalid_argument& e) {
    s.error("mu/beta/gamma", e.what());
  }
}

// Init keys; the kind key is "kind" in [init] and "init_kind" in scenario
// tables.
void read_init(Section& s, InitConfig& c, const std::string& kind_key) {
  if (s.has(kind_key)) {
    try {
      c.kind = init_kind_from_string(s.text(kind_key, ""));
    } catch (const std::invalid_argument& e) {
      s.error(kind_key, e.what());
    }
  }
  const long long seed = s.integer("seed", static_cast<long long>(c.seed));
  if (seed < 0) s.error("seed", "must be non-negative");
  c.seed = static_cast<std::uint64_t>(seed);
  c.density_mean = s.number("density_mean", c.density_mean);
  c.density_amplitude = s.number("density_amplitude", c.density_amplitude);
  c.velocity_amplitude = s.number("velocity_amplitude", c.velocity_amplitude);
  c.band = static_cast<int>(s.integer("band", c.band));
  c.mode = static_cast<int>(s.integer("mode", c.mode));
  c.mollify_width = s.number("mollify_width", c.mollify_width);
  c.roughness_slope = s.number("roughness_slope", c.roughness_slope);
  c.bound_min = s.number("bound_min", c.bound_min);
  c.bound_max = s.number("bound_max", c.bound_max);
  if (!(c.density_mean > 0.0)) s.error("density_mean", "must be positive");
  if (c.band < 1) s.error("band", "must be >= 1");
  if (!(c.bound_min > 0.0 && c.bound_min < c.bound_max)) s.error("bound_min", "need 0 < bound_min < bound_max");
}

void read_time(Section& s, StepControl& c) {
  c.cfl = s.number("cfl", c.cfl);
  c.dt_max = s.number("dt_max", c.dt_max);
  c.t_end = s.number("t_end", c.t_end);
  c.output_interval = s.number("output_interval", c.output_interval);
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    s.error("cfl/dt_max/t_end/output_interval", e.what());
  }
}

void check_exponents(Section& s, const std::string& key, const std::vector<double>& v) {
  if (v.empty()) s.error(key, "must not be empty");
  for (double x : v)
    if (!(x >= 1.0) || !std::isfinite(x)) s.error(key, "exponents must be finite and >= 1");
}

ScenarioSpec read_scenario(Section& s, const std::string& name, const RunConfig& base) {
  ScenarioSpec spec;
  spec.name = name;
  if (!s.has("kind")) s.error("kind", "missing scenario kind");
  try {
    spec.kind = scenario_kind_from_string(s.text("kind", ""));
  } catch (const std::invalid_argument& e) {
    s.error("kind", e.what());
  }
  spec.n = grid_size(s, base.n);
  spec.params = read_params(s, base.params);
  spec.init = base.init;
  read_init(s, spec.init, "init_kind");
  spec.control = base.control;
  read_time(s, spec.control);
  spec.q_list = s.numbers("q_list", base.output.q_list);
  spec.p_list = s.numbers("p_list", base.output.p_list);
  check_exponents(s, "q_list", spec.q_list);
  check_exponents(s, "p_list", spec.p_list);
  spec.schedule = base.schedule;
  spec.widths = s.numbers("widths", {});
  spec.ladder_fraction = s.number("ladder_fraction", spec.ladder_fraction);
  spec.decay_fraction = s.number("decay_fraction", spec.decay_fraction);
  spec.plateau_growth = s.number("plateau_growth", spec.plateau_growth);
  spec.half_growth = s.number("half_growth", spec.half_growth);
  spec.rho_ceiling = s.number("rho_ceiling", spec.rho_ceiling);
  spec.energy_slack = s.number("energy_slack", spec.energy_slack);
  for (const std::string& a : s.strings("assertions")) {
    try {
      spec.assertions.push_back(parse_assertion(a));
    } catch (const std::invalid_argument& e) {
      s.error("assertions", e.what());
    }
  }
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("[scenario." + name + "] " + e.what());
  }
  return spec;
}

lab::LabConfig read_lab(Section& s) {
  lab::LabConfig c;
  c.n = grid_size(s, c.n);
  c.band = static_cast<int>(s.integer("band", c.band));
  c.samples = static_cast<int>(s.integer("samples", c.samples));
  const long long seed = s.integer("seed", static_cast<long long>(c.seed));
  if (seed < 0) s.error("seed", "must be non-negative");
  c.seed = static_cast<std::uint64_t>(seed);
  c.gns_q = s.numbers("gns_q", c.gns_q);
  c.divcurl_q = s.number("divcurl_q", c.divcurl_q);
  c.brezis_wainger_q = s.number("brezis_wainger_q", c.brezis_wainger_q);
  c.trudinger_c1 = s.numbers("trudinger_c1", c.trudinger_c1);
  c.commutator_samples = static_cast<int>(s.integer("commutator_samples", c.commutator_samples));
  c.commutator_q = s.number("commutator_q", c.commutator_q);
  const std::vector<double> r =
      s.numbers("commutator_r", {c.commutator_r.r1, c.commutator_r.r2, c.commutator_r.r3});
  if (r.size() != 3) s.error("commutator_r", "expected [r1, r2, r3]");
  c.commutator_r = {r[0], r[1], r[2]};
  c.desjardins_q = s.numbers("desjardins_q", c.desjardins_q);
  c.desjardins_gamma = s.number("desjardins_gamma", c.desjardins_gamma);
  c.stability_tolerance = s.number("stability_tolerance", c.stability_tolerance);
  c.trudinger_tolerance = s.number("trudinger_tolerance", c.trudinger_tolerance);
  c.gns_spread_limit = s.number("gns_spread_limit", c.gns_spread_limit);
  std::vector<int> bands;
  for (double b : s.numbers("gns_bands", {4, 8, 16})) bands.push_back(static_cast<int>(b));
  c.gns_bands = bands;
  c.gns_band_q = s.number("gns_band_q", c.gns_band_q);
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("[lab] ") + e.what());
  }
  return c;
}

}  // namespace

json parse_toml(const std::string& text) { return TomlParser(text).parse(); }

std::string RunConfig::hash() const { return fnv1a_hex(effective.dump()); }

ExponentSchedule RunConfig::exponent_schedule() const {
  return ExponentSchedule::search(params, schedule.nu0, schedule.epsilons, schedule.qs);
}

MonitorConfig RunConfig::monitor_config() const {
  return MonitorConfig{output.q_list, output.p_list, exponent_schedule()};
}

RunConfig parse_config(const std::string& text, const Overrides& overrides) {
  const json root = parse_toml(text);
  static const std::set<std::string> sections{"grid",   "params",   "init",     "time",
                                              "output", "schedule", "scenario", "lab"};
  for (const auto& [k, v] : root.items()) {
    if (!sections.count(k)) throw ConfigError("unknown section or top-level key '" + k + "'");
  }

  RunConfig c;
  {
    Section s(child(root, "grid"), "grid");
    c.n = grid_size(s, c.n);
    s.finish();
  }
  {
    Section s(child(root, "params"), "params");
    c.params = read_params(s, c.params);
    s.finish();
  }
  {
    Section s(child(root, "init"), "init");
    read_init(s, c.init, "kind");
    s.finish();
  }
  {
    Section s(child(root, "time"), "time");
    read_time(s, c.control);
    s.finish();
  }
  {
    Section s(child(root, "output"), "output");
    c.output.dir = s.text("dir", c.output.dir);
    c.output.q_list = s.numbers("q_list", c.output.q_list);
    c.output.p_list = s.numbers("p_list", c.output.p_list);
    check_exponents(s, "q_list", c.output.q_list);
    check_exponents(s, "p_list", c.output.p_list);
    const long long every = s.integer("snapshot_every", c.output.snapshot_every);
    if (every < 0) s.error("snapshot_every", "must be >= 0");
    c.output.snapshot_every = static_cast<int>(every);
    c.output.checkpoint = s.boolean("checkpoint", c.output.checkpoint);
    s.finish();
  }
  {
    Section s(child(root, "schedule"), "schedule");
    c.schedule.nu0 = s.number("nu0", c.schedule.nu0);
    c.schedule.epsilons = s.numbers("epsilons", c.schedule.epsilons);
    c.schedule.qs = s.numbers("qs", c.schedule.qs);
    if (!(c.schedule.nu0 > 0.0 && c.schedule.nu0 <= 0.5)) s.error("nu0", "must lie in (0, 1/2]");
    for (double e : c.schedule.epsilons)
      if (!(e > 0.0 && e < 1.0)) s.error("epsilons", "entries must lie in (0, 1)");
    for (double q : c.schedule.qs)
      if (!(q > 4.0)) s.error("qs", "entries must exceed 4");
    if (c.schedule.epsilons.empty() || c.schedule.qs.empty()) s.error("epsilons/qs", "must not be empty");
    s.finish();
  }

  if (overrides.seed) c.init.seed = *overrides.seed;
  if (overrides.snapshot_every) {
    if (*overrides.snapshot_every < 0) throw ConfigError("--snapshot-every must be >= 0");
    c.output.snapshot_every = *overrides.snapshot_every;
  }

  if (const json* sc = child(root, "scenario")) {
    if (!sc->is_object()) throw ConfigError("'scenario' must be a table of [scenario.<name>] tables");
    for (const auto& [name, body] : sc->items()) {
      Section s(&body, "scenario." + name);
      ScenarioSpec spec = read_scenario(s, name, c);
      s.finish();
      if (overrides.seed) spec.init.seed = *overrides.seed;
      if (overrides.jobs) spec.jobs = *overrides.jobs;
      c.scenarios.push_back(std::move(spec));
    }
  }
  if (const json* lb = child(root, "lab")) {
    Section s(lb, "lab");
    c.lab = read_lab(s);
    s.finish();
    c.has_lab = true;
  }
  if (overrides.seed) c.lab.seed = *overrides.seed;
  if (overrides.jobs) c.lab.jobs = *overrides.jobs;

  c.effective = root;
  json ov = json::object();
  if (overrides.seed) ov["seed"] = *overrides.seed;
  if (overrides.snapshot_every) ov["snapshot_every"] = *overrides.snapshot_every;
  if (!ov.empty()) c.effective["overrides"] = ov;
  return c;
}

RunConfig load_config(const std::filesystem::path& path, const Overrides& overrides) {
  std::string text;
  try {
    text = io::read_file(path);
  } catch (const std::exception&) {
    throw ConfigError("cannot read config file '" + path.string() + "'");
  }
  try {
    return parse_config(text, overrides);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace vkns
