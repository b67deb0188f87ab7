#include "kvsopt/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "kvsopt/errors.hpp"

namespace kvs {

namespace {

using Subs = std::vector<std::string>;
const Subs kRun{"optimize", "benchmark", "moments"};
const Subs kAll{"optimize", "benchmark", "moments", "diagnose"};

}  // namespace

const std::vector<ConfigKey>& config_schema() {
  static const std::vector<ConfigKey> schema{
      {"objective.name", "string", "stochastic_rastrigin", "registered objective", kAll},
      {"objective.dim", "int", "20", "dimension d of x", kAll},
      {"objective.B", "real", "0", "Rastrigin shift B", kAll},
      {"objective.C", "real", "0", "Rastrigin offset C", kAll},
      {"objective.mean_y1", "real", "1", "E[Y1] used by the closed-form expectation", kAll},
      {"objective.mean_y2", "real", "1", "E[Y2] used by the closed-form expectation", kAll},
      {"sampling.theta", "string", "uniform", "uniform | exponential | normal", kAll},
      {"sampling.M", "int", "50", "sample size M", kAll},
      {"optimizer", "string", "lkbo_fvse", "lkbo_fvse | lkbo_fvse_sy | cbo | cbo_ffs", kRun},
      {"optimizer.lambda", "real", "1", "drift lambda", kAll},
      {"optimizer.sigma", "real", "7", "noise sigma", kAll},
      {"optimizer.alpha", "real", "30", "weight parameter alpha", kAll},
      {"optimizer.dt", "real", "0.01", "time step", kRun},
      {"optimizer.eta", "real", "dt", "sampling frequency scale, dt / eta <= 1", kRun},
      {"optimizer.epsilon", "real", "1", "quasi-invariant scaling", kRun},
      {"optimizer.N", "int", "50", "number of particles", kRun},
      {"optimizer.n_it", "int", "10000", "number of iterates", kRun},
      {"optimizer.diffusion", "string", "anisotropic", "anisotropic | isotropic", kAll},
      {"optimizer.n_sY", "int", "1", "batches per iterate (sY) or inner runs (cbo_ffs)", kRun},
      {"optimizer.init_lo", "real", "-3", "lower edge of the initial box", kAll},
      {"optimizer.init_hi", "real", "3", "upper edge of the initial box", kAll},
      {"seed", "int", "0", "master seed", kAll},
      {"workers", "int", "1", "concurrent runs", {"benchmark"}},
      {"optimize.trace", "bool", "false", "write trace.csv (h, m_1..m_d, V, cp_1..cp_d)", {"optimize"}},
      {"benchmark.n_runs", "int", "100", "realizations per cell", {"benchmark"}},
      {"benchmark.threshold", "real", "0.25", "success radius in the max norm", {"benchmark"}},
      {"benchmark.rate_target", "real", "0.8", "success rate whose first iterate is reported", {"benchmark"}},
      {"benchmark.track_iterates", "bool", "false", "track success per iterate", {"benchmark"}},
      {"benchmark.iterate", "int", "n_it", "iterate at which metrics are taken", {"benchmark"}},
      {"benchmark.rows", "list", "", "'|'-separated row entries of '&'-joined key=value overrides", {"benchmark"}},
      {"benchmark.cols", "list", "", "'|'-separated column entries", {"benchmark"}},
      {"benchmark.row_labels", "list", "", "'|'-separated row labels", {"benchmark"}},
      {"benchmark.col_labels", "list", "", "'|'-separated column labels", {"benchmark"}},
      {"moments.alphas", "list", "optimizer.alpha", "alpha values, one empirical trace each", {"moments"}},
      {"moments.init_boxes", "list", "init_lo:init_hi", "'|'-separated lo:hi initial boxes", {"moments"}},
      {"moments.n_runs", "int", "1", "realizations averaged per trace", {"moments"}},
      {"moments.x_tilde", "list", "minimizer", "equilibrium consensus point", {"moments"}},
      {"moments.rel_tol", "real", "1e-8", "integrator relative tolerance", {"moments"}},
      {"moments.abs_tol", "real", "1e-12", "integrator absolute tolerance", {"moments"}},
      {"diagnose.n_mc", "int", "10000", "Monte Carlo batches for C_alpha", {"diagnose"}},
      {"diagnose.c_alpha", "real", "", "user-supplied C_alpha, skips estimation", {"diagnose"}},
      {"diagnose.nu", "bool", "false", "evaluate the nu feasibility check", {"diagnose"}},
      {"diagnose.c1", "real", "0", "constant c1 for nu", {"diagnose"}},
      {"diagnose.c2", "real", "0", "constant c2 for nu", {"diagnose"}},
      {"diagnose.f_lower", "real", "0", "lower bound of f for nu", {"diagnose"}},
      {"diagnose.V0", "real", "initial box variance", "V(0) for nu", {"diagnose"}},
      {"diagnose.omega_norm", "real", "estimated", "L1(g0) norm of exp(-alpha f)", {"diagnose"}},
  };
  return schema;
}

std::vector<ConfigKey> keys_for(std::string_view subcommand) {
  std::vector<ConfigKey> out;
  for (const auto& k : config_schema()) {
    if (std::find(k.subcommands.begin(), k.subcommands.end(), subcommand) != k.subcommands.end()) out.push_back(k);
  }
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

Config Config::parse(std::string_view text, std::string_view origin) {
  Config cfg;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    const auto where = [&] { return std::string(origin) + ":" + std::to_string(line_no) + ": "; };
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where() + "unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where() + "expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ConfigError(where() + "empty key");
    try {
      cfg.set(section.empty() ? key : section + "." + key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where() + e.what());
    }
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse(ss.str(), path.string());
}

void Config::set(const std::string& key, std::string value) {
  const auto& schema = config_schema();
  const bool known = std::any_of(schema.begin(), schema.end(), [&](const ConfigKey& k) { return k.key == key; });
  if (!known) throw ConfigError("unknown config key '" + key + "'");
  values_[key] = std::move(value);
}

void Config::apply_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("override '" + std::string(assignment) + "' is not of the form key=value");
  }
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

namespace {

double parse_real(const std::string& key, const std::string& v) {
  double out = 0.0;
  const char* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc{} || res.ptr != end) throw ConfigError(key + ": expected a real number, got '" + v + "'");
  return out;
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const char* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec == std::errc{} && res.ptr == end) return out;
  // Accept integral values in real notation such as 1e4.
  const double d = parse_real(key, v);
  if (d >= 0.0 && d < 1.8e19 && d == static_cast<double>(static_cast<std::uint64_t>(d))) {
    return static_cast<std::uint64_t>(d);
  }
  throw ConfigError(key + ": expected a nonnegative integer, got '" + v + "'");
}

}  // namespace

double Config::get_real(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_real(key, it->second);
}

std::optional<double> Config::get_optional_real(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end() || it->second.empty()) return std::nullopt;
  return parse_real(key, it->second);
}

std::size_t Config::get_size(const std::string& key, std::size_t fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : static_cast<std::size_t>(parse_uint(key, it->second));
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_uint(key, it->second);
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::string v = it->second;
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected a boolean, got '" + it->second + "'");
}

std::vector<std::string> Config::get_list(const std::string& key, char sep) const {
  std::vector<std::string> out;
  const auto it = values_.find(key);
  if (it == values_.end() || trim(it->second).empty()) return out;
  std::string_view s = it->second;
  while (true) {
    const auto p = s.find(sep);
    out.push_back(trim(s.substr(0, p)));
    if (p == std::string_view::npos) break;
    s.remove_prefix(p + 1);
  }
  return out;
}

std::vector<double> Config::get_reals(const std::string& key) const {
  std::vector<double> out;
  const auto it = values_.find(key);
  if (it == values_.end()) return out;
  std::string v = it->second;
  std::replace(v.begin(), v.end(), ',', ' ');
  std::istringstream in(v);
  std::string tok;
  while (in >> tok) out.push_back(parse_real(key, tok));
  return out;
}

}  // namespace kvs
