#include "zeno/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <numbers>
#include <sstream>

#include "zeno/error.hpp"

namespace zeno {

namespace {

namespace pt = boost::property_tree;

[[noreturn]] void bad_key(std::string_view key, std::string_view what) {
  throw Error(ErrorKind::InvalidArgument, "config key '" + std::string(key) + "': " + std::string(what));
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(std::string_view key, std::string_view raw) {
  const std::string text = trim(raw);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty() || !std::isfinite(value)) {
    bad_key(key, "expected a finite number, got '" + text + "'");
  }
  return value;
}

std::uint64_t parse_unsigned(std::string_view key, std::string_view raw) {
  const std::string text = trim(raw);
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    bad_key(key, "expected a non-negative integer, got '" + text + "'");
  }
  return value;
}

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void assign(RunConfig& c, const std::string& key, std::string_view value) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  auto& e = c.experiment;
  if (key == "drive.omega_rad_per_s" || key == "drive.omega_hz") {
    const double v = parse_double(key, value);
    if (v < 0.0) bad_key(key, "Rabi frequency must be >= 0");
    e.drive.omega = key.ends_with("_hz") ? two_pi * v : v;
  } else if (key == "drive.detuning_rad_per_s" || key == "drive.detuning_hz") {
    const double v = parse_double(key, value);
    e.drive.delta = key.ends_with("_hz") ? two_pi * v : v;
  } else if (key == "drive.tau_s") {
    const double v = parse_double(key, value);
    if (!(v > 0.0)) bad_key(key, "pulse length must be > 0");
    e.drive.tau = v;
  } else if (key == "relax.big_gamma_per_s") {
    const double v = parse_double(key, value);
    if (v < 0.0) bad_key(key, "rate must be >= 0");
    e.relax.big_gamma = v;
  } else if (key == "relax.gamma_ph_per_s") {
    const double v = parse_double(key, value);
    if (v < 0.0) bad_key(key, "rate must be >= 0");
    e.relax.gamma_ph = v;
  } else if (key == "degeneracy.f0" || key == "degeneracy.f1") {
    const double v = parse_double(key, value);
    if (!(v > 0.0 && v <= 1.0)) bad_key(key, "degeneracy factor must lie in (0, 1]");
    (key == "degeneracy.f0" ? e.degeneracy.f0 : e.degeneracy.f1) = v;
  } else if (key == "probe.tau_p_s") {
    const double v = parse_double(key, value);
    if (v < 0.0) bad_key(key, "probe length must be >= 0");
    e.probe_duration = v;
  } else if (key == "run.n_measurements") {
    const auto v = parse_unsigned(key, value);
    if (v < 1) bad_key(key, "need at least one measurement");
    e.n_measurements = static_cast<std::size_t>(v);
  } else if (key == "run.seed") {
    c.seed = parse_unsigned(key, value);
  } else if (key == "run.model") {
    const std::string token = trim(value);
    if (token != "zeno" && token != "coherent") bad_key(key, "expected zeno or coherent, got '" + token + "'");
    c.model = parse_model(token);
  } else {
    bad_key(key, "unknown key");
  }
}

// A frequency may be given in rad/s or in Hz, not both.
void check_unit_clash(std::set<std::string>& families, const std::string& key) {
  std::string family;
  if (key.ends_with("_hz")) {
    family = key.substr(0, key.size() - 3);
  } else if (key.ends_with("_rad_per_s")) {
    family = key.substr(0, key.size() - 10);
  } else {
    return;
  }
  if (!families.insert(family).second) bad_key(key, "given both in Hz and rad/s");
}

}  // namespace

RunConfig reference_defaults() {
  RunConfig c;
  auto& e = c.experiment;
  e.drive.tau = 2e-3;
  e.drive.delta = 0.0;
  e.relax.big_gamma = 263.0;
  e.relax.gamma_ph = 0.5;
  e.degeneracy = {0.5, 1.0};
  e.probe_duration = 10e-3;
  e.n_measurements = 500;
  const double a = 0.5 * e.relax.gamma() * e.drive.tau;
  const double b = 0.5 * e.relax.big_gamma * e.drive.tau;
  const double theta = 2.0 * std::numbers::pi * 640.0 + (1.0 + 1e-4) * std::numbers::pi;
  e.drive.omega = std::hypot(theta, a - b) / e.drive.tau;
  return c;
}

RunConfig parse_config(std::string_view text, RunConfig base) {
  pt::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& ex) {
    std::ostringstream msg;
    msg << "config line " << ex.line() << ": " << ex.message();
    throw Error(ErrorKind::InvalidArgument, msg.str());
  }
  std::set<std::string> families;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      bad_key(section, "keys must sit inside a [section]");
    }
    for (const auto& [name, leaf] : body) {
      const std::string key = section + "." + name;
      check_unit_clash(families, key);
      assign(base, key, leaf.get_value<std::string>());
    }
  }
  return base;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void apply_override(RunConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw Error(ErrorKind::InvalidArgument, "override '" + std::string(assignment) + "' is not section.key=value");
  }
  assign(config, trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& c) {
  const auto& e = c.experiment;
  return {
      {"drive.omega_rad_per_s", format_double(e.drive.omega)},
      {"drive.detuning_rad_per_s", format_double(e.drive.delta)},
      {"drive.tau_s", format_double(e.drive.tau)},
      {"relax.big_gamma_per_s", format_double(e.relax.big_gamma)},
      {"relax.gamma_ph_per_s", format_double(e.relax.gamma_ph)},
      {"degeneracy.f0", format_double(e.degeneracy.f0)},
      {"degeneracy.f1", format_double(e.degeneracy.f1)},
      {"probe.tau_p_s", format_double(e.probe_duration)},
      {"run.n_measurements", std::to_string(e.n_measurements)},
      {"run.seed", std::to_string(c.seed)},
      {"run.model", std::string(to_token(c.model))},
  };
}

std::string to_ini(const RunConfig& config) {
  std::ostringstream out;
  std::string section;
  for (const auto& [key, value] : config_entries(config)) {
    const auto dot = key.find('.');
    const std::string sec = key.substr(0, dot);
    if (sec != section) {
      if (!section.empty()) out << '\n';
      out << '[' << sec << "]\n";
      section = sec;
    }
    out << key.substr(dot + 1) << " = " << value << '\n';
  }
  return out.str();
}

std::string config_hash(const RunConfig& config) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const auto& [key, value] : config_entries(config)) {
    if (!(key.starts_with("drive.") || key.starts_with("relax.") || key.starts_with("degeneracy."))) continue;
    for (char ch : key + "=" + value + "\n") {
      h ^= static_cast<unsigned char>(ch);
      h *= 0x100000001B3ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace zeno
