#include "zeno/trajectory_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "zeno/error.hpp"
#include "zeno/rng.hpp"

namespace zeno {

namespace {

constexpr std::string_view kMagic = "zeno-trajectory v1";
constexpr std::string_view kConfigPrefix = "config: ";

[[noreturn]] void bad_line(std::size_t line, std::string_view what) {
  throw Error(ErrorKind::InvalidArgument, "trajectory line " + std::to_string(line) + ": " + std::string(what));
}

std::optional<std::string_view> header_value(const TrajectoryFile& file, std::string_view key) {
  for (const auto& h : file.header) {
    if (h.size() > key.size() + 1 && h.compare(0, key.size(), key) == 0 && h[key.size()] == ':') {
      std::string_view v(h);
      v.remove_prefix(key.size() + 1);
      while (!v.empty() && v.front() == ' ') v.remove_prefix(1);
      return v;
    }
  }
  return std::nullopt;
}

}  // namespace

TrajectoryFile make_trajectory_file(const Trajectory& trajectory, const RunConfig& config) {
  TrajectoryFile file;
  file.trajectory = trajectory;
  file.header.emplace_back(kMagic);
  file.header.push_back("generator: " + std::string(kGeneratorName));
  file.header.push_back("model: " + std::string(to_token(trajectory.model)));
  file.header.push_back("seed: " + std::to_string(trajectory.seed));
  file.header.push_back("n: " + std::to_string(trajectory.size()));
  file.header.push_back("config_hash: " + config_hash(config));
  for (const auto& [key, value] : config_entries(config)) {
    file.header.push_back(std::string(kConfigPrefix) + key + " = " + value);
  }
  return file;
}

std::string serialize(const TrajectoryFile& file) {
  std::string out;
  out.reserve(file.trajectory.size() * 8 + 1024);
  for (const auto& h : file.header) {
    out += "# ";
    out += h;
    out += '\n';
  }
  for (std::size_t k = 0; k < file.trajectory.outcomes.size(); ++k) {
    out += std::to_string(k);
    out += ',';
    out += to_token(file.trajectory.outcomes[k]);
    out += '\n';
  }
  return out;
}

TrajectoryFile parse_trajectory_file(std::string_view text) {
  TrajectoryFile file;
  std::size_t line_no = 0;
  bool in_records = false;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    if (nl == std::string_view::npos) bad_line(line_no, "missing final newline");
    const std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl + 1);

    if (line.starts_with('#')) {
      if (in_records) bad_line(line_no, "header line after the first record");
      if (!line.starts_with("# ")) bad_line(line_no, "header lines start with '# '");
      file.header.emplace_back(line.substr(2));
      continue;
    }
    in_records = true;
    const auto comma = line.find(',');
    if (comma == std::string_view::npos) bad_line(line_no, "expected 'index,outcome'");
    std::size_t index = 0;
    const auto idx = line.substr(0, comma);
    const auto [ptr, ec] = std::from_chars(idx.data(), idx.data() + idx.size(), index);
    if (ec != std::errc{} || ptr != idx.data() + idx.size() || idx.empty()) bad_line(line_no, "bad index");
    if (index != file.trajectory.outcomes.size()) bad_line(line_no, "indices must be 0-based and contiguous");
    const auto token = line.substr(comma + 1);
    if (token == "on") {
      file.trajectory.outcomes.push_back(Outcome::On);
    } else if (token == "off") {
      file.trajectory.outcomes.push_back(Outcome::Off);
    } else {
      bad_line(line_no, "outcome must be 'on' or 'off'");
    }
  }
  if (file.trajectory.outcomes.empty()) {
    throw Error(ErrorKind::InvalidArgument, "trajectory file holds no records");
  }

  if (const auto model = header_value(file, "model")) {
    file.trajectory.model = parse_model(*model);
  }
  if (const auto seed = header_value(file, "seed")) {
    const auto [ptr, ec] = std::from_chars(seed->data(), seed->data() + seed->size(), file.trajectory.seed);
    if (ec != std::errc{} || ptr != seed->data() + seed->size()) {
      throw Error(ErrorKind::InvalidArgument, "trajectory header: bad seed");
    }
  }
  if (const auto n = header_value(file, "n"); n && *n != std::to_string(file.trajectory.size())) {
    throw Error(ErrorKind::InvalidArgument, "trajectory header: record count does not match 'n'");
  }
  return file;
}

std::optional<RunConfig> header_config(const TrajectoryFile& file) {
  std::string ini;
  std::string section;
  for (const auto& h : file.header) {
    if (!h.starts_with(kConfigPrefix)) continue;
    const std::string entry = h.substr(kConfigPrefix.size());
    const auto dot = entry.find('.');
    if (dot == std::string::npos) throw Error(ErrorKind::InvalidArgument, "trajectory header: bad config entry");
    const std::string sec = entry.substr(0, dot);
    if (sec != section) {
      ini += "[" + sec + "]\n";
      section = sec;
    }
    ini += entry.substr(dot + 1) + "\n";
  }
  if (ini.empty()) return std::nullopt;
  RunConfig config = parse_config(ini);
  if (const auto hash = header_value(file, "config_hash"); hash && *hash != config_hash(config)) {
    throw Error(ErrorKind::InvalidArgument, "trajectory header: config does not match its hash");
  }
  return config;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorKind::InvalidArgument, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorKind::InvalidArgument, "cannot move output into place at " + path.string());
  }
}

}  // namespace zeno
