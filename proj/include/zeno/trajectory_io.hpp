#pragma once

// Line-oriented ASCII record of probe results:
//
//   # zeno-trajectory v1
//   # generator: splitmix64-counter/v1
//   # model: zeno
//   # seed: 42
//   # n: 500
//   # config_hash: 1f0c...
//   # config: drive.omega_rad_per_s = ...
//   0,on
//   1,off
//
// Header lines are optional on input and kept verbatim. Records use 0-based
// contiguous indices and lowercase "on"/"off".

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "zeno/config.hpp"
#include "zeno/trajectory.hpp"

namespace zeno {

struct TrajectoryFile {
  std::vector<std::string> header;  // without the leading "# "
  Trajectory trajectory;
};

TrajectoryFile make_trajectory_file(const Trajectory& trajectory, const RunConfig& config);

std::string serialize(const TrajectoryFile& file);

// Throws InvalidArgument naming the offending line number.
TrajectoryFile parse_trajectory_file(std::string_view text);

// The configuration recorded in the header, if it carries one.
std::optional<RunConfig> header_config(const TrajectoryFile& file);

std::string read_text_file(const std::filesystem::path& path);

// Writes to a sibling temporary and renames it over the target.
void write_text_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace zeno
