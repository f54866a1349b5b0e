#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "linetrace/detection.hpp"
#include "linetrace/navigation.hpp"
#include "linetrace/simworld.hpp"
#include "linetrace/tracking.hpp"

namespace linetrace {

struct OutputConfig {
  std::filesystem::path dir = "out";
  int frame_stride = 0;  // 0 disables frame dumps
  bool plots = true;
};

// Everything a closed-loop run needs. The tracker's dt always follows
// sim.dt.
struct RunConfig {
  std::string world = "env1";  // env1 | env2 | path to a world file
  DetectionConfig detection;
  TrackerConfig tracker;
  NavConfig nav;
  SimConfig sim;
  CameraModel camera;
  OutputConfig outputs;
  // When false, wall-clock detection times are written to the log, which
  // makes it run-dependent.
  bool deterministic = true;

  void validate() const;
};

// Flat `section.key = value` text. Unknown keys are errors. A relative world
// path is resolved against `base_dir`.
RunConfig parse_run_config(std::string_view text,
                           const std::filesystem::path& base_dir = {});
// Throws Error(kIo) if the file (or a referenced world file) is missing.
RunConfig load_run_config(const std::filesystem::path& path);

// Applies one `key = value` assignment; same keys as the file format.
void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value);

// Full key listing in file format; parse_run_config(format_run_config(c))
// reproduces c.
std::string format_run_config(const RunConfig& cfg);

WorldSpec resolve_world(const RunConfig& cfg);

}  // namespace linetrace
