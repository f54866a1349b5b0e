#pragma once

#include <optional>
#include <string>

#include "linetrace/runner.hpp"

namespace linetrace {

struct Stats {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct Metrics {
  // 1 / detect_time; informational only, depends on the host.
  std::optional<Stats> fps;
  Stats altitude;  // cruise frames only (takeoff excluded)
  std::optional<Stats> cross_track;   // needs the world
  std::optional<double> completion;   // needs the world
  // Pooled sample variance of frame-to-frame (cx, cy) increments over
  // consecutive frames that both carry a raw centroid.
  std::optional<double> raw_increment_variance;
  std::optional<double> filtered_increment_variance;
  int frames = 0;
  int cruise_frames = 0;
};

// Throws Error(kInvalidArgument) when the log has no cruise frames.
Metrics compute_metrics(const RunLog& log);
Metrics compute_metrics(const RunLog& log, const WorldSpec& world);

// FPS statistics from a list of per-frame durations (zeros skipped).
std::optional<Stats> fps_stats(const std::vector<double>& durations);

// Stable `key = value` text, six significant digits.
std::string format_metrics(const Metrics& m);

}  // namespace linetrace
