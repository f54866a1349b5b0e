#pragma once

#include <optional>
#include <string>
#include <vector>

#include "linetrace/config.hpp"

namespace linetrace {

enum class RunStatus { kCompleted, kMaxDuration, kError };

std::string_view to_string(RunStatus status) noexcept;

struct FrameRecord {
  int frame = 0;
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double yaw = 0.0;
  std::optional<Centroid> raw;
  std::optional<Centroid> filtered;
  bool valid = false;
  // Absent during takeoff, when the vehicle climbs in place without
  // looking at the floor.
  std::optional<NavCommand> command;
  VelocitySetpoint setpoint;
  std::optional<double> detect_time;
};

struct RunLog {
  double dt = 0.1;
  std::vector<FrameRecord> frames;
  RunStatus status = RunStatus::kMaxDuration;
  std::string message;
  // Wall-clock detection time per cruise frame. Kept out of `frames` in
  // deterministic mode so the log stays reproducible.
  std::vector<double> wall_detect_times;
};

// Takeoff to nav.target_altitude, then render -> detect -> track ->
// navigate -> step once per sim.dt until the path is completed or
// sim.duration_max elapses. A renderer failure ends the run with
// RunStatus::kError and the frame index in `message`. Frame dumps go to
// outputs.dir/frames when outputs.frame_stride > 0.
RunLog run_simulation(const RunConfig& cfg);
RunLog run_simulation(const RunConfig& cfg, const WorldSpec& world);

// Per-frame detection seed derived from the run seed.
std::uint64_t frame_seed(std::uint64_t run_seed, int frame) noexcept;

}  // namespace linetrace
