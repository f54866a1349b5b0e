#include "linetrace/navigation.hpp"

#include <algorithm>
#include <string>

#include "linetrace/error.hpp"

namespace linetrace {

std::string_view to_string(NavCommand cmd) noexcept {
  switch (cmd) {
    case NavCommand::kForward:
      return "Forward";
    case NavCommand::kYawLeft:
      return "YawLeft";
    case NavCommand::kYawRight:
      return "YawRight";
    case NavCommand::kSearch:
      return "Search";
  }
  return "Search";
}

NavCommand nav_command_from_string(std::string_view name) {
  for (NavCommand cmd : {NavCommand::kForward, NavCommand::kYawLeft,
                         NavCommand::kYawRight, NavCommand::kSearch}) {
    if (to_string(cmd) == name) {
      return cmd;
    }
  }
  throw Error(ErrorKind::kParse,
              "unknown navigation command '" + std::string(name) + "'");
}

void NavConfig::validate() const {
  if (!(forward_speed > 0.0) || !(yaw_rate > 0.0) || !(search_yaw_rate > 0.0) ||
      !(altitude_gain > 0.0) || !(max_climb_rate > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "navigation rates must be > 0");
  }
  if (!(deadband_fraction > 0.0 && deadband_fraction < 0.5)) {
    throw Error(ErrorKind::kInvalidArgument,
                "deadband_fraction must lie in (0, 0.5)");
  }
}

NavCommand decide(const TrackedCentroid& tracked, int frame_width,
                  const NavConfig& cfg) {
  if (frame_width < 1) {
    throw Error(ErrorKind::kInvalidArgument, "frame_width must be >= 1");
  }
  if (!tracked.valid) {
    return NavCommand::kSearch;
  }
  const double center = frame_width / 2.0;
  const double band = cfg.deadband_fraction * frame_width;
  if (tracked.cx < center - band) {
    return NavCommand::kYawLeft;
  }
  if (tracked.cx > center + band) {
    return NavCommand::kYawRight;
  }
  return NavCommand::kForward;
}

double altitude_hold(const NavConfig& cfg, double current_altitude) noexcept {
  return std::clamp(cfg.altitude_gain * (cfg.target_altitude - current_altitude),
                    -cfg.max_climb_rate, cfg.max_climb_rate);
}

VelocitySetpoint command_to_setpoint(NavCommand cmd, const NavConfig& cfg,
                                     double current_altitude) {
  VelocitySetpoint sp;
  switch (cmd) {
    case NavCommand::kForward:
      sp.vx_body = cfg.forward_speed;
      break;
    case NavCommand::kYawLeft:
      sp.yaw_rate = -cfg.yaw_rate;
      break;
    case NavCommand::kYawRight:
      sp.yaw_rate = cfg.yaw_rate;
      break;
    case NavCommand::kSearch:
      // hover and turn right until a line shows up
      sp.yaw_rate = cfg.search_yaw_rate;
      break;
  }
  sp.vz = altitude_hold(cfg, current_altitude);
  return sp;
}

NavOutput navigate_frame(const TrackedCentroid& tracked, int frame_width,
                         const NavConfig& cfg, double current_altitude) {
  const NavCommand cmd = decide(tracked, frame_width, cfg);
  return {cmd, command_to_setpoint(cmd, cfg, current_altitude)};
}

}  // namespace linetrace
