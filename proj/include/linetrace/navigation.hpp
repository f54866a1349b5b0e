#pragma once

#include <optional>
#include <string_view>

#include "linetrace/tracking.hpp"

namespace linetrace {

enum class NavCommand { kForward, kYawLeft, kYawRight, kSearch };

std::string_view to_string(NavCommand cmd) noexcept;
// Throws Error(kParse) for names other than Forward/YawLeft/YawRight/Search.
NavCommand nav_command_from_string(std::string_view name);

struct NavConfig {
  double forward_speed = 0.05;     // m/s
  double yaw_rate = 0.3;           // rad/s
  double search_yaw_rate = 0.2;    // rad/s
  double deadband_fraction = 0.1;  // of frame width, each side of center
  double target_altitude = 1.0;    // m
  double altitude_gain = 1.0;      // 1/s
  double max_climb_rate = 0.5;     // m/s

  void validate() const;
};

// Body frame. Negative yaw_rate turns left.
struct VelocitySetpoint {
  double vx_body = 0.0;
  double yaw_rate = 0.0;
  double vz = 0.0;

  friend bool operator==(const VelocitySetpoint&, const VelocitySetpoint&) = default;
};

NavCommand decide(const TrackedCentroid& tracked, int frame_width,
                  const NavConfig& cfg);

// Clamped proportional climb rate toward the target altitude.
double altitude_hold(const NavConfig& cfg, double current_altitude) noexcept;

VelocitySetpoint command_to_setpoint(NavCommand cmd, const NavConfig& cfg,
                                     double current_altitude);

struct NavOutput {
  NavCommand command;
  VelocitySetpoint setpoint;
};

NavOutput navigate_frame(const TrackedCentroid& tracked, int frame_width,
                         const NavConfig& cfg, double current_altitude);

}  // namespace linetrace
