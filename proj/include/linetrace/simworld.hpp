#pragma once

#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "linetrace/imaging.hpp"
#include "linetrace/navigation.hpp"

namespace linetrace {

// World frame: x forward at yaw 0, y to the right of x, z up (altitude).
// Yaw increases turning right, so a negative yaw rate is a left turn.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

double norm(Vec2 v) noexcept;
double dot(Vec2 a, Vec2 b) noexcept;

struct PathSegment {
  Vec2 start;
  Vec2 end;

  double length() const noexcept;
  Vec2 point_at(double s) const noexcept;  // s in [0, length]
};

// kIncreasing walks the arc with growing angle, kDecreasing the opposite way.
enum class ArcDirection { kIncreasing, kDecreasing };

struct PathArc {
  Vec2 center;
  double radius = 1.0;
  double start_angle = 0.0;  // rad
  double end_angle = 0.0;    // rad
  ArcDirection direction = ArcDirection::kIncreasing;

  // Signed sweep in (-2pi, 2pi], positive for kIncreasing.
  double sweep() const noexcept;
  double length() const noexcept;
  Vec2 point_at(double s) const noexcept;  // s in [0, length]
  Vec2 start_point() const noexcept;
  Vec2 end_point() const noexcept;
};

using PathElement = std::variant<PathSegment, PathArc>;

double element_length(const PathElement& e) noexcept;
Vec2 element_start(const PathElement& e) noexcept;
Vec2 element_end(const PathElement& e) noexcept;
Vec2 element_point_at(const PathElement& e, double s) noexcept;
// Exact Euclidean distance from p to the element.
double distance_to_element(Vec2 p, const PathElement& e) noexcept;

struct Bounds {
  double min_x = -1.0;
  double min_y = -1.0;
  double max_x = 1.0;
  double max_y = 1.0;
};

struct WorldSpec {
  std::vector<PathElement> path;
  double line_width = 0.15;  // m
  Rgb line_color{255, 255, 0};
  Rgb floor_color{128, 128, 128};
  Bounds bounds;

  // Throws Error(kInvalidArgument) for an empty path, a gap between
  // consecutive elements (> 1e-9 m), or an arc not wider than the line.
  void validate() const;
  double path_length() const noexcept;
  Vec2 start_point() const;
  Vec2 end_point() const;
  // Heading of the path tangent at its start, in the yaw convention above.
  double start_heading() const;
};

struct MavState {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double yaw = 0.0;       // (-pi, pi]
  double vx_body = 0.0;   // m/s, actual
  double yaw_rate = 0.0;  // rad/s, actual
  double vz = 0.0;        // m/s, actual
};

// Pinhole camera looking down at the floor. Image up is body forward and
// image right is body right. `pitch` tilts the optical axis forward from
// nadir so the image shows more floor ahead of the vehicle than behind it.
struct CameraModel {
  int image_width = 640;
  int image_height = 480;
  double vertical_fov = std::numbers::pi / 3.0;
  double pitch = 20.0 * std::numbers::pi / 180.0;

  // pitch + vertical_fov / 2 must stay below 80 degrees so every pixel sees
  // the floor.
  void validate() const;
  double focal_px() const noexcept;
  // Body-frame floor offset (forward, right) in meters of the image point
  // (px, py), measured in pixels from the top-left corner, at altitude z.
  Vec2 floor_offset(double px, double py, double z) const noexcept;
};

struct SimConfig {
  double dt = 0.1;
  double duration_max = 1500.0;
  double velocity_time_constant = 0.3;
  double pixel_noise_sigma = 0.0;
  std::uint64_t rng_seed = 1;

  void validate() const;
};

enum class EnvironmentId { kEnv1, kEnv2 };

WorldSpec build_environment(EnvironmentId id);
// Accepts "env1" or "env2"; throws Error(kInvalidArgument) otherwise.
WorldSpec build_environment(std::string_view id);

double wrap_angle(double angle) noexcept;

MavState step_dynamics(const MavState& state, const VelocitySetpoint& sp,
                       const SimConfig& cfg);

// Floor point seen through the center of pixel (u, v).
Vec2 pixel_to_floor(const CameraModel& cam, const MavState& state, int u, int v);

struct RenderNoise {
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

// Throws Error(kDegenerate) when state.z <= 0.01 m.
RgbImage render_camera(const WorldSpec& world, const MavState& state,
                       const CameraModel& cam, RenderNoise noise = {});
// Pixels whose floor projection lies within line_width / 2 of the path.
BinaryMask render_ground_truth(const WorldSpec& world, const MavState& state,
                               const CameraModel& cam);

double cross_track_error(Vec2 position, const WorldSpec& world);

// Arclength progress along the path, non-decreasing over observations.
class PathProgress {
 public:
  explicit PathProgress(const WorldSpec& world, double spacing = 0.01);

  void observe(Vec2 position);
  double traversed() const noexcept { return progress_; }
  // 1.0 once completed, traversed / length otherwise.
  double fraction() const noexcept;
  // Within line_width of the final path point after covering >= 90 %.
  bool completed() const noexcept { return completed_; }

 private:
  std::vector<Vec2> samples_;
  std::vector<double> arclength_;
  double length_;
  double line_width_;
  Vec2 end_;
  double progress_ = 0.0;
  bool completed_ = false;
};

// Text world file: [world] section plus ordered [path.segment] / [path.arc]
// sections. Lengths in meters, angles in degrees.
std::string emit_world(const WorldSpec& world);
WorldSpec parse_world(std::string_view text);
WorldSpec load_world_file(const std::filesystem::path& path);

}  // namespace linetrace
