#include "linetrace/simworld.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "linetrace/error.hpp"
#include "text_format.hpp"

namespace linetrace {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kJoinTolerance = 1e-9;

// Angle offset from `from` to `to` measured in the increasing direction,
// in [0, 2pi).
double forward_offset(double from, double to) noexcept {
  double d = std::fmod(to - from, kTwoPi);
  if (d < 0.0) {
    d += kTwoPi;
  }
  return d;
}

double segment_distance(Vec2 p, const PathSegment& s) noexcept {
  const Vec2 d = s.end - s.start;
  const double len2 = dot(d, d);
  double t = 0.0;
  if (len2 > 0.0) {
    t = std::clamp(dot(p - s.start, d) / len2, 0.0, 1.0);
  }
  return norm(p - (s.start + t * d));
}

bool arc_spans(const PathArc& a, double angle) noexcept {
  const double off = a.direction == ArcDirection::kIncreasing
                         ? forward_offset(a.start_angle, angle)
                         : forward_offset(angle, a.start_angle);
  return off <= std::fabs(a.sweep());
}

double arc_distance(Vec2 p, const PathArc& a) noexcept {
  const Vec2 rel = p - a.center;
  const double d = norm(rel);
  if (d == 0.0) {
    return a.radius;
  }
  if (arc_spans(a, std::atan2(rel.y, rel.x))) {
    return std::fabs(d - a.radius);
  }
  return std::min(norm(p - a.start_point()), norm(p - a.end_point()));
}

// Same predicate as distance <= half_width, with the expensive branches
// skipped when they cannot matter.
bool within(Vec2 p, const PathElement& e, double half_width) noexcept {
  if (const auto* s = std::get_if<PathSegment>(&e)) {
    return segment_distance(p, *s) <= half_width;
  }
  const auto& a = std::get<PathArc>(e);
  const Vec2 rel = p - a.center;
  const double d = norm(rel);
  if (std::fabs(d - a.radius) > half_width) {
    return false;
  }
  return arc_distance(p, a) <= half_width;
}

struct Box {
  double min_x, min_y, max_x, max_y;

  bool overlaps(const Box& o) const noexcept {
    return min_x <= o.max_x && o.min_x <= max_x && min_y <= o.max_y &&
           o.min_y <= max_y;
  }
};

Box element_box(const PathElement& e, double pad) noexcept {
  if (const auto* s = std::get_if<PathSegment>(&e)) {
    return {std::min(s->start.x, s->end.x) - pad, std::min(s->start.y, s->end.y) - pad,
            std::max(s->start.x, s->end.x) + pad, std::max(s->start.y, s->end.y) + pad};
  }
  const auto& a = std::get<PathArc>(e);
  return {a.center.x - a.radius - pad, a.center.y - a.radius - pad,
          a.center.x + a.radius + pad, a.center.y + a.radius + pad};
}

template <typename PixelFn>
void for_each_pixel_floor(const WorldSpec& world, const MavState& state,
                          const CameraModel& cam, PixelFn&& fn) {
  cam.validate();
  if (!(state.z > 0.01)) {
    throw Error(ErrorKind::kDegenerate,
                "camera altitude " + text::format_sig(state.z) +
                    " m is too low for a floor projection (need > 0.01 m)");
  }
  const double half = world.line_width / 2.0;
  const int w = cam.image_width;
  const int h = cam.image_height;
  const double c = std::cos(state.yaw);
  const double s = std::sin(state.yaw);

  // Cull elements against the footprint.
  Box footprint{1e300, 1e300, -1e300, -1e300};
  for (int corner = 0; corner < 4; ++corner) {
    const Vec2 p = pixel_to_floor(cam, state, (corner & 1) ? w - 1 : 0,
                                  (corner & 2) ? h - 1 : 0);
    footprint.min_x = std::min(footprint.min_x, p.x);
    footprint.min_y = std::min(footprint.min_y, p.y);
    footprint.max_x = std::max(footprint.max_x, p.x);
    footprint.max_y = std::max(footprint.max_y, p.y);
  }
  // Pixel pitch on the floor is largest at the top row.
  const double far_pixel = cam.floor_offset(w / 2.0 + 1.0, 0.5, state.z).y;
  std::vector<const PathElement*> visible;
  for (const auto& e : world.path) {
    if (element_box(e, half + far_pixel).overlaps(footprint)) {
      visible.push_back(&e);
    }
  }

  for (int v = 0; v < h; ++v) {
    // Along a row the forward offset is constant and right is linear in u.
    const Vec2 row = cam.floor_offset(w / 2.0, v + 0.5, state.z);
    const double fwd = row.x;
    const double row_scale = cam.floor_offset(w / 2.0 + 1.0, v + 0.5, state.z).y;
    for (int u = 0; u < w; ++u) {
      const double right = (u + 0.5 - w / 2.0) * row_scale;
      const Vec2 p{state.x + fwd * c - right * s, state.y + fwd * s + right * c};
      bool on_line = false;
      for (const PathElement* e : visible) {
        if (within(p, *e, half)) {
          on_line = true;
          break;
        }
      }
      fn(u, v, on_line);
    }
  }
}

}  // namespace

double norm(Vec2 v) noexcept { return std::sqrt(v.x * v.x + v.y * v.y); }
double dot(Vec2 a, Vec2 b) noexcept { return a.x * b.x + a.y * b.y; }

double PathSegment::length() const noexcept { return norm(end - start); }

Vec2 PathSegment::point_at(double s) const noexcept {
  const double len = length();
  if (len == 0.0) {
    return start;
  }
  return start + (s / len) * (end - start);
}

double PathArc::sweep() const noexcept {
  if (direction == ArcDirection::kIncreasing) {
    const double d = forward_offset(start_angle, end_angle);
    return d == 0.0 ? kTwoPi : d;
  }
  const double d = forward_offset(end_angle, start_angle);
  return d == 0.0 ? -kTwoPi : -d;
}

double PathArc::length() const noexcept { return radius * std::fabs(sweep()); }

Vec2 PathArc::point_at(double s) const noexcept {
  const double sign = direction == ArcDirection::kIncreasing ? 1.0 : -1.0;
  const double angle = start_angle + sign * s / radius;
  return center + radius * Vec2{std::cos(angle), std::sin(angle)};
}

Vec2 PathArc::start_point() const noexcept {
  return center + radius * Vec2{std::cos(start_angle), std::sin(start_angle)};
}

Vec2 PathArc::end_point() const noexcept {
  return center + radius * Vec2{std::cos(end_angle), std::sin(end_angle)};
}

double element_length(const PathElement& e) noexcept {
  return std::visit([](const auto& el) { return el.length(); }, e);
}

Vec2 element_start(const PathElement& e) noexcept {
  if (const auto* s = std::get_if<PathSegment>(&e)) {
    return s->start;
  }
  return std::get<PathArc>(e).start_point();
}

Vec2 element_end(const PathElement& e) noexcept {
  if (const auto* s = std::get_if<PathSegment>(&e)) {
    return s->end;
  }
  return std::get<PathArc>(e).end_point();
}

Vec2 element_point_at(const PathElement& e, double s) noexcept {
  return std::visit([s](const auto& el) { return el.point_at(s); }, e);
}

double distance_to_element(Vec2 p, const PathElement& e) noexcept {
  if (const auto* s = std::get_if<PathSegment>(&e)) {
    return segment_distance(p, *s);
  }
  return arc_distance(p, std::get<PathArc>(e));
}

void WorldSpec::validate() const {
  if (path.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "world path is empty");
  }
  if (!(line_width > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "line_width must be > 0");
  }
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (const auto* a = std::get_if<PathArc>(&path[i])) {
      if (!(a->radius > line_width / 2.0)) {
        throw Error(ErrorKind::kInvalidArgument,
                    "arc radius must exceed half the line width");
      }
    } else if (std::get<PathSegment>(path[i]).length() == 0.0) {
      throw Error(ErrorKind::kInvalidArgument, "zero-length path segment");
    }
    if (i > 0 && norm(element_start(path[i]) - element_end(path[i - 1])) >
                     kJoinTolerance) {
      throw Error(ErrorKind::kInvalidArgument,
                  "path element " + std::to_string(i) +
                      " does not start where the previous one ends");
    }
  }
  if (!(bounds.min_x < bounds.max_x && bounds.min_y < bounds.max_y)) {
    throw Error(ErrorKind::kInvalidArgument, "world bounds are empty");
  }
}

double WorldSpec::path_length() const noexcept {
  double total = 0.0;
  for (const auto& e : path) {
    total += element_length(e);
  }
  return total;
}

Vec2 WorldSpec::start_point() const {
  if (path.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "world path is empty");
  }
  return element_start(path.front());
}

Vec2 WorldSpec::end_point() const {
  if (path.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "world path is empty");
  }
  return element_end(path.back());
}

double WorldSpec::start_heading() const {
  if (path.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "world path is empty");
  }
  if (const auto* s = std::get_if<PathSegment>(&path.front())) {
    const Vec2 d = s->end - s->start;
    return std::atan2(d.y, d.x);
  }
  const auto& a = std::get<PathArc>(path.front());
  const double sign = a.direction == ArcDirection::kIncreasing ? 1.0 : -1.0;
  return wrap_angle(std::atan2(sign * std::cos(a.start_angle),
                               -sign * std::sin(a.start_angle)));
}

void CameraModel::validate() const {
  if (image_width < 16 || image_height < 16) {
    throw Error(ErrorKind::kInvalidArgument, "camera must be at least 16x16 pixels");
  }
  if (!(vertical_fov > 0.0 && vertical_fov < std::numbers::pi)) {
    throw Error(ErrorKind::kInvalidArgument, "vertical_fov must lie in (0, pi)");
  }
  if (!(pitch >= 0.0 && pitch + vertical_fov / 2.0 < 80.0 * std::numbers::pi / 180.0)) {
    throw Error(ErrorKind::kInvalidArgument,
                "camera pitch must be >= 0 with pitch + vfov/2 < 80 degrees");
  }
}

double CameraModel::focal_px() const noexcept {
  return (image_height / 2.0) / std::tan(vertical_fov / 2.0);
}

Vec2 CameraModel::floor_offset(double px, double py, double z) const noexcept {
  // Ray through the image point in body axes, intersected with the floor.
  const double f = focal_px();
  const double up = image_height / 2.0 - py;
  const double c = std::cos(pitch);
  const double s = std::sin(pitch);
  const double t = z / (f * c - up * s);
  return {t * (f * s + up * c), t * (px - image_width / 2.0)};
}

void SimConfig::validate() const {
  if (!(dt > 0.0) || !(duration_max > 0.0) || !(velocity_time_constant >= 0.0) ||
      !(pixel_noise_sigma >= 0.0)) {
    throw Error(ErrorKind::kInvalidArgument,
                "sim config: dt, duration_max > 0; time constant, noise >= 0");
  }
}

WorldSpec build_environment(EnvironmentId id) {
  WorldSpec world;
  if (id == EnvironmentId::kEnv1) {
    // Rectilinear route with right, left, right, right corners.
    const std::vector<Vec2> corners{{0.0, 0.0}, {3.5, 0.0}, {3.5, 2.0},
                                    {6.0, 2.0}, {6.0, 4.5}, {2.0, 4.5}};
    for (std::size_t i = 1; i < corners.size(); ++i) {
      world.path.emplace_back(PathSegment{corners[i - 1], corners[i]});
    }
    world.bounds = {-1.0, -1.0, 7.0, 5.5};
  } else {
    // A belt around a 3 m circle and a 1.5 m circle 3 m apart: one large
    // arc, one inner arc, joined by their external tangents. The external
    // tangent normals sit at +-acos((R - r) / D) = +-60 degrees.
    const double big_r = 3.0;
    const double small_r = 1.5;
    const Vec2 big_c{0.0, 0.0};
    const Vec2 small_c{3.0, 0.0};
    auto on = [](Vec2 c, double r, double deg) {
      return c + r * Vec2{std::cos(deg * kDeg), std::sin(deg * kDeg)};
    };
    world.path.emplace_back(
        PathArc{big_c, big_r, -90.0 * kDeg, -60.0 * kDeg, ArcDirection::kIncreasing});
    world.path.emplace_back(
        PathSegment{on(big_c, big_r, -60.0), on(small_c, small_r, -60.0)});
    world.path.emplace_back(
        PathArc{small_c, small_r, -60.0 * kDeg, 60.0 * kDeg, ArcDirection::kIncreasing});
    world.path.emplace_back(
        PathSegment{on(small_c, small_r, 60.0), on(big_c, big_r, 60.0)});
    world.path.emplace_back(
        PathArc{big_c, big_r, 60.0 * kDeg, 270.0 * kDeg, ArcDirection::kIncreasing});
    world.bounds = {-3.5, -3.5, 5.0, 3.5};
  }
  world.validate();
  return world;
}

WorldSpec build_environment(std::string_view id) {
  if (id == "env1") {
    return build_environment(EnvironmentId::kEnv1);
  }
  if (id == "env2") {
    return build_environment(EnvironmentId::kEnv2);
  }
  throw Error(ErrorKind::kInvalidArgument,
              "unknown environment '" + std::string(id) + "' (expected env1 or env2)");
}

double wrap_angle(double angle) noexcept {
  double a = std::fmod(angle + std::numbers::pi, kTwoPi);
  if (a <= 0.0) {
    a += kTwoPi;
  }
  return a - std::numbers::pi;
}

MavState step_dynamics(const MavState& state, const VelocitySetpoint& sp,
                       const SimConfig& cfg) {
  const double dt = cfg.dt;
  const double tau = cfg.velocity_time_constant;
  const double alpha = tau > 0.0 ? std::min(1.0, dt / tau) : 1.0;

  MavState next = state;
  next.vx_body += alpha * (sp.vx_body - state.vx_body);
  next.yaw_rate += alpha * (sp.yaw_rate - state.yaw_rate);
  next.vz += alpha * (sp.vz - state.vz);

  next.x += next.vx_body * std::cos(state.yaw) * dt;
  next.y += next.vx_body * std::sin(state.yaw) * dt;
  next.yaw = wrap_angle(state.yaw + next.yaw_rate * dt);
  next.z = std::max(0.0, state.z + next.vz * dt);
  return next;
}

Vec2 pixel_to_floor(const CameraModel& cam, const MavState& state, int u, int v) {
  const Vec2 off = cam.floor_offset(u + 0.5, v + 0.5, state.z);
  const double fwd = off.x;
  const double right = off.y;
  const double c = std::cos(state.yaw);
  const double s = std::sin(state.yaw);
  return {state.x + fwd * c - right * s, state.y + fwd * s + right * c};
}

RgbImage render_camera(const WorldSpec& world, const MavState& state,
                       const CameraModel& cam, RenderNoise noise) {
  RgbImage img(cam.image_width, cam.image_height, world.floor_color);
  for_each_pixel_floor(world, state, cam, [&](int u, int v, bool on_line) {
    if (on_line) {
      img.at(u, v) = world.line_color;
    }
  });
  if (noise.sigma > 0.0) {
    std::mt19937_64 rng(noise.seed);
    std::normal_distribution<double> gauss(0.0, noise.sigma);
    auto jitter = [&](std::uint8_t c) {
      const double v = std::round(c + gauss(rng));
      return static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
    };
    for (Rgb& px : img.data()) {
      px.r = jitter(px.r);
      px.g = jitter(px.g);
      px.b = jitter(px.b);
    }
  }
  return img;
}

BinaryMask render_ground_truth(const WorldSpec& world, const MavState& state,
                               const CameraModel& cam) {
  BinaryMask mask(cam.image_width, cam.image_height);
  for_each_pixel_floor(world, state, cam, [&](int u, int v, bool on_line) {
    mask.at(u, v) = on_line ? 1 : 0;
  });
  return mask;
}

double cross_track_error(Vec2 position, const WorldSpec& world) {
  if (world.path.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "world path is empty");
  }
  double best = std::numeric_limits<double>::infinity();
  for (const auto& e : world.path) {
    best = std::min(best, distance_to_element(position, e));
  }
  return best;
}

PathProgress::PathProgress(const WorldSpec& world, double spacing)
    : length_(world.path_length()),
      line_width_(world.line_width),
      end_(world.end_point()) {
  double base = 0.0;
  for (const auto& e : world.path) {
    const double len = element_length(e);
    const int n = std::max(1, static_cast<int>(std::ceil(len / spacing)));
    for (int j = 0; j < n; ++j) {
      const double s = len * j / n;
      samples_.push_back(element_point_at(e, s));
      arclength_.push_back(base + s);
    }
    base += len;
  }
  samples_.push_back(end_);
  arclength_.push_back(length_);
}

void PathProgress::observe(Vec2 position) {
  constexpr double kBehind = 0.5;
  constexpr double kAhead = 1.0;
  constexpr double kCapture = 0.5;
  const auto lo = std::lower_bound(arclength_.begin(), arclength_.end(),
                                   progress_ - kBehind) - arclength_.begin();
  // The end sample is reached only through the completion test below, so an
  // unfinished run never reports a full fraction.
  const auto last = static_cast<std::ptrdiff_t>(arclength_.size()) - 1;
  const auto hi = std::min(last, std::upper_bound(arclength_.begin(), arclength_.end(),
                                                  progress_ + kAhead) -
                                     arclength_.begin());
  double best = std::numeric_limits<double>::infinity();
  std::ptrdiff_t best_i = -1;
  for (auto i = lo; i < hi; ++i) {
    const double d = norm(samples_[static_cast<std::size_t>(i)] - position);
    if (d < best) {
      best = d;
      best_i = i;
    }
  }
  if (best_i >= 0 && best <= kCapture) {
    progress_ = std::max(progress_, arclength_[static_cast<std::size_t>(best_i)]);
  }
  if (!completed_ && progress_ >= 0.9 * length_ &&
      norm(position - end_) <= line_width_) {
    completed_ = true;
  }
}

double PathProgress::fraction() const noexcept {
  if (completed_) {
    return 1.0;
  }
  return length_ > 0.0 ? std::min(1.0, progress_ / length_) : 0.0;
}

std::string emit_world(const WorldSpec& world) {
  std::ostringstream out;
  auto rgb = [](Rgb c) {
    return std::to_string(c.r) + " " + std::to_string(c.g) + " " + std::to_string(c.b);
  };
  auto pt = [](Vec2 p) { return text::format_exact(p.x) + " " + text::format_exact(p.y); };
  auto deg = [](double rad) { return text::format_sig(rad / kDeg, 15); };

  out << "# linetrace world file: lengths in meters, angles in degrees\n";
  out << "[world]\n";
  out << "line_width = " << text::format_exact(world.line_width) << "\n";
  out << "line_color = " << rgb(world.line_color) << "\n";
  out << "floor_color = " << rgb(world.floor_color) << "\n";
  out << "bounds = " << text::format_exact(world.bounds.min_x) << " "
      << text::format_exact(world.bounds.min_y) << " "
      << text::format_exact(world.bounds.max_x) << " "
      << text::format_exact(world.bounds.max_y) << "\n";
  for (const auto& e : world.path) {
    out << "\n";
    if (const auto* s = std::get_if<PathSegment>(&e)) {
      out << "[path.segment]\n";
      out << "start = " << pt(s->start) << "\n";
      out << "end = " << pt(s->end) << "\n";
    } else {
      const auto& a = std::get<PathArc>(e);
      out << "[path.arc]\n";
      out << "center = " << pt(a.center) << "\n";
      out << "radius = " << text::format_exact(a.radius) << "\n";
      out << "start_angle = " << deg(a.start_angle) << "\n";
      out << "end_angle = " << deg(a.end_angle) << "\n";
      out << "direction = "
          << (a.direction == ArcDirection::kIncreasing ? "increasing" : "decreasing")
          << "\n";
    }
  }
  return out.str();
}

WorldSpec parse_world(std::string_view source) {
  const auto entries = text::parse_entries(source);

  // Group entries by section occurrence, keeping file order.
  struct Section {
    std::string name;
    std::map<std::string, std::string> values;
    int line = 0;
  };
  std::vector<Section> sections;
  int current_id = -1;
  for (const auto& e : entries) {
    if (e.section.empty()) {
      throw Error(ErrorKind::kParse, "line " + std::to_string(e.line) +
                                         ": key outside of a section");
    }
    if (e.section_id != current_id) {
      sections.push_back({e.section, {}, e.line});
      current_id = e.section_id;
    }
    if (!sections.back().values.emplace(e.key, e.value).second) {
      throw Error(ErrorKind::kParse, "line " + std::to_string(e.line) +
                                         ": duplicate key '" + e.key + "'");
    }
  }

  WorldSpec world;
  bool saw_world = false;
  for (auto& sec : sections) {
    auto take = [&](const std::string& key) {
      auto it = sec.values.find(key);
      if (it == sec.values.end()) {
        throw Error(ErrorKind::kParse, "section [" + sec.name + "] near line " +
                                           std::to_string(sec.line) +
                                           ": missing key '" + key + "'");
      }
      std::string v = it->second;
      sec.values.erase(it);
      return v;
    };
    auto take_point = [&](const std::string& key) {
      const auto v = text::parse_doubles(take(key), 2, key);
      return Vec2{v[0], v[1]};
    };
    auto take_rgb = [&](const std::string& key) {
      const auto v = text::parse_doubles(take(key), 3, key);
      for (double c : v) {
        if (c < 0 || c > 255 || c != std::floor(c)) {
          throw Error(ErrorKind::kParse, key + " components must be integers in [0,255]");
        }
      }
      return Rgb{static_cast<std::uint8_t>(v[0]), static_cast<std::uint8_t>(v[1]),
                 static_cast<std::uint8_t>(v[2])};
    };

    if (sec.name == "world") {
      if (saw_world) {
        throw Error(ErrorKind::kParse, "duplicate [world] section");
      }
      saw_world = true;
      // every key in [world] is optional
      if (sec.values.count("line_width")) {
        world.line_width = text::parse_double(take("line_width"), "line_width");
      }
      if (sec.values.count("line_color")) {
        world.line_color = take_rgb("line_color");
      }
      if (sec.values.count("floor_color")) {
        world.floor_color = take_rgb("floor_color");
      }
      if (sec.values.count("bounds")) {
        const auto b = text::parse_doubles(take("bounds"), 4, "bounds");
        world.bounds = {b[0], b[1], b[2], b[3]};
      }
    } else if (sec.name == "path.segment") {
      const Vec2 start = take_point("start");
      const Vec2 end = take_point("end");
      world.path.emplace_back(PathSegment{start, end});
    } else if (sec.name == "path.arc") {
      PathArc arc;
      arc.center = take_point("center");
      arc.radius = text::parse_double(take("radius"), "radius");
      arc.start_angle = text::parse_double(take("start_angle"), "start_angle") * kDeg;
      arc.end_angle = text::parse_double(take("end_angle"), "end_angle") * kDeg;
      const std::string dir = take("direction");
      if (dir == "increasing") {
        arc.direction = ArcDirection::kIncreasing;
      } else if (dir == "decreasing") {
        arc.direction = ArcDirection::kDecreasing;
      } else {
        throw Error(ErrorKind::kParse,
                    "arc direction must be 'increasing' or 'decreasing', got '" + dir + "'");
      }
      world.path.emplace_back(arc);
    } else {
      throw Error(ErrorKind::kParse, "unknown section [" + sec.name + "]");
    }
    if (!sec.values.empty()) {
      throw Error(ErrorKind::kParse, "section [" + sec.name + "] near line " +
                                         std::to_string(sec.line) + ": unknown key '" +
                                         sec.values.begin()->first + "'");
    }
  }
  try {
    world.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::kParse, std::string("invalid world: ") + e.what());
  }
  return world;
}

WorldSpec load_world_file(const std::filesystem::path& path) {
  return parse_world(text::read_file(path));
}

}  // namespace linetrace
