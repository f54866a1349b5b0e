#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "linetrace/error.hpp"
#include "linetrace/simworld.hpp"
#include "oracles.hpp"

using namespace linetrace;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

WorldSpec straight_x() {
  WorldSpec w;
  w.path.emplace_back(PathSegment{{-5, 0}, {5, 0}});
  w.bounds = {-6, -6, 6, 6};
  return w;
}

MavState hover(double x, double y, double z, double yaw = 0.0) {
  MavState s;
  s.x = x;
  s.y = y;
  s.z = z;
  s.yaw = yaw;
  return s;
}

// Centre column of the yellow run in image row v, or NaN.
double stripe_center(const RgbImage& img, int v, Rgb line = {255, 255, 0}) {
  int lo = -1, hi = -1;
  for (int u = 0; u < img.width(); ++u)
    if (img.at(u, v) == line) {
      if (lo < 0) lo = u;
      hi = u;
    }
  return lo < 0 ? NAN : 0.5 * (lo + hi);
}

int stripe_width(const RgbImage& img, int v) {
  int n = 0;
  for (int u = 0; u < img.width(); ++u) n += img.at(u, v) == Rgb{255, 255, 0};
  return n;
}

double heading_of(Vec2 a, Vec2 b) { return std::atan2(b.y - a.y, b.x - a.x); }

}  // namespace

TEST(Environment, Env1IsRectilinearWithRightAngleCorners) {
  const WorldSpec w = build_environment("env1");
  ASSERT_GE(w.path.size(), 4u);
  for (size_t i = 1; i < w.path.size(); ++i) {
    const auto& a = std::get<PathSegment>(w.path[i - 1]);
    const auto& b = std::get<PathSegment>(w.path[i]);
    const double turn = wrap_angle(heading_of(b.start, b.end) - heading_of(a.start, a.end));
    EXPECT_NEAR(std::fabs(turn), kPi / 2, 1e-12);
    EXPECT_EQ(a.end, b.start);
  }
  EXPECT_EQ(w.start_point(), (Vec2{0, 0}));
  EXPECT_DOUBLE_EQ(w.start_heading(), 0.0);
  EXPECT_GT(w.path_length(), 10.0);
}

TEST(Environment, Env2IsClosedWithTwoRadii) {
  const WorldSpec w = build_environment("env2");
  const Vec2 a = w.start_point(), b = w.end_point();
  EXPECT_NEAR(a.x, b.x, 1e-9);
  EXPECT_NEAR(a.y, b.y, 1e-9);
  std::set<double> radii;
  for (const auto& e : w.path)
    if (const auto* arc = std::get_if<PathArc>(&e)) radii.insert(arc->radius);
  EXPECT_GE(radii.size(), 2u);
  EXPECT_TRUE(radii.count(3.0) && radii.count(1.5));
  // every arc turns the same way, so the heading trends monotonically
  for (const auto& e : w.path)
    if (const auto* arc = std::get_if<PathArc>(&e)) EXPECT_GT(arc->sweep(), 0.0);
}

TEST(Environment, UnknownIdRejected) {
  EXPECT_THROW(build_environment("env3"), Error);
}

TEST(WorldValidate, RejectsGapsThinArcsAndEmptyPaths) {
  WorldSpec w;
  EXPECT_THROW(w.validate(), Error);
  w.path.emplace_back(PathSegment{{0, 0}, {1, 0}});
  w.path.emplace_back(PathSegment{{1, 0.01}, {2, 0}});
  EXPECT_THROW(w.validate(), Error);
  WorldSpec thin;
  thin.path.emplace_back(PathArc{{0, 0}, 0.05, 0, kPi, ArcDirection::kIncreasing});
  EXPECT_THROW(thin.validate(), Error);
}

TEST(Arc, LengthAndEndpoints) {
  const PathArc inc{{1, 2}, 2.0, 0.0, kPi / 2, ArcDirection::kIncreasing};
  EXPECT_NEAR(inc.length(), kPi, 1e-12);
  EXPECT_NEAR(inc.end_point().x, 1.0, 1e-12);
  EXPECT_NEAR(inc.end_point().y, 4.0, 1e-12);
  const PathArc dec{{0, 0}, 1.0, 0.0, kPi / 2, ArcDirection::kDecreasing};
  EXPECT_NEAR(dec.sweep(), -1.5 * kPi, 1e-12);
  const Vec2 mid = dec.point_at(dec.length() / 3);  // angle -pi/2
  EXPECT_NEAR(mid.x, 0.0, 1e-12);
  EXPECT_NEAR(mid.y, -1.0, 1e-12);
}

TEST(CrossTrack, OnPathAndPerpendicular) {
  const WorldSpec w = build_environment("env1");
  EXPECT_NEAR(cross_track_error({1.7, 0.0}, w), 0.0, 1e-15);
  EXPECT_NEAR(cross_track_error({1.7, 0.25}, w), 0.25, 1e-12);
  EXPECT_NEAR(cross_track_error({-1.0, 0.0}, w), 1.0, 1e-12);
}

TEST(CrossTrack, MatchesDenseSampling) {
  std::mt19937_64 rng(17);
  for (const char* id : {"env1", "env2"}) {
    const WorldSpec w = build_environment(id);
    std::uniform_real_distribution<double> ux(w.bounds.min_x, w.bounds.max_x);
    std::uniform_real_distribution<double> uy(w.bounds.min_y, w.bounds.max_y);
    for (int i = 0; i < 60; ++i) {
      const Vec2 p{ux(rng), uy(rng)};
      EXPECT_NEAR(cross_track_error(p, w), oracle::sampled_distance(p, w), 1e-3) << id;
      // the exact distance can never exceed the sampled one
      EXPECT_LE(cross_track_error(p, w), oracle::sampled_distance(p, w) + 1e-12);
    }
  }
}

TEST(CrossTrack, InvariantUnderRigidMotion) {
  const WorldSpec w = build_environment("env2");
  const double th = 0.7;
  const Vec2 t{1.3, -2.1};
  auto move = [&](Vec2 p) {
    return Vec2{std::cos(th) * p.x - std::sin(th) * p.y + t.x,
                std::sin(th) * p.x + std::cos(th) * p.y + t.y};
  };
  WorldSpec m = w;
  m.path.clear();
  for (const auto& e : w.path) {
    if (const auto* s = std::get_if<PathSegment>(&e)) {
      m.path.emplace_back(PathSegment{move(s->start), move(s->end)});
    } else {
      PathArc a = std::get<PathArc>(e);
      a.center = move(a.center);
      a.start_angle += th;
      a.end_angle += th;
      m.path.emplace_back(a);
    }
  }
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-4, 4);
  for (int i = 0; i < 200; ++i) {
    const Vec2 p{u(rng), u(rng)};
    EXPECT_NEAR(cross_track_error(p, w), cross_track_error(move(p), m), 1e-9);
  }
}

TEST(Dynamics, InstantForwardStep) {
  SimConfig cfg;
  cfg.velocity_time_constant = 0.0;
  const MavState s = step_dynamics(hover(1, 2, 1), {0.05, 0, 0}, cfg);
  EXPECT_NEAR(s.x, 1.005, 1e-15);
  EXPECT_EQ(s.y, 2.0);
  EXPECT_EQ(s.z, 1.0);
}

TEST(Dynamics, InstantYawStep) {
  SimConfig cfg;
  cfg.velocity_time_constant = 0.0;
  const MavState s = step_dynamics(hover(1, 2, 1, 0.5), {0, -0.3, 0}, cfg);
  EXPECT_NEAR(s.yaw, 0.47, 1e-15);
  EXPECT_EQ(s.x, 1.0);
  EXPECT_EQ(s.y, 2.0);
}

TEST(Dynamics, PositiveYawTurnsTowardPositiveY) {
  SimConfig cfg;
  cfg.velocity_time_constant = 0.0;
  MavState s = step_dynamics(hover(0, 0, 1, kPi / 2), {0.05, 0, 0}, cfg);
  EXPECT_NEAR(s.x, 0.0, 1e-15);
  EXPECT_NEAR(s.y, 0.005, 1e-15);
}

TEST(Dynamics, FirstOrderLagMatchesClosedForm) {
  SimConfig cfg;
  cfg.dt = 0.001;
  cfg.velocity_time_constant = 0.3;
  MavState s = hover(0, 0, 1);
  for (int i = 0; i < 300; ++i) s = step_dynamics(s, {1.0, 0, 0}, cfg);
  EXPECT_NEAR(s.vx_body, 1.0 - std::exp(-1.0), 2e-3);
}

TEST(Dynamics, ZeroSetpointIsFixedPoint) {
  SimConfig cfg;
  cfg.velocity_time_constant = 0.0;
  const MavState s0 = hover(1.5, -2.5, 0.8, 2.0);
  const MavState s = step_dynamics(s0, {}, cfg);
  EXPECT_EQ(s.x, s0.x);
  EXPECT_EQ(s.y, s0.y);
  EXPECT_EQ(s.z, s0.z);
  EXPECT_EQ(s.yaw, s0.yaw);
}

TEST(Dynamics, AltitudeClampedAtFloorAndYawWrapped) {
  SimConfig cfg;
  cfg.velocity_time_constant = 0.0;
  MavState s = hover(0, 0, 0.01);
  s = step_dynamics(s, {0, 0, -0.5}, cfg);
  EXPECT_EQ(s.z, 0.0);
  s = hover(0, 0, 1, 3.0);
  for (int i = 0; i < 2000; ++i) {
    s = step_dynamics(s, {0, 0.3, 0}, cfg);
    ASSERT_LE(std::fabs(s.yaw), kPi);
  }
}

TEST(Camera, ValidationAndFocal) {
  CameraModel cam;
  EXPECT_NO_THROW(cam.validate());
  EXPECT_NEAR(cam.focal_px(), 240.0 / std::tan(kPi / 6), 1e-9);
  cam.pitch = 55 * kDeg;  // 55 + 30 >= 80
  EXPECT_THROW(cam.validate(), Error);
  cam = {};
  cam.image_width = 8;
  EXPECT_THROW(cam.validate(), Error);
  cam = {};
  cam.vertical_fov = kPi;
  EXPECT_THROW(cam.validate(), Error);
}

TEST(Camera, PixelToFloorMatchesRayOracle) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3, 3);
  for (double pitch_deg : {0.0, 20.0, 40.0}) {
    CameraModel cam;
    cam.pitch = pitch_deg * kDeg;
    for (int i = 0; i < 50; ++i) {
      const MavState s = hover(u(rng), u(rng), 0.5 + std::fabs(u(rng)), u(rng));
      const int px = static_cast<int>(std::fabs(u(rng)) * 213) % cam.image_width;
      const int py = static_cast<int>(std::fabs(u(rng)) * 160) % cam.image_height;
      const Vec2 got = pixel_to_floor(cam, s, px, py);
      const Vec2 want = oracle::project(cam, s, px + 0.5, py + 0.5);
      EXPECT_NEAR(got.x, want.x, 1e-9);
      EXPECT_NEAR(got.y, want.y, 1e-9);
    }
  }
}

TEST(Camera, ImageUpIsForwardAndRightIsRight) {
  const CameraModel cam;
  const MavState s = hover(0, 0, 1, 0);
  const Vec2 top = pixel_to_floor(cam, s, 320, 0);
  const Vec2 bottom = pixel_to_floor(cam, s, 320, 479);
  const Vec2 right = pixel_to_floor(cam, s, 639, 240);
  EXPECT_GT(top.x, bottom.x);
  EXPECT_GT(right.y, 0.0);
  // forward pitch shows more floor ahead than behind
  EXPECT_GT(top.x, -bottom.x);
}

TEST(Render, CenteredOverStraightPath) {
  const CameraModel cam;
  const RgbImage img = render_camera(straight_x(), hover(0, 0, 1), cam);
  for (int v : {0, 120, 240, 479}) EXPECT_NEAR(stripe_center(img, v), 319.5, 0.5) << v;
}

TEST(Render, OffsetVehicleShiftsStripeByProjection) {
  const CameraModel cam;
  // vehicle 0.2 m left of the path (y = -0.2): the line appears right of centre
  const MavState s = hover(0, -0.2, 1);
  const RgbImage img = render_camera(straight_x(), s, cam);
  for (int v : {60, 240, 420}) {
    const double c = stripe_center(img, v);
    EXPECT_GT(c, 320.0);
    // find the columns the oracle puts inside the band and compare centres
    int lo = -1, hi = -1;
    for (int u = 0; u < cam.image_width; ++u) {
      const Vec2 p = oracle::project(cam, s, u + 0.5, v + 0.5);
      if (std::fabs(p.y) <= 0.075) {
        if (lo < 0) lo = u;
        hi = u;
      }
    }
    EXPECT_NEAR(c, 0.5 * (lo + hi), 0.5) << v;
  }
}

TEST(Render, LinePixelsEqualProjectedGroundTruth) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1, 1);
  CameraModel cam;
  cam.image_width = 160;
  cam.image_height = 120;
  for (const char* id : {"env1", "env2"}) {
    const WorldSpec w = build_environment(id);
    for (int k = 0; k < 6; ++k) {
      const Vec2 p = element_point_at(w.path[k % w.path.size()], 0.5);
      const MavState s = hover(p.x + 0.2 * u(rng), p.y + 0.2 * u(rng), 1.0 + 0.3 * u(rng), 3 * u(rng));
      const RgbImage img = render_camera(w, s, cam);
      const BinaryMask gt = render_ground_truth(w, s, cam);
      int disagreements = 0, line = 0;
      for (int v = 0; v < cam.image_height; ++v)
        for (int x = 0; x < cam.image_width; ++x) {
          const bool on = img.at(x, v) == w.line_color;
          EXPECT_EQ(on, gt.at(x, v) == 1);
          const Vec2 q = oracle::project(cam, s, x + 0.5, v + 0.5);
          const double d = cross_track_error(q, w);
          line += on;
          // pixels within rounding of the band edge may go either way
          if (std::fabs(d - w.line_width / 2) > 1e-9 && on != (d <= w.line_width / 2)) ++disagreements;
        }
      EXPECT_EQ(disagreements, 0) << id << " " << k;
      EXPECT_GT(line, 0) << id << " " << k;
    }
  }
}

TEST(Render, FootprintScalesWithAltitude) {
  CameraModel cam;
  cam.pitch = 0.0;
  const WorldSpec w = straight_x();
  for (double h : {0.5, 1.0}) {
    const int w1 = stripe_width(render_camera(w, hover(0, 0, h), cam), 240);
    const int w2 = stripe_width(render_camera(w, hover(0, 0, 2 * h), cam), 240);
    EXPECT_NEAR(w1, 2 * w2, 2) << h;
    // stripe width in pixels = line width / footprint width * image width
    const double footprint = 2 * h * std::tan(cam.vertical_fov / 2) * cam.image_width / cam.image_height;
    EXPECT_NEAR(w1, w.line_width / footprint * cam.image_width, 1.0);
  }
}

TEST(Render, EmptyFootprintIsUniformFloor) {
  const WorldSpec w = build_environment("env1");
  const RgbImage img = render_camera(w, hover(50, 50, 1), CameraModel{});
  for (const Rgb& p : img.data()) ASSERT_EQ(p, w.floor_color);
}

TEST(Render, DegenerateAltitudeRejected) {
  try {
    render_camera(straight_x(), hover(0, 0, 0.005), CameraModel{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDegenerate);
  }
}

TEST(Render, NoiseIsSeededAndDeterministic) {
  const WorldSpec w = straight_x();
  const CameraModel cam;
  const RgbImage a = render_camera(w, hover(0, 0, 1), cam, {8.0, 3});
  const RgbImage b = render_camera(w, hover(0, 0, 1), cam, {8.0, 3});
  const RgbImage c = render_camera(w, hover(0, 0, 1), cam, {8.0, 4});
  const RgbImage clean = render_camera(w, hover(0, 0, 1), cam);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  EXPECT_NE(a, clean);
}

TEST(Progress, MonotoneAndCompletesOnlyAtTheEnd) {
  const WorldSpec w = build_environment("env1");
  PathProgress p(w);
  double last = 0.0;
  const double len = w.path_length();
  for (double s = 0; s <= len; s += 0.02) {
    // walk the path with a wobble
    double rem = s;
    Vec2 q = w.end_point();
    for (const auto& e : w.path) {
      if (rem <= element_length(e)) {
        q = element_point_at(e, rem);
        break;
      }
      rem -= element_length(e);
    }
    p.observe({q.x + 0.03 * std::sin(s * 7), q.y + 0.03 * std::cos(s * 5)});
    ASSERT_GE(p.traversed(), last);
    last = p.traversed();
    if (s < 0.85 * len) {
      ASSERT_FALSE(p.completed());
      ASSERT_LT(p.fraction(), 1.0);
    }
  }
  p.observe(w.end_point());
  EXPECT_TRUE(p.completed());
  EXPECT_EQ(p.fraction(), 1.0);
}

TEST(Progress, ClosedLoopStartDoesNotCountAsCompletion) {
  const WorldSpec w = build_environment("env2");
  PathProgress p(w);
  p.observe(w.start_point());
  p.observe(w.end_point());
  EXPECT_FALSE(p.completed());
  EXPECT_LT(p.fraction(), 0.1);
}

TEST(WorldFile, BuiltinsRoundTrip) {
  for (const char* id : {"env1", "env2"}) {
    const WorldSpec w = build_environment(id);
    const std::string text = emit_world(w);
    const WorldSpec back = parse_world(text);
    EXPECT_EQ(emit_world(back), text) << id;
    ASSERT_EQ(back.path.size(), w.path.size());
    EXPECT_NEAR(back.path_length(), w.path_length(), 1e-9);
    EXPECT_EQ(back.line_color, w.line_color);
    EXPECT_DOUBLE_EQ(back.line_width, w.line_width);
  }
}

TEST(WorldFile, ParseErrors) {
  EXPECT_THROW(parse_world("[world]\nline_width = 0.1\n"), Error);  // no path
  EXPECT_THROW(parse_world("[world]\nbogus = 1\n[path.segment]\nstart = 0 0\nend = 1 0\n"), Error);
  EXPECT_THROW(parse_world("[path.segment]\nstart = 0 0\n"), Error);
  EXPECT_THROW(parse_world("[path.arc]\ncenter = 0 0\nradius = 1\nstart_angle = 0\nend_angle = 90\ndirection = sideways\n"),
               Error);
}

TEST(WorldFile, MissingFileIsIoError) {
  try {
    load_world_file("/nonexistent/world.txt");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIo);
  }
}
