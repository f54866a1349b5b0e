#include "linetrace/runner.hpp"

#include <cmath>
#include <cstdio>

#include "linetrace/error.hpp"
#include "linetrace/export.hpp"

namespace linetrace {

namespace {

constexpr double kTakeoffTolerance = 0.01;  // m
constexpr std::uint64_t kNoiseStream = 0x6a09e667f3bcc909ULL;

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string frame_name(const char* stem, int frame, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%06d.%s", stem, frame, ext);
  return buf;
}

}  // namespace

std::string_view to_string(RunStatus status) noexcept {
  switch (status) {
    case RunStatus::kCompleted:
      return "completed";
    case RunStatus::kMaxDuration:
      return "max-duration";
    case RunStatus::kError:
      return "error";
  }
  return "error";
}

std::uint64_t frame_seed(std::uint64_t run_seed, int frame) noexcept {
  return splitmix64(run_seed ^ splitmix64(static_cast<std::uint64_t>(frame)));
}

RunLog run_simulation(const RunConfig& cfg) {
  return run_simulation(cfg, resolve_world(cfg));
}

RunLog run_simulation(const RunConfig& cfg, const WorldSpec& world) {
  cfg.validate();
  world.validate();

  TrackerConfig tracker_cfg = cfg.tracker;
  tracker_cfg.dt = cfg.sim.dt;

  RunLog log;
  log.dt = cfg.sim.dt;

  const Vec2 start = world.start_point();
  MavState state;
  state.x = start.x;
  state.y = start.y;
  state.yaw = world.start_heading();

  std::filesystem::path frame_dir;
  if (cfg.outputs.frame_stride > 0) {
    frame_dir = cfg.outputs.dir / "frames";
    std::filesystem::create_directories(frame_dir);
  }

  PathProgress progress(world);
  std::optional<CentroidTrack> track;
  bool airborne = false;

  for (int k = 0;; ++k) {
    const double t = k * cfg.sim.dt;
    if (t >= cfg.sim.duration_max - 1e-9) {
      log.status = RunStatus::kMaxDuration;
      break;
    }

    FrameRecord rec;
    rec.frame = k;
    rec.t = t;
    rec.x = state.x;
    rec.y = state.y;
    rec.z = state.z;
    rec.yaw = state.yaw;

    if (!airborne) {
      rec.setpoint.vz = altitude_hold(cfg.nav, state.z);
      log.frames.push_back(rec);
      state = step_dynamics(state, rec.setpoint, cfg.sim);
      airborne = std::fabs(state.z - cfg.nav.target_altitude) <= kTakeoffTolerance;
      continue;
    }

    RgbImage frame(1, 1);
    try {
      frame = render_camera(world, state, cfg.camera,
                            {cfg.sim.pixel_noise_sigma,
                             frame_seed(cfg.sim.rng_seed ^ kNoiseStream, k)});
    } catch (const Error& e) {
      log.status = RunStatus::kError;
      log.message = "frame " + std::to_string(k) + ": " + e.what();
      break;
    }

    DetectionStages stages =
        detect_line_stages(frame, cfg.detection, frame_seed(cfg.sim.rng_seed, k));
    const std::optional<Centroid>& raw = stages.result.centroid;

    const TrackedCentroid tracked = follow(track, raw, tracker_cfg);

    const NavOutput nav =
        navigate_frame(tracked, cfg.camera.image_width, cfg.nav, state.z);

    rec.raw = raw;
    if (track) {
      rec.filtered = Centroid{tracked.cx, tracked.cy};
    }
    rec.valid = tracked.valid;
    rec.command = nav.command;
    rec.setpoint = nav.setpoint;
    if (!cfg.deterministic) {
      rec.detect_time = stages.result.timing;
    }
    log.wall_detect_times.push_back(stages.result.timing);

    if (cfg.outputs.frame_stride > 0 && k % cfg.outputs.frame_stride == 0) {
      write_ppm(frame_dir / frame_name("frame", k, "ppm"), frame);
      write_pbm(frame_dir / frame_name("mask", k, "pbm"), stages.denoised);
      write_pbm(frame_dir / frame_name("edges", k, "pbm"), stages.edges);
      write_ppm(frame_dir / frame_name("overlay", k, "ppm"),
                annotate(frame, stages.result));
    }

    log.frames.push_back(rec);
    progress.observe({state.x, state.y});
    if (progress.completed()) {
      log.status = RunStatus::kCompleted;
      break;
    }
    state = step_dynamics(state, nav.setpoint, cfg.sim);
  }
  return log;
}

}  // namespace linetrace
