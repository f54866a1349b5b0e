#include "linetrace.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "linetrace/error.hpp"
#include "linetrace/export.hpp"
#include "linetrace/metrics.hpp"
#include "linetrace/runner.hpp"
#include "text_format.hpp"

struct lt_run_config {
  linetrace::RunConfig cfg;
};

struct lt_world {
  linetrace::WorldSpec spec;
};

struct lt_run_log {
  linetrace::RunLog log;
};

struct lt_tracker {
  linetrace::TrackerConfig cfg;
  std::optional<linetrace::CentroidTrack> track;
};

namespace {

thread_local std::string g_last_error;

lt_status to_status(linetrace::ErrorKind kind) {
  using linetrace::ErrorKind;
  switch (kind) {
    case ErrorKind::kInvalidArgument:
      return LT_ERR_INVALID_ARGUMENT;
    case ErrorKind::kParse:
      return LT_ERR_PARSE;
    case ErrorKind::kIo:
      return LT_ERR_IO;
    case ErrorKind::kNumeric:
      return LT_ERR_NUMERIC;
    case ErrorKind::kDegenerate:
      return LT_ERR_DEGENERATE;
  }
  return LT_ERR_INTERNAL;
}

template <typename Fn>
lt_status guarded(Fn&& fn) noexcept {
  try {
    fn();
    g_last_error.clear();
    return LT_OK;
  } catch (const linetrace::Error& e) {
    g_last_error = e.what();
    return to_status(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return LT_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return LT_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return LT_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) {
    throw linetrace::Error(linetrace::ErrorKind::kInvalidArgument,
                           std::string(what) + " must not be NULL");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) {
    throw std::bad_alloc();
  }
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

const linetrace::RunConfig& config_or_default(const lt_run_config* cfg) {
  static const linetrace::RunConfig defaults;
  return cfg ? cfg->cfg : defaults;
}

lt_stats to_c(const linetrace::Stats& s) { return {s.mean, s.min, s.max}; }

lt_detection summarize(const linetrace::DetectionResult& r) {
  lt_detection d{};
  d.segment_count = r.segments.size();
  d.has_centroid = r.centroid ? 1 : 0;
  if (r.centroid) {
    d.cx = r.centroid->cx;
    d.cy = r.centroid->cy;
  }
  d.detect_time = r.timing;
  return d;
}

}  // namespace

extern "C" {

const char* lt_version(void) { return "1.0.0"; }

const char* lt_status_name(lt_status status) {
  switch (status) {
    case LT_OK:
      return "ok";
    case LT_ERR_INVALID_ARGUMENT:
      return "invalid argument";
    case LT_ERR_IO:
      return "i/o error";
    case LT_ERR_PARSE:
      return "parse error";
    case LT_ERR_NUMERIC:
      return "numeric error";
    case LT_ERR_DEGENERATE:
      return "degenerate input";
    case LT_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

const char* lt_last_error(void) { return g_last_error.c_str(); }

void lt_string_free(char* s) { std::free(s); }

// ---- configuration ----

lt_status lt_config_default(lt_run_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new lt_run_config{};
  });
}

lt_status lt_config_load(const char* path, lt_run_config** out) {
  return guarded([&] {
    require(path && out, "path and out");
    *out = new lt_run_config{linetrace::load_run_config(path)};
  });
}

lt_status lt_config_parse(const char* text, const char* base_dir, lt_run_config** out) {
  return guarded([&] {
    require(text && out, "text and out");
    *out = new lt_run_config{
        linetrace::parse_run_config(text, base_dir ? base_dir : "")};
  });
}

lt_status lt_config_set(lt_run_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    require(cfg && key && value, "cfg, key and value");
    linetrace::RunConfig next = cfg->cfg;
    linetrace::set_config_value(next, key, value);
    next.validate();
    cfg->cfg = std::move(next);
  });
}

lt_status lt_config_set_seed(lt_run_config* cfg, uint64_t seed) {
  return guarded([&] {
    require(cfg, "cfg");
    cfg->cfg.sim.rng_seed = seed;
  });
}

lt_status lt_config_format(const lt_run_config* cfg, char** out) {
  return guarded([&] {
    require(cfg && out, "cfg and out");
    *out = dup_string(linetrace::format_run_config(cfg->cfg));
  });
}

lt_status lt_config_output_dir(const lt_run_config* cfg, char** out) {
  return guarded([&] {
    require(cfg && out, "cfg and out");
    *out = dup_string(cfg->cfg.outputs.dir.string());
  });
}

int lt_config_plots_enabled(const lt_run_config* cfg) {
  return config_or_default(cfg).outputs.plots ? 1 : 0;
}

void lt_config_free(lt_run_config* cfg) { delete cfg; }

// ---- worlds ----

lt_status lt_world_builtin(const char* name, lt_world** out) {
  return guarded([&] {
    require(name && out, "name and out");
    *out = new lt_world{linetrace::build_environment(std::string_view(name))};
  });
}

lt_status lt_world_load(const char* path, lt_world** out) {
  return guarded([&] {
    require(path && out, "path and out");
    *out = new lt_world{linetrace::load_world_file(path)};
  });
}

lt_status lt_world_from_config(const lt_run_config* cfg, lt_world** out) {
  return guarded([&] {
    require(cfg && out, "cfg and out");
    *out = new lt_world{linetrace::resolve_world(cfg->cfg)};
  });
}

lt_status lt_world_emit(const lt_world* world, char** out) {
  return guarded([&] {
    require(world && out, "world and out");
    *out = dup_string(linetrace::emit_world(world->spec));
  });
}

lt_status lt_world_cross_track(const lt_world* world, double x, double y, double* out) {
  return guarded([&] {
    require(world && out, "world and out");
    *out = linetrace::cross_track_error({x, y}, world->spec);
  });
}

void lt_world_free(lt_world* world) { delete world; }

// ---- closed-loop runs ----

lt_status lt_run(const lt_run_config* cfg, lt_run_log** out) {
  return guarded([&] {
    require(cfg && out, "cfg and out");
    *out = new lt_run_log{linetrace::run_simulation(cfg->cfg)};
  });
}

lt_status lt_run_in_world(const lt_run_config* cfg, const lt_world* world,
                          lt_run_log** out) {
  return guarded([&] {
    require(cfg && world && out, "cfg, world and out");
    *out = new lt_run_log{linetrace::run_simulation(cfg->cfg, world->spec)};
  });
}

size_t lt_log_frame_count(const lt_run_log* log) {
  return log ? log->log.frames.size() : 0;
}

lt_run_status lt_log_status(const lt_run_log* log) {
  if (!log) {
    return LT_RUN_ERROR;
  }
  switch (log->log.status) {
    case linetrace::RunStatus::kCompleted:
      return LT_RUN_COMPLETED;
    case linetrace::RunStatus::kMaxDuration:
      return LT_RUN_MAX_DURATION;
    case linetrace::RunStatus::kError:
      return LT_RUN_ERROR;
  }
  return LT_RUN_ERROR;
}

const char* lt_log_status_name(const lt_run_log* log) {
  return log ? linetrace::to_string(log->log.status).data() : "error";
}

const char* lt_log_message(const lt_run_log* log) {
  return log ? log->log.message.c_str() : "";
}

lt_status lt_log_format_csv(const lt_run_log* log, char** out) {
  return guarded([&] {
    require(log && out, "log and out");
    *out = dup_string(linetrace::format_csv(log->log));
  });
}

lt_status lt_log_write_csv(const lt_run_log* log, const char* path) {
  return guarded([&] {
    require(log && path, "log and path");
    linetrace::export_csv(log->log, path);
  });
}

lt_status lt_log_read_csv(const char* path, lt_run_log** out) {
  return guarded([&] {
    require(path && out, "path and out");
    *out = new lt_run_log{linetrace::import_csv(path)};
  });
}

lt_status lt_log_write_plots(const lt_run_log* log, const lt_world* world,
                             const char* dir) {
  return guarded([&] {
    require(log && world && dir, "log, world and dir");
    linetrace::export_plots(log->log, world->spec, dir);
  });
}

lt_status lt_log_wall_fps(const lt_run_log* log, int* has_fps, lt_stats* fps) {
  return guarded([&] {
    require(log && has_fps && fps, "log, has_fps and fps");
    const auto stats = linetrace::fps_stats(log->log.wall_detect_times);
    *has_fps = stats ? 1 : 0;
    *fps = stats ? to_c(*stats) : lt_stats{};
  });
}

void lt_log_free(lt_run_log* log) { delete log; }

// ---- metrics ----

lt_status lt_metrics_compute(const lt_run_log* log, const lt_world* world,
                             lt_metrics* out) {
  return guarded([&] {
    require(log && out, "log and out");
    const linetrace::Metrics m = world
                                     ? linetrace::compute_metrics(log->log, world->spec)
                                     : linetrace::compute_metrics(log->log);
    lt_metrics c{};
    c.frames = m.frames;
    c.cruise_frames = m.cruise_frames;
    c.has_fps = m.fps ? 1 : 0;
    if (m.fps) {
      c.fps = to_c(*m.fps);
    }
    c.altitude = to_c(m.altitude);
    c.has_cross_track = m.cross_track ? 1 : 0;
    if (m.cross_track) {
      c.cross_track = to_c(*m.cross_track);
    }
    c.has_completion = m.completion ? 1 : 0;
    c.completion = m.completion.value_or(0.0);
    c.has_raw_increment_variance = m.raw_increment_variance ? 1 : 0;
    c.raw_increment_variance = m.raw_increment_variance.value_or(0.0);
    c.has_filtered_increment_variance = m.filtered_increment_variance ? 1 : 0;
    c.filtered_increment_variance = m.filtered_increment_variance.value_or(0.0);
    *out = c;
  });
}

lt_status lt_metrics_format(const lt_run_log* log, const lt_world* world, char** out) {
  return guarded([&] {
    require(log && out, "log and out");
    const linetrace::Metrics m = world
                                     ? linetrace::compute_metrics(log->log, world->spec)
                                     : linetrace::compute_metrics(log->log);
    *out = dup_string(linetrace::format_metrics(m));
  });
}

// ---- single-frame pipeline ----

lt_status lt_detect_rgb(const uint8_t* rgb, int width, int height,
                        const lt_run_config* cfg, uint64_t seed, lt_detection* out,
                        lt_segment* segs, size_t seg_capacity) {
  return guarded([&] {
    require(rgb && out, "rgb and out");
    if (width < 1 || height < 1) {
      throw linetrace::Error(linetrace::ErrorKind::kInvalidArgument,
                             "image dimensions must be >= 1");
    }
    linetrace::RgbImage img(width, height);
    for (std::size_t i = 0; i < img.size(); ++i) {
      img.data()[i] = {rgb[3 * i], rgb[3 * i + 1], rgb[3 * i + 2]};
    }
    const auto result =
        linetrace::detect_line(img, config_or_default(cfg).detection, seed);
    *out = summarize(result);
    if (segs) {
      for (std::size_t i = 0; i < result.segments.size() && i < seg_capacity; ++i) {
        const auto& s = result.segments[i];
        segs[i] = {s.x1, s.y1, s.x2, s.y2};
      }
    }
  });
}

lt_status lt_detect_file(const char* image_path, const lt_run_config* cfg,
                         uint64_t seed, const char* out_dir, lt_detection* out) {
  return guarded([&] {
    require(image_path && out, "image_path and out");
    const auto img = linetrace::read_ppm(image_path);
    const auto stages =
        linetrace::detect_line_stages(img, config_or_default(cfg).detection, seed);
    if (out_dir) {
      const std::filesystem::path dir(out_dir);
      std::error_code ec;
      std::filesystem::create_directories(dir, ec);
      if (ec) {
        throw linetrace::Error(linetrace::ErrorKind::kIo,
                               "cannot create '" + dir.string() + "': " + ec.message());
      }
      linetrace::write_pbm(dir / "mask.pbm", stages.denoised);
      linetrace::write_pbm(dir / "edges.pbm", stages.edges);
      linetrace::write_ppm(dir / "overlay.ppm", linetrace::annotate(img, stages.result));
      std::string csv = "x1,y1,x2,y2\n";
      for (const auto& s : stages.result.segments) {
        csv += std::to_string(s.x1) + ',' + std::to_string(s.y1) + ',' +
               std::to_string(s.x2) + ',' + std::to_string(s.y2) + '\n';
      }
      linetrace::text::write_file(dir / "segments.csv", csv);
    }
    *out = summarize(stages.result);
  });
}

// ---- tracking and navigation ----

lt_status lt_tracker_create(const lt_run_config* cfg, lt_tracker** out) {
  return guarded([&] {
    require(out, "out");
    const auto& rc = config_or_default(cfg);
    linetrace::TrackerConfig tc = rc.tracker;
    tc.dt = rc.sim.dt;
    tc.validate();
    *out = new lt_tracker{tc, std::nullopt};
  });
}

lt_status lt_tracker_step(lt_tracker* tracker, int has_measurement, double cx,
                          double cy, lt_tracked* out) {
  return guarded([&] {
    require(tracker && out, "tracker and out");
    std::optional<linetrace::Centroid> raw;
    if (has_measurement) {
      raw = linetrace::Centroid{cx, cy};
    }
    const auto t = linetrace::follow(tracker->track, raw, tracker->cfg);
    *out = {t.cx, t.cy, t.valid ? 1 : 0};
  });
}

void lt_tracker_free(lt_tracker* tracker) { delete tracker; }

lt_status lt_navigate(const lt_run_config* cfg, const lt_tracked* tracked,
                      int frame_width, double altitude, lt_command* command,
                      lt_setpoint* setpoint) {
  return guarded([&] {
    require(tracked && command && setpoint, "tracked, command and setpoint");
    linetrace::TrackedCentroid t;
    t.cx = tracked->cx;
    t.cy = tracked->cy;
    t.valid = tracked->valid != 0;
    const auto nav =
        linetrace::navigate_frame(t, frame_width, config_or_default(cfg).nav, altitude);
    *command = static_cast<lt_command>(nav.command);
    *setpoint = {nav.setpoint.vx_body, nav.setpoint.yaw_rate, nav.setpoint.vz};
  });
}

const char* lt_command_name(lt_command command) {
  switch (command) {
    case LT_CMD_FORWARD:
    case LT_CMD_YAW_LEFT:
    case LT_CMD_YAW_RIGHT:
    case LT_CMD_SEARCH:
      return linetrace::to_string(static_cast<linetrace::NavCommand>(command)).data();
  }
  return "unknown";
}

}  // extern "C"
