#ifndef LINETRACE_H
#define LINETRACE_H

/* C interface to the line-following stack. All handles are opaque and owned
 * by the caller once returned; release them with the matching *_free call.
 * Functions return LT_OK or an error code, with a message available from
 * lt_last_error() on the same thread. Strings returned through char** are
 * heap-allocated and released with lt_string_free. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define LT_API __declspec(dllexport)
#else
#define LT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lt_status {
  LT_OK = 0,
  LT_ERR_INVALID_ARGUMENT = 1,
  LT_ERR_IO = 2,
  LT_ERR_PARSE = 3,
  LT_ERR_NUMERIC = 4,
  LT_ERR_DEGENERATE = 5,
  LT_ERR_INTERNAL = 6
} lt_status;

typedef enum lt_run_status {
  LT_RUN_COMPLETED = 0,
  LT_RUN_MAX_DURATION = 1,
  LT_RUN_ERROR = 2
} lt_run_status;

typedef enum lt_command {
  LT_CMD_FORWARD = 0,
  LT_CMD_YAW_LEFT = 1,
  LT_CMD_YAW_RIGHT = 2,
  LT_CMD_SEARCH = 3
} lt_command;

typedef struct lt_run_config lt_run_config;
typedef struct lt_world lt_world;
typedef struct lt_run_log lt_run_log;
typedef struct lt_tracker lt_tracker;

typedef struct lt_segment {
  int x1, y1, x2, y2;
} lt_segment;

typedef struct lt_detection {
  size_t segment_count;
  int has_centroid;
  double cx, cy;
  double detect_time; /* seconds, wall clock */
} lt_detection;

typedef struct lt_tracked {
  double cx, cy;
  int valid;
} lt_tracked;

typedef struct lt_setpoint {
  double vx;       /* body forward, m/s */
  double yaw_rate; /* rad/s, negative turns left */
  double vz;       /* m/s, up */
} lt_setpoint;

typedef struct lt_stats {
  double mean, min, max;
} lt_stats;

typedef struct lt_metrics {
  int frames;
  int cruise_frames;
  int has_fps;
  lt_stats fps;
  lt_stats altitude;
  int has_cross_track;
  lt_stats cross_track;
  int has_completion;
  double completion;
  int has_raw_increment_variance;
  double raw_increment_variance;
  int has_filtered_increment_variance;
  double filtered_increment_variance;
} lt_metrics;

LT_API const char* lt_version(void);
LT_API const char* lt_status_name(lt_status status);
/* Message for the last failing call on this thread; "" if none. */
LT_API const char* lt_last_error(void);
LT_API void lt_string_free(char* s);

/* ---- configuration ---- */
LT_API lt_status lt_config_default(lt_run_config** out);
LT_API lt_status lt_config_load(const char* path, lt_run_config** out);
/* base_dir may be NULL; it anchors a relative world path. */
LT_API lt_status lt_config_parse(const char* text, const char* base_dir,
                                 lt_run_config** out);
LT_API lt_status lt_config_set(lt_run_config* cfg, const char* key,
                               const char* value);
LT_API lt_status lt_config_set_seed(lt_run_config* cfg, uint64_t seed);
LT_API lt_status lt_config_format(const lt_run_config* cfg, char** out);
/* Output directory from the config, heap string. */
LT_API lt_status lt_config_output_dir(const lt_run_config* cfg, char** out);
LT_API int lt_config_plots_enabled(const lt_run_config* cfg);
LT_API void lt_config_free(lt_run_config* cfg);

/* ---- worlds ---- */
/* name is "env1" or "env2". */
LT_API lt_status lt_world_builtin(const char* name, lt_world** out);
LT_API lt_status lt_world_load(const char* path, lt_world** out);
LT_API lt_status lt_world_from_config(const lt_run_config* cfg, lt_world** out);
LT_API lt_status lt_world_emit(const lt_world* world, char** out);
LT_API lt_status lt_world_cross_track(const lt_world* world, double x, double y,
                                      double* out);
LT_API void lt_world_free(lt_world* world);

/* ---- closed-loop runs ---- */
/* Runs to completion or timeout. A renderer failure is not an API error: it
 * yields a log whose status is LT_RUN_ERROR. */
LT_API lt_status lt_run(const lt_run_config* cfg, lt_run_log** out);
LT_API lt_status lt_run_in_world(const lt_run_config* cfg, const lt_world* world,
                                 lt_run_log** out);
LT_API size_t lt_log_frame_count(const lt_run_log* log);
LT_API lt_run_status lt_log_status(const lt_run_log* log);
LT_API const char* lt_log_status_name(const lt_run_log* log);
/* Valid while the log lives. */
LT_API const char* lt_log_message(const lt_run_log* log);
LT_API lt_status lt_log_format_csv(const lt_run_log* log, char** out);
LT_API lt_status lt_log_write_csv(const lt_run_log* log, const char* path);
LT_API lt_status lt_log_read_csv(const char* path, lt_run_log** out);
LT_API lt_status lt_log_write_plots(const lt_run_log* log, const lt_world* world,
                                    const char* dir);
/* FPS from the wall-clock detection times of the run that produced the log.
 * Informational: depends on the host. has_fps is 0 for imported logs. */
LT_API lt_status lt_log_wall_fps(const lt_run_log* log, int* has_fps,
                                 lt_stats* fps);
LT_API void lt_log_free(lt_run_log* log);

/* ---- metrics ---- */
/* world may be NULL, which leaves cross-track and completion absent. */
LT_API lt_status lt_metrics_compute(const lt_run_log* log, const lt_world* world,
                                    lt_metrics* out);
LT_API lt_status lt_metrics_format(const lt_run_log* log, const lt_world* world,
                                   char** out);

/* ---- single-frame pipeline ---- */
/* rgb is width*height*3 bytes, row-major. cfg may be NULL for defaults.
 * Up to seg_capacity segments are copied to segs (which may be NULL). */
LT_API lt_status lt_detect_rgb(const uint8_t* rgb, int width, int height,
                               const lt_run_config* cfg, uint64_t seed,
                               lt_detection* out, lt_segment* segs,
                               size_t seg_capacity);
/* Reads a P6/P3 pixmap. When out_dir is non-NULL, writes mask.pbm,
 * edges.pbm, overlay.ppm and segments.csv there. */
LT_API lt_status lt_detect_file(const char* image_path, const lt_run_config* cfg,
                                uint64_t seed, const char* out_dir,
                                lt_detection* out);

/* ---- tracking and navigation ---- */
LT_API lt_status lt_tracker_create(const lt_run_config* cfg, lt_tracker** out);
/* has_measurement = 0 coasts the filter. */
LT_API lt_status lt_tracker_step(lt_tracker* tracker, int has_measurement,
                                 double cx, double cy, lt_tracked* out);
LT_API void lt_tracker_free(lt_tracker* tracker);

LT_API lt_status lt_navigate(const lt_run_config* cfg, const lt_tracked* tracked,
                             int frame_width, double altitude, lt_command* command,
                             lt_setpoint* setpoint);
LT_API const char* lt_command_name(lt_command command);

#ifdef __cplusplus
}
#endif

#endif /* LINETRACE_H */
