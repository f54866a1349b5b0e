// linetrace command-line front end. Talks to the library only through the C API.

#include <linetrace.h>

#include <CLI11.hpp>

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

namespace fs = std::filesystem;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitFailure = 1;

struct ConfigDeleter { void operator()(lt_run_config* p) const { lt_config_free(p); } };
struct WorldDeleter { void operator()(lt_world* p) const { lt_world_free(p); } };
struct LogDeleter { void operator()(lt_run_log* p) const { lt_log_free(p); } };
using ConfigPtr = std::unique_ptr<lt_run_config, ConfigDeleter>;
using WorldPtr = std::unique_ptr<lt_world, WorldDeleter>;
using LogPtr = std::unique_ptr<lt_run_log, LogDeleter>;

// Takes ownership of a heap string from the library.
std::string take(char* s) {
  std::string out = s ? s : "";
  lt_string_free(s);
  return out;
}

// Thrown to unwind with a diagnostic and exit code.
struct Failure {
  int code;
  std::string message;
};

void check(lt_status st, const std::string& what) {
  if (st == LT_OK) return;
  std::string msg = what + ": " + lt_last_error();
  throw Failure{(st == LT_ERR_INVALID_ARGUMENT || st == LT_ERR_IO || st == LT_ERR_PARSE)
                    ? kExitUsage : kExitFailure,
                msg};
}

ConfigPtr load_config(const std::string& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec))
    throw Failure{kExitUsage, "config file not found: " + path};
  lt_run_config* cfg = nullptr;
  check(lt_config_load(path.c_str(), &cfg), "cannot load config " + path);
  return ConfigPtr(cfg);
}

std::optional<uint64_t> env_seed() {
  const char* s = std::getenv("LINETRACE_SEED");
  if (!s || !*s) return std::nullopt;
  errno = 0;
  char* end = nullptr;
  unsigned long long v = std::strtoull(s, &end, 10);
  if (errno != 0 || *end != '\0' || *s == '-')
    throw Failure{kExitUsage, std::string("LINETRACE_SEED is not an unsigned integer: ") + s};
  return static_cast<uint64_t>(v);
}

WorldPtr resolve_world(const std::string& spec) {
  lt_world* w = nullptr;
  if (spec == "env1" || spec == "env2")
    check(lt_world_builtin(spec.c_str(), &w), "world " + spec);
  else
    check(lt_world_load(spec.c_str(), &w), "cannot load world " + spec);
  return WorldPtr(w);
}

void write_text(const fs::path& path, const std::string& text) {
  std::FILE* f = std::fopen(path.string().c_str(), "wb");
  if (!f) throw Failure{kExitFailure, "cannot write " + path.string()};
  const bool ok = std::fwrite(text.data(), 1, text.size(), f) == text.size();
  if (std::fclose(f) != 0 || !ok) throw Failure{kExitFailure, "cannot write " + path.string()};
}

int cmd_run(const std::string& config_path, std::optional<uint64_t> cli_seed,
            const std::string& out_override) {
  ConfigPtr cfg = load_config(config_path);
  std::optional<uint64_t> seed = cli_seed ? cli_seed : env_seed();
  if (seed) check(lt_config_set_seed(cfg.get(), *seed), "seed");

  if (!out_override.empty())
    check(lt_config_set(cfg.get(), "output.dir", out_override.c_str()), "--out");
  char* d = nullptr;
  check(lt_config_output_dir(cfg.get(), &d), "output dir");
  const fs::path out_dir = take(d);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Failure{kExitFailure, "cannot create " + out_dir.string() + ": " + ec.message()};

  lt_world* w = nullptr;
  check(lt_world_from_config(cfg.get(), &w), "world");
  WorldPtr world(w);

  lt_run_log* l = nullptr;
  check(lt_run_in_world(cfg.get(), world.get(), &l), "run");
  LogPtr log(l);

  check(lt_log_write_csv(log.get(), (out_dir / "run.csv").string().c_str()), "csv");
  if (lt_config_plots_enabled(cfg.get()))
    check(lt_log_write_plots(log.get(), world.get(), out_dir.string().c_str()), "plots");

  char* m = nullptr;
  check(lt_metrics_format(log.get(), world.get(), &m), "metrics");
  const std::string metrics = take(m);
  write_text(out_dir / "metrics.txt", metrics);

  std::cout << "status = " << lt_log_status_name(log.get()) << "\n" << metrics;
  int has_fps = 0;
  lt_stats fps{};
  if (lt_log_wall_fps(log.get(), &has_fps, &fps) == LT_OK && has_fps)
    std::fprintf(stderr, "detection fps (wall clock, informational): mean %.1f min %.1f max %.1f\n",
                 fps.mean, fps.min, fps.max);

  if (lt_log_status(log.get()) == LT_RUN_ERROR) {
    std::fprintf(stderr, "run failed: %s\n", lt_log_message(log.get()));
    return kExitFailure;
  }
  return 0;
}

int cmd_detect(const std::string& image, const std::string& config_path,
               std::optional<uint64_t> cli_seed, const std::string& out_dir) {
  std::error_code ec;
  if (!fs::is_regular_file(image, ec))
    throw Failure{kExitUsage, "image file not found: " + image};
  ConfigPtr cfg;
  if (!config_path.empty()) cfg = load_config(config_path);
  std::optional<uint64_t> seed = cli_seed ? cli_seed : env_seed();

  fs::create_directories(out_dir, ec);
  if (ec) throw Failure{kExitFailure, "cannot create " + out_dir + ": " + ec.message()};

  lt_detection det{};
  check(lt_detect_file(image.c_str(), cfg.get(), seed.value_or(0), out_dir.c_str(), &det),
        "detect " + image);
  std::cout << "segments = " << det.segment_count << "\n";
  if (det.has_centroid)
    std::cout << "centroid = " << det.cx << " " << det.cy << "\n";
  else
    std::cout << "centroid = none\n";
  return 0;
}

int cmd_world_emit(const std::string& env, const std::string& out) {
  WorldPtr world = resolve_world(env);
  char* s = nullptr;
  check(lt_world_emit(world.get(), &s), "emit");
  const std::string text = take(s);
  if (out.empty())
    std::cout << text;
  else
    write_text(out, text);
  return 0;
}

int cmd_metrics(const std::string& log_path, const std::string& world_spec) {
  std::error_code ec;
  if (!fs::is_regular_file(log_path, ec))
    throw Failure{kExitUsage, "log file not found: " + log_path};
  lt_run_log* l = nullptr;
  check(lt_log_read_csv(log_path.c_str(), &l), "cannot read " + log_path);
  LogPtr log(l);
  WorldPtr world;
  if (!world_spec.empty()) world = resolve_world(world_spec);
  char* m = nullptr;
  check(lt_metrics_format(log.get(), world.get(), &m), "metrics");
  std::cout << take(m);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vision-based line following: detection, tracking, navigation and simulation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(lt_version()));

  std::string config_path, out_dir, image, env, log_path, world_spec, emit_out;
  std::optional<uint64_t> seed;

  auto* run = app.add_subcommand("run", "closed-loop simulation run");
  run->add_option("--config", config_path, "run configuration file")->required();
  run->add_option("--seed", seed, "RNG seed (overrides LINETRACE_SEED and the config)");
  run->add_option("--out", out_dir, "output directory (overrides the config)");

  std::string detect_out = "detect_out";
  auto* detect = app.add_subcommand("detect", "single-frame detection with annotated outputs");
  detect->add_option("--image", image, "input frame (PPM)")->required();
  detect->add_option("--config", config_path, "configuration file (defaults if omitted)");
  detect->add_option("--seed", seed, "Hough RNG seed");
  detect->add_option("--out", detect_out, "output directory")->capture_default_str();

  auto* world = app.add_subcommand("world", "world utilities");
  world->require_subcommand(1);
  auto* emit = world->add_subcommand("emit", "print a built-in world file");
  emit->add_option("--env", env, "env1 or env2")
      ->required()
      ->check(CLI::IsMember({"env1", "env2"}));
  emit->add_option("--out", emit_out, "write to file instead of stdout");

  auto* metrics = app.add_subcommand("metrics", "metrics from a run CSV");
  metrics->add_option("--log", log_path, "run CSV")->required();
  metrics->add_option("--world", world_spec,
                      "env1, env2 or a world file; enables cross-track and completion");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*run) return cmd_run(config_path, seed, out_dir);
    if (*detect) return cmd_detect(image, config_path, seed, detect_out);
    if (*emit) return cmd_world_emit(env, emit_out);
    if (*metrics) return cmd_metrics(log_path, world_spec);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << "\n";
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
