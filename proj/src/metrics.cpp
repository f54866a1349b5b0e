#include "linetrace/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "linetrace/error.hpp"
#include "text_format.hpp"

namespace linetrace {

namespace {

class StatsAccumulator {
 public:
  void add(double v) {
    sum_ += v;
    min_ = std::min(min_, v);
    max_ = std::max(max_, v);
    ++n_;
  }
  std::optional<Stats> result() const {
    if (n_ == 0) {
      return std::nullopt;
    }
    // Clamp guards the mean against rounding when all samples are equal.
    return Stats{std::clamp(sum_ / n_, min_, max_), min_, max_};
  }

 private:
  double sum_ = 0.0;
  double min_ = std::numeric_limits<double>::infinity();
  double max_ = -std::numeric_limits<double>::infinity();
  std::size_t n_ = 0;
};

double sample_variance(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) {
    mean += x;
  }
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) {
    ss += (x - mean) * (x - mean);
  }
  return ss / static_cast<double>(v.size() - 1);
}

// Average of the per-axis sample variances of the increments.
std::optional<double> pooled_increment_variance(const std::vector<Centroid>& a,
                                                const std::vector<Centroid>& b) {
  if (a.size() < 2) {
    return std::nullopt;
  }
  std::vector<double> dx;
  std::vector<double> dy;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dx.push_back(b[i].cx - a[i].cx);
    dy.push_back(b[i].cy - a[i].cy);
  }
  return 0.5 * (sample_variance(dx) + sample_variance(dy));
}

Metrics base_metrics(const RunLog& log) {
  Metrics m;
  m.frames = static_cast<int>(log.frames.size());

  StatsAccumulator altitude;
  std::vector<double> durations;
  std::vector<Centroid> raw_prev, raw_next, kf_prev, kf_next;
  const FrameRecord* prev = nullptr;
  for (const auto& r : log.frames) {
    if (r.command) {
      ++m.cruise_frames;
      altitude.add(r.z);
    }
    if (r.detect_time) {
      durations.push_back(*r.detect_time);
    }
    if (prev && prev->raw && r.raw) {
      raw_prev.push_back(*prev->raw);
      raw_next.push_back(*r.raw);
      if (prev->filtered && r.filtered) {
        kf_prev.push_back(*prev->filtered);
        kf_next.push_back(*r.filtered);
      }
    }
    prev = &r;
  }
  if (m.cruise_frames == 0) {
    throw Error(ErrorKind::kInvalidArgument, "run log has no cruise frames");
  }
  m.altitude = *altitude.result();
  m.fps = fps_stats(durations);
  m.raw_increment_variance = pooled_increment_variance(raw_prev, raw_next);
  m.filtered_increment_variance = pooled_increment_variance(kf_prev, kf_next);
  return m;
}

}  // namespace

std::optional<Stats> fps_stats(const std::vector<double>& durations) {
  StatsAccumulator acc;
  for (double d : durations) {
    if (d > 0.0) {
      acc.add(1.0 / d);
    }
  }
  return acc.result();
}

Metrics compute_metrics(const RunLog& log) { return base_metrics(log); }

Metrics compute_metrics(const RunLog& log, const WorldSpec& world) {
  Metrics m = base_metrics(log);
  StatsAccumulator cross;
  PathProgress progress(world);
  for (const auto& r : log.frames) {
    if (r.command) {
      cross.add(cross_track_error({r.x, r.y}, world));
    }
    progress.observe({r.x, r.y});
  }
  m.cross_track = cross.result();
  m.completion = progress.fraction();
  return m;
}

std::string format_metrics(const Metrics& m) {
  std::string out;
  auto line = [&](const std::string& key, const std::string& value) {
    out += key + " = " + value + "\n";
  };
  auto sig = [](double v) { return text::format_sig(v); };
  auto stats = [&](const std::string& key, const std::optional<Stats>& s) {
    if (s) {
      line(key + "_mean", sig(s->mean));
      line(key + "_min", sig(s->min));
      line(key + "_max", sig(s->max));
    }
  };
  line("frames", std::to_string(m.frames));
  line("cruise_frames", std::to_string(m.cruise_frames));
  stats("fps", m.fps);
  stats("altitude", m.altitude);
  stats("cross_track", m.cross_track);
  if (m.completion) {
    line("completion", sig(*m.completion));
  }
  if (m.raw_increment_variance) {
    line("raw_increment_variance", sig(*m.raw_increment_variance));
  }
  if (m.filtered_increment_variance) {
    line("filtered_increment_variance", sig(*m.filtered_increment_variance));
  }
  return out;
}

}  // namespace linetrace
