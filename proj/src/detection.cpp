#include "linetrace/detection.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <string>

#include "linetrace/error.hpp"

namespace linetrace {

namespace {

using Wide = __int128;

int clamp_index(int i, int n) { return std::clamp(i, 0, n - 1); }

}  // namespace

void CannyParams::validate() const {
  if (!(low_threshold > 0.0) || !(high_threshold >= low_threshold)) {
    throw Error(ErrorKind::kInvalidArgument,
                "canny thresholds must satisfy 0 < low <= high");
  }
  if (!(blur_sigma >= 0.0) || !std::isfinite(blur_sigma)) {
    throw Error(ErrorKind::kInvalidArgument, "canny blur_sigma must be >= 0");
  }
}

void HoughParams::validate() const {
  if (!(rho_resolution > 0.0) || !(theta_resolution > 0.0) ||
      theta_resolution > std::numbers::pi || vote_threshold <= 0 ||
      min_line_length <= 0 || max_line_gap <= 0) {
    throw Error(ErrorKind::kInvalidArgument,
                "hough parameters must be strictly positive");
  }
}

void DetectionConfig::validate() const {
  hsv.validate();
  morphology.validate();
  canny.validate();
  hough.validate();
}

double LineSegment::length() const noexcept {
  return std::hypot(static_cast<double>(x2 - x1), static_cast<double>(y2 - y1));
}

GrayImage to_gray(const RgbImage& img) {
  GrayImage out(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) {
    const Rgb p = img.data()[i];
    const int weighted = 299 * p.r + 587 * p.g + 114 * p.b;
    out.data()[i] = static_cast<std::uint8_t>((weighted + 500) / 1000);
  }
  return out;
}

std::vector<std::int64_t> gaussian_taps(double sigma) {
  if (sigma <= 0.0) {
    return {1};
  }
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<std::int64_t> taps(static_cast<std::size_t>(radius) + 1);
  for (int i = 0; i <= radius; ++i) {
    const double w = std::exp(-(i * i) / (2.0 * sigma * sigma));
    taps[static_cast<std::size_t>(i)] = std::llround(256.0 * w);
  }
  return taps;
}

namespace {

template <typename Acc, typename Mag>
BinaryMask canny_core(const GrayImage& img, const std::vector<std::int64_t>& taps,
                      std::int64_t tap_sum, const CannyParams& params) {
  const int w = img.width();
  const int h = img.height();
  const int radius = static_cast<int>(taps.size()) - 1;

  // Separable smoothing; the result carries a factor tap_sum^2. Borders
  // replicate the edge pixel.
  const auto uw = static_cast<std::size_t>(w);
  const auto ur = static_cast<std::size_t>(radius);
  // Scratch buffers persist per thread; every element is rewritten below.
  // Reusing them avoids faulting in ~8 MB of fresh pages per frame.
  thread_local std::vector<Acc> rows;
  thread_local std::vector<Acc> line;
  thread_local std::vector<Acc> smooth;
  thread_local std::vector<Acc> gx;
  thread_local std::vector<Acc> gy;
  thread_local std::vector<Mag> mag2;
  thread_local std::vector<std::uint8_t> klass;
  thread_local std::vector<std::size_t> stack;
  rows.resize(uw * h);
  line.resize(uw + 2 * ur);
  for (int y = 0; y < h; ++y) {
    for (int x = -radius; x < w + radius; ++x) {
      line[static_cast<std::size_t>(x + radius)] = img.at(clamp_index(x, w), y);
    }
    Acc* dst = rows.data() + static_cast<std::size_t>(y) * uw;
    const Acc* c = line.data() + ur;
    const Acc t0 = static_cast<Acc>(taps[0]);
    for (std::size_t x = 0; x < uw; ++x) {
      dst[x] = t0 * c[x];
    }
    for (std::size_t i = 1; i <= ur; ++i) {
      const Acc t = static_cast<Acc>(taps[i]);
      const Acc* lo = c - i;
      const Acc* hi = c + i;
      for (std::size_t x = 0; x < uw; ++x) {
        dst[x] += t * (lo[x] + hi[x]);
      }
    }
  }
  smooth.resize(rows.size());
  auto row_ptr = [&](const std::vector<Acc>& v, int y) {
    return v.data() + static_cast<std::size_t>(clamp_index(y, h)) * uw;
  };
  for (int y = 0; y < h; ++y) {
    Acc* dst = smooth.data() + static_cast<std::size_t>(y) * uw;
    const Acc* c = row_ptr(rows, y);
    for (std::size_t x = 0; x < uw; ++x) {
      dst[x] = static_cast<Acc>(taps[0]) * c[x];
    }
    for (int i = 1; i <= radius; ++i) {
      const Acc* up = row_ptr(rows, y - i);
      const Acc* dn = row_ptr(rows, y + i);
      const Acc t = static_cast<Acc>(taps[static_cast<std::size_t>(i)]);
      for (std::size_t x = 0; x < uw; ++x) {
        dst[x] += t * (up[x] + dn[x]);
      }
    }
  }

  gx.resize(smooth.size());
  gy.resize(smooth.size());
  mag2.resize(smooth.size());
  for (int y = 0; y < h; ++y) {
    const Acc* up = row_ptr(smooth, y - 1);
    const Acc* mid = row_ptr(smooth, y);
    const Acc* dn = row_ptr(smooth, y + 1);
    for (int x = 0; x < w; ++x) {
      const int l = x > 0 ? x - 1 : 0;
      const int r = x + 1 < w ? x + 1 : w - 1;
      const std::size_t i = static_cast<std::size_t>(y) * uw + static_cast<std::size_t>(x);
      gx[i] = (up[r] + 2 * mid[r] + dn[r]) - (up[l] + 2 * mid[l] + dn[l]);
      gy[i] = (dn[l] + 2 * dn[x] + dn[r]) - (up[l] + 2 * up[x] + up[r]);
      mag2[i] = gx[i] == 0 && gy[i] == 0
                    ? Mag(0)
                    : Mag(gx[i]) * gx[i] + Mag(gy[i]) * gy[i];
    }
  }

  auto mag_at = [&](int x, int y) -> Mag {
    if (x < 0 || y < 0 || x >= w || y >= h) {
      return 0;
    }
    return mag2[static_cast<std::size_t>(y) * w + x];
  };

  const long double scale =
      static_cast<long double>(tap_sum) * static_cast<long double>(tap_sum);
  const long double low = params.low_threshold * scale;
  const long double high = params.high_threshold * scale;
  const long double low2 = low * low;
  const long double high2 = high * high;

  // 0 = suppressed, 1 = weak, 2 = strong
  klass.assign(smooth.size(), 0);
  stack.clear();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      const Mag m = mag2[i];
      if (m == 0) {
        continue;
      }
      const Wide ax = gx[i] < 0 ? -Wide(gx[i]) : Wide(gx[i]);
      const Wide ay = gy[i] < 0 ? -Wide(gy[i]) : Wide(gy[i]);
      // ay <= ax tan(22.5) and ay >= ax tan(67.5), without irrationals:
      // tan(22.5) = sqrt2 - 1, tan(67.5) = sqrt2 + 1.
      int nx = 0;
      int ny = 0;
      if ((ay + ax) * (ay + ax) <= 2 * ax * ax) {
        nx = 1;
      } else if (ay >= ax && (ay - ax) * (ay - ax) >= 2 * ax * ax) {
        ny = 1;
      } else if ((gx[i] > 0) == (gy[i] > 0)) {
        nx = 1;
        ny = 1;
      } else {
        nx = -1;
        ny = 1;
      }
      // Strict against the backward neighbour, non-strict against the
      // forward one, so plateaus keep exactly one pixel.
      if (!(m > mag_at(x - nx, y - ny) && m >= mag_at(x + nx, y + ny))) {
        continue;
      }
      const long double ml = static_cast<long double>(m);
      if (ml >= high2) {
        klass[i] = 2;
        stack.push_back(i);
      } else if (ml >= low2) {
        klass[i] = 1;
      }
    }
  }

  BinaryMask out(w, h);
  for (std::size_t i : stack) {
    out.data()[i] = 1;
  }
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    const int x = static_cast<int>(i % w);
    const int y = static_cast<int>(i / w);
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int xx = x + dx;
        const int yy = y + dy;
        if ((dx == 0 && dy == 0) || xx < 0 || yy < 0 || xx >= w || yy >= h) {
          continue;
        }
        const std::size_t j = static_cast<std::size_t>(yy) * w + xx;
        if (klass[j] != 0 && out.data()[j] == 0) {
          out.data()[j] = 1;
          stack.push_back(j);
        }
      }
    }
  }
  return out;
}
}  // namespace

BinaryMask canny(const GrayImage& img, const CannyParams& params) {
  params.validate();
  const int w = img.width();
  const int h = img.height();
  if (w < 3 || h < 3) {
    throw Error(ErrorKind::kDegenerate,
                "canny needs at least 3x3 pixels of support, got " +
                    std::to_string(w) + "x" + std::to_string(h));
  }

  const auto taps = gaussian_taps(params.blur_sigma);
  std::int64_t tap_sum = taps[0];
  for (std::size_t i = 1; i < taps.size(); ++i) {
    tap_sum += 2 * taps[i];
  }

  // Blurred values are bounded by 255 * tap_sum^2 and Sobel responses by four
  // times that; narrow types are exact whenever that fits in 31 bits.
  const long double bound = 4.0L * 255.0L * static_cast<long double>(tap_sum) *
                            static_cast<long double>(tap_sum);
  if (bound < 2147483647.0L) {
    return canny_core<std::int32_t, std::int64_t>(img, taps, tap_sum, params);
  }
  return canny_core<std::int64_t, Wide>(img, taps, tap_sum, params);
}

std::vector<LineSegment> hough_lines(const BinaryMask& edges,
                                     const HoughParams& params,
                                     std::uint64_t seed) {
  params.validate();
  const int w = edges.width();
  const int h = edges.height();
  const int num_angle =
      std::max(1, static_cast<int>(std::lround(std::numbers::pi /
                                                params.theta_resolution)));
  const int num_rho = static_cast<int>(
      std::lround(((w + h) * 2 + 1) / params.rho_resolution));
  const int rho_offset = (num_rho - 1) / 2;

  std::vector<double> cos_tab(static_cast<std::size_t>(num_angle));
  std::vector<double> sin_tab(static_cast<std::size_t>(num_angle));
  for (int n = 0; n < num_angle; ++n) {
    const double angle = n * params.theta_resolution;
    cos_tab[static_cast<std::size_t>(n)] = std::cos(angle) / params.rho_resolution;
    sin_tab[static_cast<std::size_t>(n)] = std::sin(angle) / params.rho_resolution;
  }

  std::vector<int> accum(static_cast<std::size_t>(num_angle) * num_rho, 0);
  std::vector<std::uint8_t> live = edges.data();
  std::vector<std::uint8_t> voted(live.size(), 0);

  struct Pixel {
    int x;
    int y;
  };
  std::vector<Pixel> pending;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (edges.at(x, y)) {
        pending.push_back({x, y});
      }
    }
  }

  auto cell = [&](int n, int x, int y) -> int& {
    const auto un = static_cast<std::size_t>(n);
    const int r = static_cast<int>(std::lround(x * cos_tab[un] + y * sin_tab[un])) +
                  rho_offset;
    return accum[un * num_rho + static_cast<std::size_t>(r)];
  };

  std::mt19937_64 rng(seed);
  std::vector<LineSegment> lines;

  for (std::size_t count = pending.size(); count > 0; --count) {
    const std::size_t pick = static_cast<std::size_t>(rng() % count);
    const Pixel seed_px = pending[pick];
    pending[pick] = pending[count - 1];

    const std::size_t seed_idx = static_cast<std::size_t>(seed_px.y) * w + seed_px.x;
    if (!live[seed_idx]) {
      continue;
    }

    int best_votes = params.vote_threshold - 1;
    int best_angle = 0;
    for (int n = 0; n < num_angle; ++n) {
      const int votes = ++cell(n, seed_px.x, seed_px.y);
      if (votes > best_votes) {
        best_votes = votes;
        best_angle = n;
      }
    }
    voted[seed_idx] = 1;
    if (best_votes < params.vote_threshold) {
      continue;
    }

    // Walk along the line direction (-sin, cos) stepping one pixel on the
    // dominant axis.
    const double dir_x = -sin_tab[static_cast<std::size_t>(best_angle)];
    const double dir_y = cos_tab[static_cast<std::size_t>(best_angle)];
    const bool x_major = std::fabs(dir_x) >= std::fabs(dir_y);
    const double step_x = x_major ? (dir_x > 0 ? 1.0 : -1.0) : dir_x / std::fabs(dir_y);
    const double step_y = x_major ? dir_y / std::fabs(dir_x) : (dir_y > 0 ? 1.0 : -1.0);

    auto point_at = [&](int k, long t) {
      const double sign = k == 0 ? 1.0 : -1.0;
      const double fx = seed_px.x + sign * t * step_x;
      const double fy = seed_px.y + sign * t * step_y;
      return Pixel{static_cast<int>(std::floor(fx + 0.5)),
                   static_cast<int>(std::floor(fy + 0.5))};
    };

    Pixel line_end[2] = {seed_px, seed_px};
    long end_step[2] = {0, 0};
    for (int k = 0; k < 2; ++k) {
      int gap = 0;
      for (long t = 0;; ++t) {
        const Pixel p = point_at(k, t);
        if (!edges.contains(p.x, p.y)) {
          break;
        }
        if (live[static_cast<std::size_t>(p.y) * w + p.x]) {
          gap = 0;
          line_end[k] = p;
          end_step[k] = t;
        } else if (++gap > params.max_line_gap) {
          break;
        }
      }
    }

    const bool good_line =
        std::abs(line_end[1].x - line_end[0].x) >= params.min_line_length ||
        std::abs(line_end[1].y - line_end[0].y) >= params.min_line_length;

    for (int k = 0; k < 2; ++k) {
      for (long t = 0; t <= end_step[k]; ++t) {
        const Pixel p = point_at(k, t);
        const std::size_t i = static_cast<std::size_t>(p.y) * w + p.x;
        if (!live[i]) {
          continue;
        }
        if (good_line && voted[i]) {
          for (int n = 0; n < num_angle; ++n) {
            --cell(n, p.x, p.y);
          }
        }
        live[i] = 0;
      }
    }

    if (good_line) {
      lines.push_back(
          {line_end[0].x, line_end[0].y, line_end[1].x, line_end[1].y});
    }
  }
  return lines;
}

std::optional<Centroid> centroid_of(const std::vector<LineSegment>& segments) {
  if (segments.empty()) {
    return std::nullopt;
  }
  double sx = 0.0;
  double sy = 0.0;
  for (const auto& s : segments) {
    sx += s.x1 + s.x2;
    sy += s.y1 + s.y2;
  }
  const double n = 2.0 * static_cast<double>(segments.size());
  return Centroid{sx / n, sy / n};
}

DetectionStages detect_line_stages(const RgbImage& frame,
                                   const DetectionConfig& cfg,
                                   std::uint64_t seed) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();

  BinaryMask color_mask = threshold_hsv(convert_image(frame), cfg.hsv);
  BinaryMask cleaned = denoise(color_mask, cfg.morphology);
  GrayImage gray(cleaned.width(), cleaned.height());
  for (std::size_t i = 0; i < cleaned.size(); ++i) {
    gray.data()[i] = cleaned.data()[i] ? 255 : 0;
  }
  BinaryMask edges = canny(gray, cfg.canny);

  DetectionResult result;
  result.segments = hough_lines(edges, cfg.hough, seed);
  result.centroid = centroid_of(result.segments);
  result.timing = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - start)
                      .count();
  return {std::move(color_mask), std::move(cleaned), std::move(edges),
          std::move(result)};
}

DetectionResult detect_line(const RgbImage& frame, const DetectionConfig& cfg,
                            std::uint64_t seed) {
  return detect_line_stages(frame, cfg, seed).result;
}

}  // namespace linetrace
