#pragma once

#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include "linetrace/imaging.hpp"

namespace linetrace {

struct CannyParams {
  double low_threshold = 50.0;
  double high_threshold = 150.0;
  double blur_sigma = 1.4;

  void validate() const;
};

struct HoughParams {
  double rho_resolution = 1.0;
  double theta_resolution = std::numbers::pi / 180.0;
  int vote_threshold = 50;
  int min_line_length = 40;
  int max_line_gap = 50;

  void validate() const;
};

// Image coordinates: origin top-left, x right, y down.
struct LineSegment {
  int x1 = 0;
  int y1 = 0;
  int x2 = 0;
  int y2 = 0;

  double length() const noexcept;
  friend bool operator==(const LineSegment&, const LineSegment&) = default;
};

struct Centroid {
  double cx = 0.0;
  double cy = 0.0;

  friend bool operator==(const Centroid&, const Centroid&) = default;
};

struct DetectionConfig {
  HsvRange hsv{{18, 94, 140}, {48, 255, 255}};
  StructuringElement morphology{1};
  CannyParams canny;
  HoughParams hough;

  void validate() const;
};

struct DetectionResult {
  std::vector<LineSegment> segments;
  std::optional<Centroid> centroid;  // present iff segments is non-empty
  double timing = 0.0;               // wall seconds spent in detect_line
};

// Intermediate rasters of one pipeline pass, kept for debug dumps.
struct DetectionStages {
  BinaryMask color_mask;
  BinaryMask denoised;
  BinaryMask edges;
  DetectionResult result;
};

// round(0.299 r + 0.587 g + 0.114 b), computed exactly in integers.
GrayImage to_gray(const RgbImage& img);

// Fixed-point Gaussian taps k[0..radius] (center first). radius is
// max(1, ceil(3 sigma)) for sigma > 0 and 0 (identity) for sigma == 0.
std::vector<std::int64_t> gaussian_taps(double sigma);

// Gaussian smoothing (replicated border), Sobel gradients, non-maximum
// suppression over 4 direction bins, then double-threshold hysteresis with
// 8-connectivity. All arithmetic is exact integer arithmetic on the
// fixed-point smoothed image; thresholds are in input-intensity units.
// Throws Error(kDegenerate) for images smaller than 3x3.
BinaryMask canny(const GrayImage& img, const CannyParams& params);

// Progressive probabilistic Hough transform. Edge pixels vote in random
// order drawn from a generator seeded with `seed`.
std::vector<LineSegment> hough_lines(const BinaryMask& edges,
                                     const HoughParams& params,
                                     std::uint64_t seed);

// Mean of all segment endpoints; absent for an empty list.
std::optional<Centroid> centroid_of(const std::vector<LineSegment>& segments);

DetectionStages detect_line_stages(const RgbImage& frame,
                                   const DetectionConfig& cfg,
                                   std::uint64_t seed);

DetectionResult detect_line(const RgbImage& frame, const DetectionConfig& cfg,
                            std::uint64_t seed);

}  // namespace linetrace
