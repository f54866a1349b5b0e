#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "linetrace/runner.hpp"

namespace linetrace {

// Binary netpbm: P6 for color frames, P4 for masks (1 = black ink).
void write_ppm(const std::filesystem::path& path, const RgbImage& img);
void write_pbm(const std::filesystem::path& path, const BinaryMask& mask);
// Reads P6 or P3 with maxval 255.
RgbImage read_ppm(const std::filesystem::path& path);
BinaryMask read_pbm(const std::filesystem::path& path);

// Debug overlay: segments in red, centroid as a cyan cross.
RgbImage annotate(const RgbImage& frame, const DetectionResult& result);

// Column order of the run log CSV.
const std::vector<std::string>& csv_columns();

// Header plus one row per frame, six significant digits, absent values as
// empty cells.
std::string format_csv(const RunLog& log);
void export_csv(const RunLog& log, const std::filesystem::path& path);
RunLog parse_csv(std::string_view text);
RunLog import_csv(const std::filesystem::path& path);

// Writes trajectory.svg, altitude.svg, heading_speed.svg and centroid.svg
// into `dir`, creating it if needed. Returns the written paths.
std::vector<std::filesystem::path> export_plots(const RunLog& log,
                                                const WorldSpec& world,
                                                const std::filesystem::path& dir);

}  // namespace linetrace
