#include "linetrace/export.hpp"

#include <algorithm>
#include <cmath>
#include <cctype>
#include <limits>
#include <numbers>
#include <sstream>

#include "linetrace/error.hpp"
#include "text_format.hpp"

namespace linetrace {

namespace {

// ---- netpbm -------------------------------------------------------------

class PnmReader {
 public:
  explicit PnmReader(std::string data) : data_(std::move(data)) {}

  std::string token() {
    skip_space();
    std::string tok;
    while (pos_ < data_.size() && !std::isspace(static_cast<unsigned char>(data_[pos_]))) {
      tok.push_back(data_[pos_++]);
    }
    if (tok.empty()) {
      throw Error(ErrorKind::kParse, "truncated netpbm header");
    }
    return tok;
  }

  int number() { return static_cast<int>(text::parse_int(token(), "netpbm header field")); }

  // Exactly one whitespace byte separates the header from binary data.
  std::string_view raster(std::size_t bytes) {
    ++pos_;
    if (pos_ + bytes > data_.size()) {
      throw Error(ErrorKind::kParse, "truncated netpbm raster");
    }
    return std::string_view(data_).substr(pos_, bytes);
  }

 private:
  void skip_space() {
    while (pos_ < data_.size()) {
      if (data_[pos_] == '#') {
        while (pos_ < data_.size() && data_[pos_] != '\n') {
          ++pos_;
        }
      } else if (std::isspace(static_cast<unsigned char>(data_[pos_]))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::string data_;
  std::size_t pos_ = 0;
};

// ---- svg ------------------------------------------------------------------

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Series {
  std::string label;
  std::string color;
  std::vector<double> xs;
  std::vector<double> ys;  // NaN breaks the line
  bool right_axis = false;
};

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  bool empty() const { return !(lo <= hi); }
  void pad() {
    if (empty()) {
      lo = 0.0;
      hi = 1.0;
    } else if (hi - lo < 1e-9) {
      lo -= 0.5;
      hi += 0.5;
    } else {
      const double m = 0.05 * (hi - lo);
      lo -= m;
      hi += m;
    }
  }
};

std::string svg_plot(const std::string& title, const std::string& x_label,
                     const std::string& y_label, const std::string& y2_label,
                     std::vector<Series> series, bool equal_aspect) {
  series.erase(std::remove_if(series.begin(), series.end(),
                              [](const Series& s) {
                                return std::none_of(s.ys.begin(), s.ys.end(),
                                                    [](double v) { return std::isfinite(v); });
                              }),
               series.end());

  constexpr double kW = 820;
  constexpr double kH = 520;
  constexpr double kLeft = 80;
  constexpr double kRight = 80;
  constexpr double kTop = 50;
  constexpr double kBottom = 60;
  const double pw = kW - kLeft - kRight;
  const double ph = kH - kTop - kBottom;

  Range xr;
  Range yl;
  Range yr;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      if (!std::isfinite(s.ys[i])) {
        continue;
      }
      xr.add(s.xs[i]);
      (s.right_axis ? yr : yl).add(s.ys[i]);
    }
  }
  xr.pad();
  yl.pad();
  yr.pad();
  if (equal_aspect) {
    const double sx = (xr.hi - xr.lo) / pw;
    const double sy = (yl.hi - yl.lo) / ph;
    const double s = std::max(sx, sy);
    const double cx = 0.5 * (xr.lo + xr.hi);
    const double cy = 0.5 * (yl.lo + yl.hi);
    xr = {cx - 0.5 * s * pw, cx + 0.5 * s * pw};
    yl = {cy - 0.5 * s * ph, cy + 0.5 * s * ph};
  }

  auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double y, const Range& r) {
    return kTop + ph - (y - r.lo) / (r.hi - r.lo) * ph;
  };
  auto f = [](double v) { return text::format_sig(v, 6); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\""
      << kH << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kW / 2 << "\" y=\"28\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";
  svg << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw
      << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"black\"/>\n";

  const bool has_right = std::any_of(series.begin(), series.end(),
                                     [](const Series& s) { return s.right_axis; });
  for (int i = 0; i <= 5; ++i) {
    const double fx = xr.lo + (xr.hi - xr.lo) * i / 5.0;
    const double fy = yl.lo + (yl.hi - yl.lo) * i / 5.0;
    svg << "<text x=\"" << f(px(fx)) << "\" y=\"" << kTop + ph + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << text::format_sig(fx, 3) << "</text>\n";
    svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << f(py(fy, yl) + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << text::format_sig(fy, 3) << "</text>\n";
    if (has_right) {
      const double fr = yr.lo + (yr.hi - yr.lo) * i / 5.0;
      svg << "<text x=\"" << kLeft + pw + 6 << "\" y=\"" << f(py(fr, yr) + 4)
          << "\" text-anchor=\"start\" font-family=\"sans-serif\" font-size=\"11\">"
          << text::format_sig(fr, 3) << "</text>\n";
    }
  }
  svg << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kH - 15
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
      << x_label << "</text>\n";
  svg << "<text x=\"20\" y=\"" << kTop + ph / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
      << "transform=\"rotate(-90 20 " << kTop + ph / 2 << ")\">" << y_label << "</text>\n";
  if (has_right) {
    svg << "<text x=\"" << kW - 15 << "\" y=\"" << kTop + ph / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
        << "transform=\"rotate(90 " << kW - 15 << " " << kTop + ph / 2 << ")\">"
        << y2_label << "</text>\n";
  }

  int legend_row = 0;
  for (const auto& s : series) {
    const Range& r = s.right_axis ? yr : yl;
    std::string points;
    auto flush = [&] {
      if (!points.empty()) {
        svg << "<polyline fill=\"none\" stroke=\"" << s.color
            << "\" stroke-width=\"1.5\" points=\"" << points << "\"/>\n";
        points.clear();
      }
    };
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      if (!std::isfinite(s.ys[i])) {
        flush();
        continue;
      }
      points += f(px(s.xs[i])) + "," + f(py(s.ys[i], r)) + " ";
    }
    flush();
    const double ly = kTop + 14 + 16 * legend_row++;
    svg << "<line x1=\"" << kLeft + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << kLeft + 30
        << "\" y2=\"" << ly - 4 << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << kLeft + 36 << "\" y=\"" << ly
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.label << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string opt_cell(const std::optional<double>& v) {
  return v ? text::format_sig(*v) : std::string();
}

std::optional<double> opt_value(std::string_view cell, std::string_view what) {
  cell = text::trim(cell);
  if (cell.empty()) {
    return std::nullopt;
  }
  return text::parse_double(cell, what);
}

}  // namespace

void write_ppm(const std::filesystem::path& path, const RgbImage& img) {
  std::string out = "P6\n" + std::to_string(img.width()) + " " +
                    std::to_string(img.height()) + "\n255\n";
  out.reserve(out.size() + img.size() * 3);
  for (const Rgb& p : img.data()) {
    out.push_back(static_cast<char>(p.r));
    out.push_back(static_cast<char>(p.g));
    out.push_back(static_cast<char>(p.b));
  }
  text::write_file(path, out);
}

void write_pbm(const std::filesystem::path& path, const BinaryMask& mask) {
  std::string out = "P4\n" + std::to_string(mask.width()) + " " +
                    std::to_string(mask.height()) + "\n";
  const int row_bytes = (mask.width() + 7) / 8;
  for (int y = 0; y < mask.height(); ++y) {
    for (int b = 0; b < row_bytes; ++b) {
      unsigned char byte = 0;
      for (int bit = 0; bit < 8; ++bit) {
        const int x = b * 8 + bit;
        if (x < mask.width() && mask.at(x, y)) {
          byte |= static_cast<unsigned char>(0x80 >> bit);
        }
      }
      out.push_back(static_cast<char>(byte));
    }
  }
  text::write_file(path, out);
}

RgbImage read_ppm(const std::filesystem::path& path) {
  PnmReader in(text::read_file(path));
  const std::string magic = in.token();
  if (magic != "P6" && magic != "P3") {
    throw Error(ErrorKind::kParse, "'" + path.string() + "' is not a P6/P3 pixmap");
  }
  const int w = in.number();
  const int h = in.number();
  const int maxval = in.number();
  if (w < 1 || h < 1 || maxval != 255) {
    throw Error(ErrorKind::kParse, "unsupported pixmap geometry or maxval in '" +
                                       path.string() + "'");
  }
  RgbImage img(w, h);
  if (magic == "P6") {
    const auto raw = in.raster(static_cast<std::size_t>(w) * h * 3);
    for (std::size_t i = 0; i < img.size(); ++i) {
      img.data()[i] = {static_cast<std::uint8_t>(raw[3 * i]),
                       static_cast<std::uint8_t>(raw[3 * i + 1]),
                       static_cast<std::uint8_t>(raw[3 * i + 2])};
    }
  } else {
    for (Rgb& p : img.data()) {
      p.r = static_cast<std::uint8_t>(in.number());
      p.g = static_cast<std::uint8_t>(in.number());
      p.b = static_cast<std::uint8_t>(in.number());
    }
  }
  return img;
}

BinaryMask read_pbm(const std::filesystem::path& path) {
  PnmReader in(text::read_file(path));
  if (in.token() != "P4") {
    throw Error(ErrorKind::kParse, "'" + path.string() + "' is not a P4 bitmap");
  }
  const int w = in.number();
  const int h = in.number();
  const int row_bytes = (w + 7) / 8;
  const auto raw = in.raster(static_cast<std::size_t>(row_bytes) * h);
  BinaryMask mask(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto byte = static_cast<unsigned char>(raw[static_cast<std::size_t>(y) * row_bytes + x / 8]);
      mask.at(x, y) = (byte >> (7 - x % 8)) & 1;
    }
  }
  return mask;
}

RgbImage annotate(const RgbImage& frame, const DetectionResult& result) {
  RgbImage out = frame;
  const Rgb red{255, 0, 0};
  const Rgb cyan{0, 255, 255};
  auto plot = [&](int x, int y, Rgb c) {
    if (out.contains(x, y)) {
      out.at(x, y) = c;
    }
  };
  for (const auto& s : result.segments) {
    const int steps = std::max(std::abs(s.x2 - s.x1), std::abs(s.y2 - s.y1));
    for (int i = 0; i <= steps; ++i) {
      const double t = steps ? static_cast<double>(i) / steps : 0.0;
      const int x = static_cast<int>(std::lround(s.x1 + t * (s.x2 - s.x1)));
      const int y = static_cast<int>(std::lround(s.y1 + t * (s.y2 - s.y1)));
      for (int d = -1; d <= 1; ++d) {
        plot(x + d, y, red);
        plot(x, y + d, red);
      }
    }
  }
  if (result.centroid) {
    const int cx = static_cast<int>(std::lround(result.centroid->cx));
    const int cy = static_cast<int>(std::lround(result.centroid->cy));
    for (int d = -8; d <= 8; ++d) {
      plot(cx + d, cy, cyan);
      plot(cx, cy + d, cyan);
    }
  }
  return out;
}

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = {
      "frame", "t",     "x",     "y",     "z",       "yaw", "raw_cx", "raw_cy",
      "kf_cx", "kf_cy", "valid", "command", "vx", "yaw_rate", "vz", "detect_time"};
  return cols;
}

std::string format_csv(const RunLog& log) {
  std::string out;
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    out += cols[i];
    out += i + 1 < cols.size() ? ',' : '\n';
  }
  auto sig = [](double v) { return text::format_sig(v); };
  for (const auto& r : log.frames) {
    out += std::to_string(r.frame) + ',' + sig(r.t) + ',' + sig(r.x) + ',' + sig(r.y) +
           ',' + sig(r.z) + ',' + sig(r.yaw) + ',';
    out += (r.raw ? sig(r.raw->cx) : "") + ',' + (r.raw ? sig(r.raw->cy) : "") + ',';
    out += (r.filtered ? sig(r.filtered->cx) : "") + ',' +
           (r.filtered ? sig(r.filtered->cy) : "") + ',';
    out += std::string(r.valid ? "1" : "0") + ',';
    out += (r.command ? std::string(to_string(*r.command)) : "") + ',';
    out += sig(r.setpoint.vx_body) + ',' + sig(r.setpoint.yaw_rate) + ',' +
           sig(r.setpoint.vz) + ',';
    out += opt_cell(r.detect_time) + '\n';
  }
  return out;
}

void export_csv(const RunLog& log, const std::filesystem::path& path) {
  text::write_file(path, format_csv(log));
}

RunLog parse_csv(std::string_view source) {
  auto lines = text::split(source, '\n');
  while (!lines.empty() && text::trim(lines.back()).empty()) {
    lines.pop_back();
  }
  if (lines.empty()) {
    throw Error(ErrorKind::kParse, "run log is empty");
  }
  const auto& cols = csv_columns();
  const auto header = text::split(text::trim(lines[0]), ',');
  if (header.size() != cols.size() ||
      !std::equal(header.begin(), header.end(), cols.begin())) {
    throw Error(ErrorKind::kParse, "run log header does not match the expected columns");
  }

  RunLog log;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto cells = text::split(text::trim(lines[li]), ',');
    if (cells.size() != cols.size()) {
      throw Error(ErrorKind::kParse, "run log line " + std::to_string(li + 1) + ": expected " +
                                         std::to_string(cols.size()) + " fields");
    }
    FrameRecord r;
    r.frame = static_cast<int>(text::parse_int(cells[0], "frame"));
    if (r.frame != static_cast<int>(li - 1)) {
      throw Error(ErrorKind::kParse, "run log frame indices are not contiguous from 0");
    }
    r.t = text::parse_double(cells[1], "t");
    r.x = text::parse_double(cells[2], "x");
    r.y = text::parse_double(cells[3], "y");
    r.z = text::parse_double(cells[4], "z");
    r.yaw = text::parse_double(cells[5], "yaw");
    const auto rcx = opt_value(cells[6], "raw_cx");
    const auto rcy = opt_value(cells[7], "raw_cy");
    if (rcx.has_value() != rcy.has_value()) {
      throw Error(ErrorKind::kParse, "raw centroid must have both or neither coordinate");
    }
    if (rcx) {
      r.raw = Centroid{*rcx, *rcy};
    }
    const auto kcx = opt_value(cells[8], "kf_cx");
    const auto kcy = opt_value(cells[9], "kf_cy");
    if (kcx.has_value() != kcy.has_value()) {
      throw Error(ErrorKind::kParse, "filtered centroid must have both or neither coordinate");
    }
    if (kcx) {
      r.filtered = Centroid{*kcx, *kcy};
    }
    r.valid = text::parse_bool(cells[10], "valid");
    if (!text::trim(cells[11]).empty()) {
      r.command = nav_command_from_string(text::trim(cells[11]));
    }
    r.setpoint.vx_body = text::parse_double(cells[12], "vx");
    r.setpoint.yaw_rate = text::parse_double(cells[13], "yaw_rate");
    r.setpoint.vz = text::parse_double(cells[14], "vz");
    r.detect_time = opt_value(cells[15], "detect_time");
    log.frames.push_back(r);
  }
  if (log.frames.size() >= 2) {
    log.dt = log.frames[1].t - log.frames[0].t;
  }
  return log;
}

RunLog import_csv(const std::filesystem::path& path) {
  return parse_csv(text::read_file(path));
}

std::vector<std::filesystem::path> export_plots(const RunLog& log,
                                                const WorldSpec& world,
                                                const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw Error(ErrorKind::kIo, "cannot create '" + dir.string() + "': " + ec.message());
  }

  Series path_series{"pre-defined path", "#d4a017", {}, {}, false};
  for (const auto& e : world.path) {
    const double len = element_length(e);
    const int n = std::max(1, static_cast<int>(std::ceil(len / 0.02)));
    for (int i = 0; i <= n; ++i) {
      const Vec2 p = element_point_at(e, len * i / n);
      path_series.xs.push_back(p.y);  // east to the right, north up
      path_series.ys.push_back(p.x);
    }
  }
  Series traj{"flight trajectory", "#d62728", {}, {}, false};
  Series alt{"altitude", "#1f77b4", {}, {}, false};
  Series heading{"heading (deg)", "#1f77b4", {}, {}, false};
  Series speed{"forward speed (m/s)", "#2ca02c", {}, {}, true};
  Series raw_cx{"raw cx", "#1f77b4", {}, {}, false};
  Series kf_cx{"kalman cx", "#d62728", {}, {}, false};
  Series raw_cy{"raw cy", "#9ecae1", {}, {}, false};
  Series kf_cy{"kalman cy", "#fc9272", {}, {}, false};

  double unwrapped = 0.0;
  for (std::size_t i = 0; i < log.frames.size(); ++i) {
    const auto& r = log.frames[i];
    traj.xs.push_back(r.y);
    traj.ys.push_back(r.x);
    alt.xs.push_back(r.t);
    alt.ys.push_back(r.z);
    unwrapped = i == 0 ? r.yaw
                       : unwrapped + wrap_angle(r.yaw - log.frames[i - 1].yaw);
    heading.xs.push_back(r.t);
    heading.ys.push_back(unwrapped * 180.0 / std::numbers::pi);
    speed.xs.push_back(r.t);
    speed.ys.push_back(r.setpoint.vx_body);
    for (Series* s : {&raw_cx, &kf_cx, &raw_cy, &kf_cy}) {
      s->xs.push_back(r.t);
    }
    raw_cx.ys.push_back(r.raw ? r.raw->cx : kNaN);
    raw_cy.ys.push_back(r.raw ? r.raw->cy : kNaN);
    kf_cx.ys.push_back(r.filtered ? r.filtered->cx : kNaN);
    kf_cy.ys.push_back(r.filtered ? r.filtered->cy : kNaN);
  }

  std::vector<std::filesystem::path> written;
  auto emit = [&](const char* name, const std::string& svg) {
    const auto p = dir / name;
    text::write_file(p, svg);
    written.push_back(p);
  };
  emit("trajectory.svg", svg_plot("2D trajectory vs. pre-defined path", "local y (m)",
                                  "local x (m)", "", {path_series, traj}, true));
  emit("altitude.svg",
       svg_plot("Altitude", "time (s)", "altitude (m)", "", {alt}, false));
  emit("heading_speed.svg", svg_plot("Heading and forward speed", "time (s)",
                                     "heading (deg)", "forward speed (m/s)",
                                     {heading, speed}, false));
  emit("centroid.svg", svg_plot("Raw vs. Kalman-filtered centroid", "time (s)",
                                "image coordinate (px)", "",
                                {raw_cx, kf_cx, raw_cy, kf_cy}, false));
  return written;
}

}  // namespace linetrace
