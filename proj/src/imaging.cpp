#include "linetrace/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "linetrace/error.hpp"

namespace linetrace {

template <typename T>
Raster<T>::Raster(int width, int height, T fill)
    : width_(width), height_(height) {
  if (width < 1 || height < 1) {
    throw Error(ErrorKind::kInvalidArgument,
                "raster dimensions must be >= 1, got " + std::to_string(width) +
                    "x" + std::to_string(height));
  }
  data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
               fill);
}

template <typename T>
Raster<T>::Raster(int width, int height, std::vector<T> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width < 1 || height < 1) {
    throw Error(ErrorKind::kInvalidArgument,
                "raster dimensions must be >= 1, got " + std::to_string(width) +
                    "x" + std::to_string(height));
  }
  const auto expected =
      static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (data_.size() != expected) {
    throw Error(ErrorKind::kInvalidArgument,
                "raster data length " + std::to_string(data_.size()) +
                    " does not match " + std::to_string(expected));
  }
}

template class Raster<Rgb>;
template class Raster<HsvPixel>;
template class Raster<std::uint8_t>;

void HsvRange::validate() const {
  if (lower.h >= 180 || upper.h >= 180) {
    throw Error(ErrorKind::kInvalidArgument, "hue bounds must be < 180");
  }
  if (lower.h > upper.h || lower.s > upper.s || lower.v > upper.v) {
    throw Error(ErrorKind::kInvalidArgument,
                "HSV range lower bound exceeds upper bound");
  }
}

void StructuringElement::validate() const {
  if (half_width < 1) {
    throw Error(ErrorKind::kInvalidArgument,
                "structuring element half_width must be >= 1");
  }
}

HsvPixel rgb_to_hsv(Rgb pixel) noexcept {
  const int r = pixel.r;
  const int g = pixel.g;
  const int b = pixel.b;
  const int vmax = std::max({r, g, b});
  const int vmin = std::min({r, g, b});
  const int delta = vmax - vmin;

  HsvPixel out;
  out.v = static_cast<std::uint8_t>(vmax);
  if (delta == 0) {
    return out;
  }
  // round(255 * delta / vmax) in integers
  out.s = static_cast<std::uint8_t>((2 * 255 * delta + vmax) / (2 * vmax));

  double degrees = 0.0;
  if (vmax == r) {
    degrees = 60.0 * (g - b) / delta;
  } else if (vmax == g) {
    degrees = 120.0 + 60.0 * (b - r) / delta;
  } else {
    degrees = 240.0 + 60.0 * (r - g) / delta;
  }
  if (degrees < 0.0) {
    degrees += 360.0;
  }
  long half = std::lround(degrees / 2.0);
  if (half >= 180) {
    half -= 180;
  }
  out.h = static_cast<std::uint8_t>(half);
  return out;
}

HsvImage convert_image(const RgbImage& img) {
  std::vector<HsvPixel> out;
  out.reserve(img.size());
  // Frames are dominated by runs of identical colors.
  Rgb last{0, 0, 0};
  HsvPixel last_hsv = rgb_to_hsv(last);
  for (const Rgb& px : img.data()) {
    if (px.r != last.r || px.g != last.g || px.b != last.b) {
      last = px;
      last_hsv = rgb_to_hsv(px);
    }
    out.push_back(last_hsv);
  }
  return HsvImage(img.width(), img.height(), std::move(out));
}

BinaryMask threshold_hsv(const HsvImage& img, const HsvRange& range) {
  range.validate();
  const HsvPixel lo = range.lower;
  const HsvPixel hi = range.upper;
  BinaryMask mask(img.width(), img.height());
  auto& bits = mask.data();
  const auto& px = img.data();
  for (std::size_t i = 0; i < px.size(); ++i) {
    const HsvPixel p = px[i];
    bits[i] = (p.h >= lo.h && p.h <= hi.h && p.s >= lo.s && p.s <= hi.s &&
               p.v >= lo.v && p.v <= hi.v)
                  ? 1
                  : 0;
  }
  return mask;
}

namespace {

// A square min/max filter is separable, so run the 1-D pass along rows and
// then along columns. Out-of-bounds samples read as `border`.
template <typename Reduce>
BinaryMask square_filter(const BinaryMask& mask, int half_width,
                         std::uint8_t border, Reduce reduce) {
  const int w = mask.width();
  const int h = mask.height();
  const auto hw = static_cast<std::size_t>(half_width);
  const auto uw = static_cast<std::size_t>(w);

  BinaryMask rows(w, h);
  std::vector<std::uint8_t> line(uw + 2 * hw, border);
  for (int y = 0; y < h; ++y) {
    const std::uint8_t* src = mask.data().data() + static_cast<std::size_t>(y) * uw;
    std::copy(src, src + uw, line.begin() + static_cast<std::ptrdiff_t>(hw));
    std::uint8_t* dst = rows.data().data() + static_cast<std::size_t>(y) * uw;
    std::copy(line.begin(), line.begin() + static_cast<std::ptrdiff_t>(uw), dst);
    for (std::size_t k = 1; k <= 2 * hw; ++k) {
      const std::uint8_t* src = line.data() + k;
      for (std::size_t x = 0; x < uw; ++x) {
        dst[x] = reduce(dst[x], src[x]);
      }
    }
  }

  // A column sample outside the image stands for a whole kernel row of
  // border values.
  BinaryMask out(w, h);
  for (int y = 0; y < h; ++y) {
    std::uint8_t* dst = out.data().data() + static_cast<std::size_t>(y) * uw;
    const std::uint8_t* centre = rows.data().data() + static_cast<std::size_t>(y) * uw;
    std::copy(centre, centre + uw, dst);
    for (int k = -half_width; k <= half_width; ++k) {
      const int yy = y + k;
      if (yy < 0 || yy >= h) {
        for (std::size_t x = 0; x < uw; ++x) {
          dst[x] = reduce(dst[x], border);
        }
        continue;
      }
      const std::uint8_t* src = rows.data().data() + static_cast<std::size_t>(yy) * uw;
      for (std::size_t x = 0; x < uw; ++x) {
        dst[x] = reduce(dst[x], src[x]);
      }
    }
  }
  return out;
}

}  // namespace

BinaryMask erode(const BinaryMask& mask, StructuringElement se,
                 std::uint8_t border) {
  se.validate();
  return square_filter(mask, se.half_width, border ? 1 : 0,
                       [](std::uint8_t a, std::uint8_t b) {
                         return static_cast<std::uint8_t>(a & b);
                       });
}

BinaryMask dilate(const BinaryMask& mask, StructuringElement se,
                  std::uint8_t border) {
  se.validate();
  return square_filter(mask, se.half_width, border ? 1 : 0,
                       [](std::uint8_t a, std::uint8_t b) {
                         return static_cast<std::uint8_t>(a | b);
                       });
}

BinaryMask denoise(const BinaryMask& mask, StructuringElement se) {
  return dilate(erode(mask, se), se);
}

BinaryMask invert(const BinaryMask& mask) {
  BinaryMask out(mask.width(), mask.height());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    out.data()[i] = mask.data()[i] ? 0 : 1;
  }
  return out;
}

}  // namespace linetrace
