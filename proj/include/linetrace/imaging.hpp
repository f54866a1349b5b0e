#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace linetrace {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

// Hue is stored in half-degree units [0, 180) so that 8-bit HSV bands such
// as yellow [18..48] are directly representable.
struct HsvPixel {
  std::uint8_t h = 0;
  std::uint8_t s = 0;
  std::uint8_t v = 0;

  friend bool operator==(const HsvPixel&, const HsvPixel&) = default;
};

// Inclusive, non-wrapping component-wise band.
struct HsvRange {
  HsvPixel lower;
  HsvPixel upper;

  // Throws Error(kInvalidArgument) if any lower component exceeds its upper
  // counterpart or a hue is >= 180.
  void validate() const;
};

// Row-major raster of `T`. Width and height are >= 1.
template <typename T>
class Raster {
 public:
  Raster(int width, int height, T fill = T{});
  Raster(int width, int height, std::vector<T> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }

  T& at(int x, int y) { return data_[index(x, y)]; }
  const T& at(int x, int y) const { return data_[index(x, y)]; }

  std::vector<T>& data() noexcept { return data_; }
  const std::vector<T>& data() const noexcept { return data_; }

  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_;
  int height_;
  std::vector<T> data_;
};

using RgbImage = Raster<Rgb>;
using HsvImage = Raster<HsvPixel>;
using GrayImage = Raster<std::uint8_t>;
// Values are 0 or 1 only.
using BinaryMask = Raster<std::uint8_t>;

extern template class Raster<Rgb>;
extern template class Raster<HsvPixel>;
extern template class Raster<std::uint8_t>;

// Square all-ones kernel of side 2 * half_width + 1.
struct StructuringElement {
  int half_width = 1;

  void validate() const;
};

HsvPixel rgb_to_hsv(Rgb pixel) noexcept;
HsvImage convert_image(const RgbImage& img);

BinaryMask threshold_hsv(const HsvImage& img, const HsvRange& range);

// Out-of-bounds neighbours read as `border`; the public convention is 0 for
// both operations. Passing 1 to erode gives the exact dual of dilate.
BinaryMask erode(const BinaryMask& mask, StructuringElement se,
                 std::uint8_t border = 0);
BinaryMask dilate(const BinaryMask& mask, StructuringElement se,
                  std::uint8_t border = 0);

// Morphological opening (erode then dilate).
BinaryMask denoise(const BinaryMask& mask, StructuringElement se);

BinaryMask invert(const BinaryMask& mask);

}  // namespace linetrace
