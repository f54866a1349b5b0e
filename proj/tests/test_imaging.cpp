#include <gtest/gtest.h>

#include <random>

#include "linetrace/error.hpp"
#include "linetrace/imaging.hpp"
#include "oracles.hpp"

using namespace linetrace;

namespace {

BinaryMask random_mask(int w, int h, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution bit(p);
  BinaryMask m(w, h);
  for (auto& v : m.data()) v = bit(rng) ? 1 : 0;
  return m;
}

bool subset(const BinaryMask& a, const BinaryMask& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a.data()[i] && !b.data()[i]) return false;
  return true;
}

}  // namespace

TEST(Hsv, PrimaryColors) {
  EXPECT_EQ(rgb_to_hsv({255, 0, 0}), (HsvPixel{0, 255, 255}));
  EXPECT_EQ(rgb_to_hsv({0, 255, 0}), (HsvPixel{60, 255, 255}));
  EXPECT_EQ(rgb_to_hsv({0, 0, 255}), (HsvPixel{120, 255, 255}));
  EXPECT_EQ(rgb_to_hsv({255, 255, 0}), (HsvPixel{30, 255, 255}));
  EXPECT_EQ(rgb_to_hsv({0, 0, 0}), (HsvPixel{0, 0, 0}));
  EXPECT_EQ(rgb_to_hsv({128, 128, 128}), (HsvPixel{0, 0, 128}));
}

TEST(Hsv, YellowInsideDefaultBandAndGrayOutside) {
  const HsvRange band{{18, 94, 140}, {48, 255, 255}};
  HsvImage img(2, 1);
  img.at(0, 0) = rgb_to_hsv({255, 255, 0});
  img.at(1, 0) = rgb_to_hsv({128, 128, 128});
  const BinaryMask m = threshold_hsv(img, band);
  EXPECT_EQ(m.at(0, 0), 1);
  EXPECT_EQ(m.at(1, 0), 0);
}

TEST(Hsv, ValueIsMaxAndSaturationZeroIffGray) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> c(0, 255);
  for (int i = 0; i < 20000; ++i) {
    Rgb p{static_cast<std::uint8_t>(c(rng)), static_cast<std::uint8_t>(c(rng)),
          static_cast<std::uint8_t>(c(rng))};
    if (i % 5 == 0) p.g = p.b = p.r;
    const HsvPixel h = rgb_to_hsv(p);
    EXPECT_EQ(h.v, std::max({p.r, p.g, p.b}));
    EXPECT_EQ(h.s == 0, p.r == p.g && p.g == p.b);
    EXPECT_LT(h.h, 180);
  }
}

TEST(Hsv, ConvertImageMatchesPerPixel) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> c(0, 255);
  RgbImage img(17, 9);
  for (auto& p : img.data())
    p = {static_cast<std::uint8_t>(c(rng)), static_cast<std::uint8_t>(c(rng)),
         static_cast<std::uint8_t>(c(rng))};
  const HsvImage out = convert_image(img);
  ASSERT_EQ(out.width(), 17);
  ASSERT_EQ(out.height(), 9);
  for (std::size_t i = 0; i < img.size(); ++i)
    EXPECT_EQ(out.data()[i], rgb_to_hsv(img.data()[i]));
}

TEST(Hsv, ThresholdIsMonotoneInTheRange) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> c(0, 255);
  HsvImage img(32, 32);
  for (auto& p : img.data())
    p = {static_cast<std::uint8_t>(c(rng) % 180), static_cast<std::uint8_t>(c(rng)),
         static_cast<std::uint8_t>(c(rng))};
  const HsvRange narrow{{20, 100, 100}, {40, 200, 200}};
  const HsvRange wide{{10, 50, 50}, {60, 255, 255}};
  EXPECT_TRUE(subset(threshold_hsv(img, narrow), threshold_hsv(img, wide)));
}

TEST(Hsv, InvalidRangeRejected) {
  HsvImage img(4, 4);
  EXPECT_THROW(threshold_hsv(img, {{50, 0, 0}, {40, 255, 255}}), Error);
  EXPECT_THROW(threshold_hsv(img, {{0, 0, 0}, {180, 255, 255}}), Error);
}

TEST(Morphology, IsolatedPixelErodesAway) {
  BinaryMask m(7, 7);
  m.at(3, 3) = 1;
  const BinaryMask e = erode(m, {1});
  for (auto v : e.data()) EXPECT_EQ(v, 0);
}

TEST(Morphology, SolidBlockErodesToCenter) {
  BinaryMask m(7, 7);
  for (int y = 2; y <= 4; ++y)
    for (int x = 2; x <= 4; ++x) m.at(x, y) = 1;
  const BinaryMask e = erode(m, {1});
  BinaryMask want(7, 7);
  want.at(3, 3) = 1;
  EXPECT_EQ(e, want);
}

TEST(Morphology, SinglePixelDilatesToBlock) {
  BinaryMask m(7, 7);
  m.at(3, 3) = 1;
  const BinaryMask d = dilate(m, {1});
  for (int y = 0; y < 7; ++y)
    for (int x = 0; x < 7; ++x)
      EXPECT_EQ(d.at(x, y), (std::abs(x - 3) <= 1 && std::abs(y - 3) <= 1) ? 1 : 0);
}

TEST(Morphology, ErodeAndDilateMatchBruteForce) {
  for (int half = 1; half <= 3; ++half) {
    for (std::uint64_t s = 0; s < 20; ++s) {
      const BinaryMask m = random_mask(16, 16, 0.3 + 0.03 * static_cast<double>(s), s);
      EXPECT_EQ(erode(m, {half}), oracle::min_filter(m, half, 0));
      EXPECT_EQ(dilate(m, {half}), oracle::max_filter(m, half, 0));
      EXPECT_EQ(erode(m, {half}, 1), oracle::min_filter(m, half, 1));
    }
  }
}

TEST(Morphology, OddShapesMatchBruteForce) {
  for (auto [w, h] : {std::pair{1, 1}, {1, 9}, {9, 1}, {3, 40}, {41, 5}}) {
    const BinaryMask m = random_mask(w, h, 0.6, static_cast<std::uint64_t>(w * 100 + h));
    EXPECT_EQ(erode(m, {2}), oracle::min_filter(m, 2, 0));
    EXPECT_EQ(dilate(m, {2}), oracle::max_filter(m, 2, 0));
  }
}

TEST(Morphology, Duality) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const BinaryMask m = random_mask(20, 13, 0.5, 100 + s);
    EXPECT_EQ(erode(m, {1}, 1), invert(dilate(invert(m), {1})));
  }
}

TEST(Morphology, OpeningIsAntiExtensiveAndIdempotent) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const BinaryMask m = random_mask(24, 24, 0.55, 200 + s);
    const BinaryMask o = denoise(m, {1});
    EXPECT_TRUE(subset(o, m));
    EXPECT_EQ(denoise(o, {1}), o);
  }
}

TEST(Morphology, OpeningRemovesSmallComponentsKeepsLargeRectangle) {
  BinaryMask m(30, 30);
  m.at(2, 2) = 1;                       // single pixel
  m.at(6, 6) = m.at(7, 6) = 1;          // 2x1 blob
  m.at(10, 2) = m.at(11, 3) = 1;        // diagonal pair
  for (int y = 12; y < 20; ++y)
    for (int x = 10; x < 25; ++x) m.at(x, y) = 1;
  BinaryMask want(30, 30);
  for (int y = 12; y < 20; ++y)
    for (int x = 10; x < 25; ++x) want.at(x, y) = 1;
  EXPECT_EQ(denoise(m, {1}), want);
}

TEST(Morphology, NegativeHalfWidthRejected) {
  BinaryMask m(4, 4);
  EXPECT_THROW(erode(m, {-1}), Error);
}

TEST(Raster, RejectsMismatchedData) {
  EXPECT_THROW(GrayImage(3, 3, std::vector<std::uint8_t>(8)), Error);
  EXPECT_THROW(GrayImage(0, 3), Error);
}
