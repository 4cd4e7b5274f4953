#pragma once

#include <cstdint>

#include "noksha/imaging/raster.hpp"

namespace noksha::imaging {

/// Rec.601 luma, round(0.299R + 0.587G + 0.114B). Gray input is returned unchanged.
RasterImage to_grayscale(const RasterImage& img);

/// Replicates a gray channel into RGB. RGB input is returned unchanged.
RasterImage to_rgb(const RasterImage& img);

enum class Polarity { kForegroundDark, kForegroundLight };

struct ThresholdMethod {
  enum class Kind { kFixed, kOtsu };
  Kind kind = Kind::kOtsu;
  int threshold = 128;

  static ThresholdMethod otsu() { return {Kind::kOtsu, 0}; }
  static ThresholdMethod fixed(int t) { return {Kind::kFixed, t}; }
};

struct BinarizeResult {
  BinaryImage image;
  /// Intensities <= threshold form the dark class.
  int threshold = 0;
  /// Set when Otsu saw a single-level histogram; the image is then all background.
  bool degenerate_histogram = false;
};

/// Foreground-dark marks pixels with intensity <= threshold; foreground-light marks
/// intensity > threshold.
BinarizeResult binarize(const RasterImage& gray, ThresholdMethod method = ThresholdMethod::otsu(),
                        Polarity polarity = Polarity::kForegroundDark);

/// Threshold maximising between-class variance over the 256-bin histogram, ties toward
/// the lower threshold. Returns -1 for a histogram with a single occupied bin.
int otsu_threshold(const RasterImage& gray);

/// Keeps original values under foreground, fills background with `background` (white).
RasterImage mask_apply(const RasterImage& original, const BinaryImage& mask,
                       std::uint8_t background = 255);

RasterImage crop(const RasterImage& img, const Rect& rect);
BinaryImage crop(const BinaryImage& img, const Rect& rect);

enum class ResizeMode { kNearest, kBilinear };

RasterImage resize(const RasterImage& img, int new_width, int new_height,
                   ResizeMode mode = ResizeMode::kBilinear);

/// Copies `src` into `dst` with its top-left corner at (x, y). Channels must agree.
void paste(RasterImage& dst, const RasterImage& src, int x, int y);

RasterImage flip_horizontal(const RasterImage& img);
RasterImage flip_vertical(const RasterImage& img);
/// Clockwise quarter turns, `quarter_turns` in {0,1,2,3}.
RasterImage rotate90(const RasterImage& img, int quarter_turns);

}  // namespace noksha::imaging
