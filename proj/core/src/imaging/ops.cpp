#include "noksha/imaging/ops.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "noksha/error.hpp"

namespace noksha::imaging {

RasterImage to_grayscale(const RasterImage& img) {
  if (img.channels() == 1) return img;
  RasterImage out(img.width(), img.height(), 1);
  const auto src = img.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const double y = 0.299 * src[3 * i] + 0.587 * src[3 * i + 1] + 0.114 * src[3 * i + 2];
    dst[i] = static_cast<std::uint8_t>(std::clamp(std::lround(y), 0L, 255L));
  }
  return out;
}

RasterImage to_rgb(const RasterImage& img) {
  if (img.channels() == 3) return img;
  RasterImage out(img.width(), img.height(), 3);
  const auto src = img.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[3 * i] = dst[3 * i + 1] = dst[3 * i + 2] = src[i];
  return out;
}

int otsu_threshold(const RasterImage& gray) {
  std::array<double, 256> hist{};
  for (auto v : gray.pixels()) hist[v] += 1.0;
  const double total = static_cast<double>(gray.pixels().size());
  if (std::count_if(hist.begin(), hist.end(), [](double h) { return h > 0; }) < 2) return -1;

  double sum_all = 0.0;
  for (int i = 0; i < 256; ++i) sum_all += i * hist[i];

  double weight_low = 0.0;
  double sum_low = 0.0;
  double best = -1.0;
  int best_t = 0;
  for (int t = 0; t < 255; ++t) {
    weight_low += hist[t];
    sum_low += t * hist[t];
    const double weight_high = total - weight_low;
    if (weight_low == 0.0 || weight_high == 0.0) continue;
    const double mean_low = sum_low / weight_low;
    const double mean_high = (sum_all - sum_low) / weight_high;
    const double diff = mean_low - mean_high;
    const double between = weight_low * weight_high * diff * diff;
    // Strict comparison keeps the lowest threshold among ties.
    if (between > best) {
      best = between;
      best_t = t;
    }
  }
  return best_t;
}

BinarizeResult binarize(const RasterImage& gray, ThresholdMethod method, Polarity polarity) {
  if (gray.channels() != 1) {
    throw ShapeError("binarize expects a single-channel image, got " + gray.shape_string());
  }
  BinarizeResult result{BinaryImage(gray.width(), gray.height()), method.threshold, false};
  if (method.kind == ThresholdMethod::Kind::kOtsu) {
    const int t = otsu_threshold(gray);
    if (t < 0) {
      result.degenerate_histogram = true;
      result.threshold = gray.pixels()[0];
      return result;
    }
    result.threshold = t;
  }
  const int t = result.threshold;
  for (int y = 0; y < gray.height(); ++y)
    for (int x = 0; x < gray.width(); ++x) {
      const bool dark = gray.at(x, y) <= t;
      result.image.set(x, y, polarity == Polarity::kForegroundDark ? dark : !dark);
    }
  return result;
}

RasterImage mask_apply(const RasterImage& original, const BinaryImage& mask,
                       std::uint8_t background) {
  if (original.width() != mask.width() || original.height() != mask.height()) {
    throw ShapeError("mask_apply: image " + original.shape_string() + " vs mask " +
                     mask.shape_string());
  }
  RasterImage out = original;
  for (int y = 0; y < original.height(); ++y)
    for (int x = 0; x < original.width(); ++x)
      if (!mask.at(x, y))
        for (int c = 0; c < original.channels(); ++c) out.at(x, y, c) = background;
  return out;
}

namespace {

void check_rect(const Rect& r, int width, int height) {
  if (r.x < 0 || r.y < 0 || r.width < 1 || r.height < 1 || r.x + r.width > width ||
      r.y + r.height > height) {
    throw OutOfBoundsError("crop rect (x=" + std::to_string(r.x) + ", y=" + std::to_string(r.y) +
                           ", w=" + std::to_string(r.width) + ", h=" + std::to_string(r.height) +
                           ") outside " + std::to_string(width) + "x" + std::to_string(height));
  }
}

}  // namespace

RasterImage crop(const RasterImage& img, const Rect& rect) {
  check_rect(rect, img.width(), img.height());
  RasterImage out(rect.width, rect.height, img.channels());
  for (int y = 0; y < rect.height; ++y)
    for (int x = 0; x < rect.width; ++x)
      for (int c = 0; c < img.channels(); ++c) out.at(x, y, c) = img.at(rect.x + x, rect.y + y, c);
  return out;
}

BinaryImage crop(const BinaryImage& img, const Rect& rect) {
  check_rect(rect, img.width(), img.height());
  BinaryImage out(rect.width, rect.height);
  for (int y = 0; y < rect.height; ++y)
    for (int x = 0; x < rect.width; ++x) out.set(x, y, img.at(rect.x + x, rect.y + y));
  return out;
}

RasterImage resize(const RasterImage& img, int new_width, int new_height, ResizeMode mode) {
  if (new_width < 1 || new_height < 1) {
    throw ShapeError("resize target " + std::to_string(new_width) + "x" +
                     std::to_string(new_height) + " must be at least 1x1");
  }
  if (new_width == img.width() && new_height == img.height()) return img;

  const int ch = img.channels();
  RasterImage out(new_width, new_height, ch);
  if (mode == ResizeMode::kNearest) {
    for (int y = 0; y < new_height; ++y) {
      const int sy = static_cast<int>(static_cast<long long>(y) * img.height() / new_height);
      for (int x = 0; x < new_width; ++x) {
        const int sx = static_cast<int>(static_cast<long long>(x) * img.width() / new_width);
        for (int c = 0; c < ch; ++c) out.at(x, y, c) = img.at(sx, sy, c);
      }
    }
    return out;
  }

  // Pixel-centre alignment: src = (dst + 0.5) * src_len / dst_len - 0.5, clamped.
  auto source_coord = [](int dst, int src_len, int dst_len, int& i0, int& i1, double& frac) {
    double s = (dst + 0.5) * src_len / dst_len - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(src_len - 1));
    i0 = static_cast<int>(std::floor(s));
    i1 = std::min(i0 + 1, src_len - 1);
    frac = s - i0;
  };
  for (int y = 0; y < new_height; ++y) {
    int y0, y1;
    double fy;
    source_coord(y, img.height(), new_height, y0, y1, fy);
    for (int x = 0; x < new_width; ++x) {
      int x0, x1;
      double fx;
      source_coord(x, img.width(), new_width, x0, x1, fx);
      for (int c = 0; c < ch; ++c) {
        const double top = img.at(x0, y0, c) * (1.0 - fx) + img.at(x1, y0, c) * fx;
        const double bottom = img.at(x0, y1, c) * (1.0 - fx) + img.at(x1, y1, c) * fx;
        const double v = top * (1.0 - fy) + bottom * fy;
        out.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return out;
}

void paste(RasterImage& dst, const RasterImage& src, int x, int y) {
  if (dst.channels() != src.channels()) {
    throw ShapeError("paste: channel mismatch " + src.shape_string() + " into " +
                     dst.shape_string());
  }
  check_rect(Rect{x, y, src.width(), src.height()}, dst.width(), dst.height());
  for (int yy = 0; yy < src.height(); ++yy)
    for (int xx = 0; xx < src.width(); ++xx)
      for (int c = 0; c < src.channels(); ++c) dst.at(x + xx, y + yy, c) = src.at(xx, yy, c);
}

RasterImage flip_horizontal(const RasterImage& img) {
  RasterImage out(img.width(), img.height(), img.channels());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < img.channels(); ++c)
        out.at(img.width() - 1 - x, y, c) = img.at(x, y, c);
  return out;
}

RasterImage flip_vertical(const RasterImage& img) {
  RasterImage out(img.width(), img.height(), img.channels());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < img.channels(); ++c)
        out.at(x, img.height() - 1 - y, c) = img.at(x, y, c);
  return out;
}

RasterImage rotate90(const RasterImage& img, int quarter_turns) {
  quarter_turns = ((quarter_turns % 4) + 4) % 4;
  if (quarter_turns == 0) return img;
  if (quarter_turns == 2) return flip_vertical(flip_horizontal(img));
  const int w = img.width();
  const int h = img.height();
  RasterImage out(h, w, img.channels());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < img.channels(); ++c) {
        if (quarter_turns == 1) {
          out.at(h - 1 - y, x, c) = img.at(x, y, c);  // clockwise
        } else {
          out.at(y, w - 1 - x, c) = img.at(x, y, c);
        }
      }
  return out;
}

}  // namespace noksha::imaging
