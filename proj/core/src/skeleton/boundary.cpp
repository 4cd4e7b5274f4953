#include "noksha/skeleton/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "noksha/error.hpp"

namespace noksha::skeleton {

void BoundaryParams::validate() const {
  if (!(gradient_threshold >= 0.0 && gradient_threshold <= 255.0)) {
    throw ConfigError("gradient_threshold must lie in [0, 255]");
  }
}

std::vector<double> sobel_magnitude(const imaging::RasterImage& gray) {
  if (gray.channels() != 1) {
    throw ShapeError("extract_boundary expects a single-channel image, got " + gray.shape_string());
  }
  const int w = gray.width();
  const int h = gray.height();
  auto px = [&](int x, int y) -> double {
    return gray.at(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1));
  };
  std::vector<double> mag(static_cast<std::size_t>(w) * h);
  double peak = 0.0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double gx = (px(x + 1, y - 1) + 2 * px(x + 1, y) + px(x + 1, y + 1)) -
                        (px(x - 1, y - 1) + 2 * px(x - 1, y) + px(x - 1, y + 1));
      const double gy = (px(x - 1, y + 1) + 2 * px(x, y + 1) + px(x + 1, y + 1)) -
                        (px(x - 1, y - 1) + 2 * px(x, y - 1) + px(x + 1, y - 1));
      const double m = std::sqrt(gx * gx + gy * gy);
      mag[static_cast<std::size_t>(y) * w + x] = m;
      peak = std::max(peak, m);
    }
  if (peak > 0.0)
    for (auto& m : mag) m = m * 255.0 / peak;
  return mag;
}

imaging::BinaryImage extract_boundary(const imaging::RasterImage& gray,
                                      const BoundaryParams& params) {
  params.validate();
  const auto mag = sobel_magnitude(gray);
  imaging::BinaryImage out(gray.width(), gray.height());
  for (int y = 0; y < gray.height(); ++y)
    for (int x = 0; x < gray.width(); ++x) {
      const double m = mag[static_cast<std::size_t>(y) * gray.width() + x];
      out.set(x, y, m > 0.0 && m >= params.gradient_threshold);
    }
  return out;
}

}  // namespace noksha::skeleton
