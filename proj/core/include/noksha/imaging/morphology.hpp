#pragma once

#include <cstddef>
#include <vector>

#include "noksha/imaging/raster.hpp"

namespace noksha::imaging {

// Binary morphology. Pixels outside the canvas read as background.

/// True where every true cell of `se`, placed with its origin on the pixel, lands on
/// foreground.
BinaryImage erode(const BinaryImage& img, const StructuringElement& se);

/// True where any true cell of the reflected `se` overlaps foreground.
BinaryImage dilate(const BinaryImage& img, const StructuringElement& se);

/// dilate(erode(img)). Anti-extensive and idempotent.
BinaryImage open(const BinaryImage& img, const StructuringElement& se);

/// erode(dilate(img)) with the intermediate dilation kept on a canvas grown by the
/// element's extent, so foreground touching the border is not eaten by the erosion.
/// Extensive and idempotent.
BinaryImage close(const BinaryImage& img, const StructuringElement& se);

/// Grows the canvas by `border` pixels on every side, filling with `value`.
BinaryImage pad(const BinaryImage& img, int border, bool value = false);

enum class Connectivity { kFour = 4, kEight = 8 };

struct Components {
  /// Row-major labels, 0 for background, 1..count() for components in raster order of
  /// their first pixel.
  std::vector<int> labels;
  /// sizes[k-1] is the pixel count of component k.
  std::vector<std::size_t> sizes;
  int width = 0;
  int height = 0;

  std::size_t count() const noexcept { return sizes.size(); }
  int label_at(int x, int y) const { return labels[static_cast<std::size_t>(y) * width + x]; }
};

Components connected_components(const BinaryImage& img, Connectivity connectivity);

/// Drops components with fewer than `min_size` pixels.
BinaryImage remove_small_components(const BinaryImage& img, std::size_t min_size,
                                    Connectivity connectivity = Connectivity::kEight);

}  // namespace noksha::imaging
