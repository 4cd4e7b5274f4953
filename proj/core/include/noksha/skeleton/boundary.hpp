#pragma once

#include <vector>

#include "noksha/imaging/raster.hpp"

namespace noksha::skeleton {

struct BoundaryParams {
  /// Cut-off on the Sobel magnitude after normalising the image maximum to 255.
  double gradient_threshold = 64.0;

  void validate() const;
};

/// Sobel gradient magnitude with replicated borders, scaled so the global maximum is 255.
/// A constant image yields all zeros.
std::vector<double> sobel_magnitude(const imaging::RasterImage& gray);

/// Foreground where the normalised magnitude is non-zero and >= the threshold.
imaging::BinaryImage extract_boundary(const imaging::RasterImage& gray,
                                      const BoundaryParams& params = {});

}  // namespace noksha::skeleton
