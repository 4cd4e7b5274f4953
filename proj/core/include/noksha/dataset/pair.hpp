#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "noksha/imaging/raster.hpp"

namespace noksha::dataset {

using imaging::RasterImage;

/// Side of each half of a training pair.
inline constexpr int kPairSide = 256;

enum class Provenance { kAutoSkeleton, kReducedBranch, kHandSketch, kBoundary, kEnhancedResolution };

enum class AugmentOp { kNone, kFlipH, kFlipV, kRot90, kRot180, kRot270 };

std::string_view to_string(Provenance p);
Provenance provenance_from_string(std::string_view s);
std::string_view to_string(AugmentOp op);
AugmentOp augment_op_from_string(std::string_view s);

struct PairSample {
  RasterImage condition;  // 256x256
  RasterImage target;     // 256x256
  std::string id;
  Provenance provenance = Provenance::kAutoSkeleton;
  std::optional<AugmentOp> augmentation;
};

/// Side-by-side 512x256 RGB image: condition in columns 0-255, target in 256-511.
/// Gray halves are promoted to RGB.
RasterImage compose_pair(const RasterImage& condition, const RasterImage& target);

/// Inverse of compose_pair.
std::pair<RasterImage, RasterImage> split_pair(const RasterImage& combined);

/// Ordered geometric ops, each applied identically to condition and target.
struct AugmentationPolicy {
  std::vector<AugmentOp> ops;

  /// Parses "flip-h,rot90,..."; empty string gives an empty policy.
  static AugmentationPolicy parse(std::string_view csv);
};

RasterImage apply_augmentation(const RasterImage& img, AugmentOp op);

/// The original followed by one transformed pair per op, ids suffixed "_<op>".
std::vector<PairSample> augment(const PairSample& sample, const AugmentationPolicy& policy);

}  // namespace noksha::dataset
