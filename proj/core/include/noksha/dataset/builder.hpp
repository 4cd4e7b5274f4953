#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "noksha/dataset/manifest.hpp"
#include "noksha/dataset/pair.hpp"
#include "noksha/imaging/ops.hpp"
#include "noksha/skeleton/boundary.hpp"
#include "noksha/skeleton/skeleton.hpp"

namespace noksha::dataset {

enum class Variant { kSkeleton, kReducedBranch, kSketch, kBoundary, kEnhancedResolution };

/// CLI names: skeleton, reduced, sketch, boundary, enhanced.
std::string_view to_string(Variant v);
Variant variant_from_string(std::string_view s);
Provenance provenance_of(Variant v);

/// Pair counts of the published dataset, for comparison in build reports.
std::size_t published_variant_size(Variant v);

struct BuildConfig {
  Variant variant = Variant::kSkeleton;
  std::filesystem::path source_dir;
  std::filesystem::path out_dir;
  /// Hand drawings for the sketch variant, paired by file stem. Defaults to <source>/sketches.
  std::optional<std::filesystem::path> sketch_dir;
  AugmentationPolicy augmentation;
  std::uint64_t seed = 0;
  double split_ratio = 0.9;

  imaging::Polarity polarity = imaging::Polarity::kForegroundDark;
  imaging::ThresholdMethod threshold = imaging::ThresholdMethod::otsu();
  /// Opening applied to the binarised motif to drop speckle.
  imaging::StructuringElement open_se = imaging::StructuringElement::square(3);
  skeleton::SkeletonParams skeleton;
  /// Erosion used by the reduced-branch variant before thinning.
  imaging::StructuringElement reduce_se = imaging::StructuringElement::square(3);
  skeleton::BoundaryParams boundary;
  /// Enhanced variant: crops whose shorter side is below this are left out.
  int min_source_side = 256;
  /// Overrides the recorded or computed source checksum.
  std::optional<std::string> source_checksum;

  void validate() const;
};

struct BuildReport {
  DatasetManifest manifest;
  std::filesystem::path manifest_path;
  std::size_t sources_seen = 0;
  /// Sources left out by the enhanced-resolution filter.
  std::size_t filtered = 0;
  /// Per-entry failures; the entry is skipped and the build continues.
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
  std::size_t reference_size = 0;
};

/// The condition/target pair for one motif crop, both 256x256 RGB. The crop is first
/// resized to 256x256; the target is the crop with everything outside the opened
/// foreground mask set to white, and the condition is the variant's line drawing
/// rendered black on white. For the sketch variant `sketch` supplies the condition.
PairSample make_pair(const imaging::RasterImage& crop, const BuildConfig& config, const std::string& id,
                     const imaging::RasterImage* sketch = nullptr);

/// Runs the variant pipeline over every PNG in the source directory (sorted by name),
/// writes <out>/pairs/<id>.png and <out>/manifest.json, and splits with the configured
/// ratio and seed.
BuildReport build_variant(const BuildConfig& config);

}  // namespace noksha::dataset
