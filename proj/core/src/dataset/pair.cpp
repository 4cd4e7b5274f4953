#include "noksha/dataset/pair.hpp"

#include <array>

#include "noksha/error.hpp"
#include "noksha/imaging/ops.hpp"

namespace noksha::dataset {

namespace {

constexpr std::array<std::pair<Provenance, std::string_view>, 5> kProvenanceNames{{
    {Provenance::kAutoSkeleton, "auto-skeleton"},
    {Provenance::kReducedBranch, "reduced-branch"},
    {Provenance::kHandSketch, "hand-sketch"},
    {Provenance::kBoundary, "boundary"},
    {Provenance::kEnhancedResolution, "enhanced-resolution"},
}};

constexpr std::array<std::pair<AugmentOp, std::string_view>, 6> kOpNames{{
    {AugmentOp::kNone, "none"},
    {AugmentOp::kFlipH, "flip-h"},
    {AugmentOp::kFlipV, "flip-v"},
    {AugmentOp::kRot90, "rot90"},
    {AugmentOp::kRot180, "rot180"},
    {AugmentOp::kRot270, "rot270"},
}};

void require_half(const RasterImage& img, const char* which) {
  if (img.width() != kPairSide || img.height() != kPairSide) {
    throw ShapeError(std::string(which) + " image must be 256x256, got " + img.shape_string());
  }
}

}  // namespace

std::string_view to_string(Provenance p) {
  for (const auto& [k, v] : kProvenanceNames)
    if (k == p) return v;
  return "unknown";
}

Provenance provenance_from_string(std::string_view s) {
  for (const auto& [k, v] : kProvenanceNames)
    if (v == s) return k;
  throw ConfigError("unknown provenance '" + std::string(s) + "'");
}

std::string_view to_string(AugmentOp op) {
  for (const auto& [k, v] : kOpNames)
    if (k == op) return v;
  return "unknown";
}

AugmentOp augment_op_from_string(std::string_view s) {
  for (const auto& [k, v] : kOpNames)
    if (v == s) return k;
  throw ConfigError("unknown augmentation '" + std::string(s) + "'");
}

RasterImage compose_pair(const RasterImage& condition, const RasterImage& target) {
  require_half(condition, "condition");
  require_half(target, "target");
  RasterImage out(2 * kPairSide, kPairSide, 3);
  imaging::paste(out, imaging::to_rgb(condition), 0, 0);
  imaging::paste(out, imaging::to_rgb(target), kPairSide, 0);
  return out;
}

std::pair<RasterImage, RasterImage> split_pair(const RasterImage& combined) {
  if (combined.width() != 2 * kPairSide || combined.height() != kPairSide) {
    throw ShapeError("pair image must be 512x256, got " + combined.shape_string());
  }
  return {imaging::crop(combined, {0, 0, kPairSide, kPairSide}),
          imaging::crop(combined, {kPairSide, 0, kPairSide, kPairSide})};
}

AugmentationPolicy AugmentationPolicy::parse(std::string_view csv) {
  AugmentationPolicy policy;
  std::size_t start = 0;
  while (start < csv.size()) {
    std::size_t end = csv.find(',', start);
    if (end == std::string_view::npos) end = csv.size();
    const auto token = csv.substr(start, end - start);
    if (!token.empty()) {
      const AugmentOp op = augment_op_from_string(token);
      if (op == AugmentOp::kNone) throw ConfigError("'none' is not an augmentation op");
      policy.ops.push_back(op);
    }
    start = end + 1;
  }
  return policy;
}

RasterImage apply_augmentation(const RasterImage& img, AugmentOp op) {
  switch (op) {
    case AugmentOp::kNone: return img;
    case AugmentOp::kFlipH: return imaging::flip_horizontal(img);
    case AugmentOp::kFlipV: return imaging::flip_vertical(img);
    case AugmentOp::kRot90: return imaging::rotate90(img, 1);
    case AugmentOp::kRot180: return imaging::rotate90(img, 2);
    case AugmentOp::kRot270: return imaging::rotate90(img, 3);
  }
  return img;
}

std::vector<PairSample> augment(const PairSample& sample, const AugmentationPolicy& policy) {
  std::vector<PairSample> out;
  out.reserve(1 + policy.ops.size());
  out.push_back(sample);
  for (const auto op : policy.ops) {
    PairSample s;
    s.condition = apply_augmentation(sample.condition, op);
    s.target = apply_augmentation(sample.target, op);
    s.id = sample.id + "_" + std::string(to_string(op));
    s.provenance = sample.provenance;
    s.augmentation = op;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace noksha::dataset
