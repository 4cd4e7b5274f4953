#include "noksha/dataset/builder.hpp"

#include <algorithm>
#include <array>
#include <utility>

#include "noksha/dataset/fetch.hpp"
#include "noksha/error.hpp"
#include "noksha/imaging/morphology.hpp"
#include "noksha/imaging/png.hpp"

namespace noksha::dataset {

namespace fs = std::filesystem;

namespace {

struct VariantInfo {
  Variant variant;
  std::string_view name;
  Provenance provenance;
  std::size_t published;
};

constexpr std::array<VariantInfo, 5> kVariants{{
    {Variant::kSkeleton, "skeleton", Provenance::kAutoSkeleton, 7932},
    {Variant::kReducedBranch, "reduced", Provenance::kReducedBranch, 913},
    {Variant::kSketch, "sketch", Provenance::kHandSketch, 910},
    {Variant::kBoundary, "boundary", Provenance::kBoundary, 1116},
    {Variant::kEnhancedResolution, "enhanced", Provenance::kEnhancedResolution, 1983},
}};

const VariantInfo& info(Variant v) {
  for (const auto& i : kVariants)
    if (i.variant == v) return i;
  throw ConfigError("unknown variant");
}

std::vector<fs::path> list_pngs(const fs::path& dir) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::string ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

imaging::RasterImage to_pair_side(const imaging::RasterImage& img) {
  return imaging::to_rgb(imaging::resize(img, kPairSide, kPairSide, imaging::ResizeMode::kBilinear));
}

}  // namespace

std::string_view to_string(Variant v) { return info(v).name; }

Variant variant_from_string(std::string_view s) {
  for (const auto& i : kVariants)
    if (i.name == s) return i.variant;
  throw ConfigError("unknown variant '" + std::string(s) +
                    "' (expected skeleton, reduced, sketch, boundary or enhanced)");
}

Provenance provenance_of(Variant v) { return info(v).provenance; }

std::size_t published_variant_size(Variant v) { return info(v).published; }

void BuildConfig::validate() const {
  if (source_dir.empty()) throw ConfigError("source directory not set");
  if (out_dir.empty()) throw ConfigError("output directory not set");
  if (!(split_ratio > 0.0 && split_ratio < 1.0)) throw ConfigError("split ratio must lie in (0, 1)");
  if (min_source_side < 1) throw ConfigError("min_source_side must be positive");
  skeleton.validate();
  boundary.validate();
}

PairSample make_pair(const imaging::RasterImage& crop, const BuildConfig& config, const std::string& id,
                     const imaging::RasterImage* sketch) {
  const imaging::RasterImage rgb = to_pair_side(crop);
  const imaging::RasterImage gray = imaging::to_grayscale(rgb);
  const auto bin = imaging::binarize(gray, config.threshold, config.polarity);
  const imaging::BinaryImage mask = imaging::open(bin.image, config.open_se);

  PairSample pair;
  pair.id = id;
  pair.provenance = provenance_of(config.variant);
  pair.target = imaging::mask_apply(rgb, mask);

  switch (config.variant) {
    case Variant::kSkeleton:
    case Variant::kEnhancedResolution:
      pair.condition = imaging::render_binary(skeleton::skeletonize(mask, config.skeleton).image);
      break;
    case Variant::kReducedBranch: {
      skeleton::SkeletonParams params = config.skeleton;
      params.pre_erode_se = config.reduce_se;
      pair.condition = imaging::render_binary(skeleton::reduce_branches(mask, params).image);
      break;
    }
    case Variant::kBoundary:
      pair.condition = imaging::render_binary(
          skeleton::extract_boundary(imaging::to_grayscale(pair.target), config.boundary));
      break;
    case Variant::kSketch:
      if (sketch == nullptr) throw ConfigError("sketch variant needs a sketch image for '" + id + "'");
      pair.condition = to_pair_side(*sketch);
      break;
  }
  return pair;
}

BuildReport build_variant(const BuildConfig& config) {
  config.validate();
  if (!fs::is_directory(config.source_dir)) {
    throw NotFoundError("source directory " + config.source_dir.string() + " does not exist");
  }
  BuildReport report;
  report.reference_size = published_variant_size(config.variant);
  report.manifest.variant = std::string(to_string(config.variant));
  if (config.source_checksum) {
    report.manifest.source_checksum = *config.source_checksum;
  } else if (auto recorded = recorded_source_hash(config.source_dir)) {
    report.manifest.source_checksum = *recorded;
  } else {
    report.manifest.source_checksum = hash_tree(config.source_dir);
  }

  const fs::path pair_dir = config.out_dir / "pairs";
  fs::create_directories(pair_dir);
  const fs::path sketch_dir = config.sketch_dir.value_or(config.source_dir / "sketches");

  const auto sources = list_pngs(config.source_dir);
  report.sources_seen = sources.size();
  for (const auto& src : sources) {
    const std::string stem = src.stem().string();
    try {
      const imaging::RasterImage crop = imaging::read_png(src);
      if (config.variant == Variant::kEnhancedResolution &&
          std::min(crop.width(), crop.height()) < config.min_source_side) {
        ++report.filtered;
        continue;
      }
      std::optional<imaging::RasterImage> sketch;
      if (config.variant == Variant::kSketch) {
        const fs::path sketch_path = sketch_dir / (stem + ".png");
        if (!fs::exists(sketch_path)) {
          report.errors.push_back(stem + ": no sketch at " + sketch_path.string());
          continue;
        }
        sketch = imaging::read_png(sketch_path);
      }
      const PairSample pair = make_pair(crop, config, stem, sketch ? &*sketch : nullptr);
      for (const auto& sample : augment(pair, config.augmentation)) {
        const std::string rel = "pairs/" + sample.id + ".png";
        imaging::write_png(config.out_dir / rel, compose_pair(sample.condition, sample.target));
        report.manifest.entries.push_back({sample.id, rel, sample.provenance, sample.augmentation, Split::kTrain});
      }
    } catch (const Error& e) {
      report.errors.push_back(stem + ": " + e.what());
    }
  }

  if (report.manifest.entries.empty()) {
    report.warnings.push_back("no pairs were produced from " + config.source_dir.string());
  } else {
    report.manifest = split_dataset(report.manifest, config.split_ratio, config.seed);
  }
  report.manifest_path = config.out_dir / "manifest.json";
  write_manifest(report.manifest_path, report.manifest);
  return report;
}

}  // namespace noksha::dataset
