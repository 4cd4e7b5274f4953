#include "fixtures.hpp"

#include <cstdio>

#include "noksha/dataset/pair.hpp"
#include "noksha/imaging/png.hpp"
#include "oracles.hpp"

namespace noksha::testing {

std::filesystem::path write_pair_dataset(const std::filesystem::path& dir, int n, int train, std::uint32_t seed) {
  std::filesystem::create_directories(dir / "pairs");
  dataset::DatasetManifest m;
  m.variant = "skeleton";
  m.source_checksum = "fixture";
  for (int i = 0; i < n; ++i) {
    const auto target = synthetic_motif(256, seed + static_cast<std::uint32_t>(i));
    RasterImage cond(256, 256, 1);
    for (int y = 0; y < 256; ++y)
      for (int x = 0; x < 256; ++x) cond.at(x, y) = target.at(x, y, 0) < 128 ? 0 : 255;
    char name[16];
    std::snprintf(name, sizeof name, "p%02d", i);
    const std::string rel = std::string("pairs/") + name + ".png";
    imaging::write_png(dir / rel, dataset::compose_pair(cond, target));
    m.entries.push_back({name, rel, dataset::Provenance::kAutoSkeleton, std::nullopt,
                         i < train ? dataset::Split::kTrain : dataset::Split::kTest});
  }
  const auto path = dir / "manifest.json";
  dataset::write_manifest(path, m);
  return path;
}

}  // namespace noksha::testing
