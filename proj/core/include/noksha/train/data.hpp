#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "noksha/dataset/manifest.hpp"
#include "noksha/imaging/raster.hpp"
#include "noksha/nn/tensor.hpp"

namespace noksha::train {

/// RGB (gray is promoted) resized bilinearly to side x side, mapped v / 127.5 - 1 into a
/// (1, 3, side, side) tensor.
nn::Tensor image_to_tensor(const imaging::RasterImage& img, int side);

/// Inverse mapping of one batch item: round((v + 1) * 127.5) clamped to [0, 255].
imaging::RasterImage tensor_to_image(const nn::Tensor& t, std::size_t index = 0);

/// Concatenates (1, C, H, W) tensors along the batch axis.
nn::Tensor stack_batch(const std::vector<nn::Tensor>& items);

/// The pairs of one split of a manifest, decoded on demand.
class PairSet {
 public:
  PairSet(const dataset::DatasetManifest& manifest, const std::filesystem::path& manifest_dir,
          dataset::Split split);

  std::size_t size() const noexcept { return entries_.size(); }
  const dataset::ManifestEntry& entry(std::size_t i) const { return entries_.at(i); }

  /// The 256x256 condition and target halves of pair i.
  std::pair<imaging::RasterImage, imaging::RasterImage> halves(std::size_t i) const;

  /// Condition and target tensors of pair i at the given side.
  std::pair<nn::Tensor, nn::Tensor> tensors(std::size_t i, int side) const;

 private:
  std::filesystem::path dir_;
  std::vector<dataset::ManifestEntry> entries_;
};

}  // namespace noksha::train
