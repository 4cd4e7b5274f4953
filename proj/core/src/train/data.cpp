#include "noksha/train/data.hpp"

#include <algorithm>
#include <cmath>

#include "noksha/dataset/pair.hpp"
#include "noksha/error.hpp"
#include "noksha/imaging/ops.hpp"
#include "noksha/imaging/png.hpp"

namespace noksha::train {

nn::Tensor image_to_tensor(const imaging::RasterImage& img, int side) {
  imaging::RasterImage rgb = imaging::to_rgb(img);
  if (rgb.width() != side || rgb.height() != side) {
    rgb = imaging::resize(rgb, side, side, imaging::ResizeMode::kBilinear);
  }
  const auto s = static_cast<std::size_t>(side);
  const std::size_t plane = s * s;
  std::vector<float> data(3 * plane);
  const auto px = rgb.pixels();
  for (std::size_t i = 0; i < plane; ++i)
    for (std::size_t c = 0; c < 3; ++c) data[c * plane + i] = static_cast<float>(px[3 * i + c]) / 127.5F - 1.0F;
  return nn::Tensor({1, 3, s, s}, std::move(data));
}

imaging::RasterImage tensor_to_image(const nn::Tensor& t, std::size_t index) {
  if (t.rank() != 4 || t.dim(1) != 3 || index >= t.dim(0)) {
    throw ShapeError("expected a (N, 3, H, W) tensor, got " + nn::shape_string(t.shape()));
  }
  const std::size_t h = t.dim(2), w = t.dim(3), plane = h * w;
  imaging::RasterImage out(static_cast<int>(w), static_cast<int>(h), 3);
  const float* src = t.data().data() + index * 3 * plane;
  auto px = out.pixels();
  for (std::size_t i = 0; i < plane; ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      const float v = std::round((src[c * plane + i] + 1.0F) * 127.5F);
      px[3 * i + c] = static_cast<std::uint8_t>(std::clamp(v, 0.0F, 255.0F));
    }
  }
  return out;
}

nn::Tensor stack_batch(const std::vector<nn::Tensor>& items) {
  if (items.empty()) throw ShapeError("cannot stack an empty batch");
  if (items.size() == 1) return items.front();
  nn::Shape shape = items.front().shape();
  std::vector<float> data;
  data.reserve(items.size() * items.front().numel());
  for (const auto& t : items) {
    if (t.shape() != shape) throw ShapeError("batch items disagree in shape");
    data.insert(data.end(), t.data().begin(), t.data().end());
  }
  shape[0] = items.size();
  return nn::Tensor(shape, std::move(data));
}

PairSet::PairSet(const dataset::DatasetManifest& manifest, const std::filesystem::path& manifest_dir,
                 dataset::Split split)
    : dir_(manifest_dir) {
  for (const auto* e : manifest.entries_in(split)) entries_.push_back(*e);
}

std::pair<imaging::RasterImage, imaging::RasterImage> PairSet::halves(std::size_t i) const {
  return dataset::split_pair(imaging::read_png(dir_ / entry(i).path));
}

std::pair<nn::Tensor, nn::Tensor> PairSet::tensors(std::size_t i, int side) const {
  const auto [condition, target] = halves(i);
  return {image_to_tensor(condition, side), image_to_tensor(target, side)};
}

}  // namespace noksha::train
