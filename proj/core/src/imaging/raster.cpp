#include "noksha/imaging/raster.hpp"

#include <algorithm>

#include "noksha/error.hpp"

namespace noksha::imaging {

namespace {

void check_dims(int width, int height) {
  if (width <= 0 || height <= 0) {
    throw ShapeError("image dimensions must be positive, got " + std::to_string(width) + "x" +
                     std::to_string(height));
  }
}

}  // namespace

RasterImage::RasterImage(int width, int height, int channels, std::uint8_t fill)
    : width_(width), height_(height), channels_(channels) {
  check_dims(width, height);
  if (channels != 1 && channels != 3) {
    throw ShapeError("channels must be 1 or 3, got " + std::to_string(channels));
  }
  pixels_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

RasterImage::RasterImage(int width, int height, int channels, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), channels_(channels), pixels_(std::move(pixels)) {
  check_dims(width, height);
  if (channels != 1 && channels != 3) {
    throw ShapeError("channels must be 1 or 3, got " + std::to_string(channels));
  }
  if (pixels_.size() != static_cast<std::size_t>(width) * height * channels) {
    throw ShapeError("pixel buffer of " + std::to_string(pixels_.size()) + " bytes does not match " +
                     shape_string());
  }
}

std::string RasterImage::shape_string() const {
  return std::to_string(width_) + "x" + std::to_string(height_) + "x" + std::to_string(channels_);
}

BinaryImage::BinaryImage(int width, int height, bool fill) : width_(width), height_(height) {
  check_dims(width, height);
  bits_.assign(static_cast<std::size_t>(width) * height, fill ? 1 : 0);
}

std::size_t BinaryImage::count() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::string BinaryImage::shape_string() const {
  return std::to_string(width_) + "x" + std::to_string(height_);
}

BinaryImage complement(const BinaryImage& img) {
  BinaryImage out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) out.set(x, y, !img.at(x, y));
  return out;
}

bool is_subset(const BinaryImage& a, const BinaryImage& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw ShapeError("subset test on " + a.shape_string() + " vs " + b.shape_string());
  }
  auto ab = a.bits();
  auto bb = b.bits();
  for (std::size_t i = 0; i < ab.size(); ++i)
    if (ab[i] && !bb[i]) return false;
  return true;
}

RasterImage render_binary(const BinaryImage& img, std::uint8_t ink, std::uint8_t paper) {
  RasterImage out(img.width(), img.height(), 3, paper);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      if (img.at(x, y))
        for (int c = 0; c < 3; ++c) out.at(x, y, c) = ink;
  return out;
}

StructuringElement::StructuringElement(int width, int height, std::vector<std::uint8_t> mask,
                                       int origin_row, int origin_col)
    : width_(width),
      height_(height),
      mask_(std::move(mask)),
      origin_row_(origin_row),
      origin_col_(origin_col) {
  check_dims(width, height);
  if (mask_.size() != static_cast<std::size_t>(width) * height) {
    throw ShapeError("structuring element mask size does not match " + std::to_string(width) + "x" +
                     std::to_string(height));
  }
  if (std::none_of(mask_.begin(), mask_.end(), [](std::uint8_t v) { return v != 0; })) {
    throw ConfigError("structuring element needs at least one true cell");
  }
  if (origin_row < 0 || origin_row >= height || origin_col < 0 || origin_col >= width) {
    throw ConfigError("structuring element origin (" + std::to_string(origin_row) + "," +
                      std::to_string(origin_col) + ") outside mask");
  }
  for (auto& v : mask_) v = v ? 1 : 0;
}

StructuringElement StructuringElement::square(int side) { return rect(side, side); }

StructuringElement StructuringElement::rect(int width, int height) {
  return StructuringElement(width, height,
                            std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height, 1),
                            height / 2, width / 2);
}

StructuringElement StructuringElement::cross(int radius) {
  const int side = 2 * radius + 1;
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(side) * side, 0);
  for (int i = 0; i < side; ++i) {
    mask[static_cast<std::size_t>(radius) * side + i] = 1;
    mask[static_cast<std::size_t>(i) * side + radius] = 1;
  }
  return StructuringElement(side, side, std::move(mask), radius, radius);
}

StructuringElement StructuringElement::disk(int radius) {
  const int side = 2 * radius + 1;
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(side) * side, 0);
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c) {
      const int dr = r - radius;
      const int dc = c - radius;
      mask[static_cast<std::size_t>(r) * side + c] = dr * dr + dc * dc <= radius * radius ? 1 : 0;
    }
  return StructuringElement(side, side, std::move(mask), radius, radius);
}

StructuringElement StructuringElement::reflect() const {
  std::vector<std::uint8_t> mask(mask_.size());
  for (int r = 0; r < height_; ++r)
    for (int c = 0; c < width_; ++c)
      mask[static_cast<std::size_t>(height_ - 1 - r) * width_ + (width_ - 1 - c)] = at(r, c);
  return StructuringElement(width_, height_, std::move(mask), height_ - 1 - origin_row_,
                            width_ - 1 - origin_col_);
}

int StructuringElement::extent() const noexcept {
  return std::max({origin_row_, origin_col_, height_ - 1 - origin_row_, width_ - 1 - origin_col_});
}

}  // namespace noksha::imaging
