#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace noksha::imaging {

/// 8-bit raster, row-major, channel-interleaved. Channels are 1 (gray) or 3 (RGB).
class RasterImage {
 public:
  RasterImage() = default;
  /// Filled with `fill` in every channel.
  RasterImage(int width, int height, int channels, std::uint8_t fill = 0);
  RasterImage(int width, int height, int channels, std::vector<std::uint8_t> pixels);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  bool empty() const noexcept { return pixels_.empty(); }

  std::uint8_t at(int x, int y, int c = 0) const {
    return pixels_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  std::uint8_t& at(int x, int y, int c = 0) {
    return pixels_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }

  std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
  std::span<std::uint8_t> pixels() noexcept { return pixels_; }

  /// "WxHxC", used in error messages.
  std::string shape_string() const;

  friend bool operator==(const RasterImage&, const RasterImage&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<std::uint8_t> pixels_;
};

/// Boolean grid, row-major. `true` is foreground.
class BinaryImage {
 public:
  BinaryImage() = default;
  BinaryImage(int width, int height, bool fill = false);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  bool at(int x, int y) const { return bits_[static_cast<std::size_t>(y) * width_ + x] != 0; }
  void set(int x, int y, bool v) { bits_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0; }

  /// Out-of-bounds reads are background.
  bool get_or_background(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_ && at(x, y);
  }

  std::size_t count() const noexcept;
  std::span<const std::uint8_t> bits() const noexcept { return bits_; }

  std::string shape_string() const;

  friend bool operator==(const BinaryImage&, const BinaryImage&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

BinaryImage complement(const BinaryImage& img);

/// True iff every foreground pixel of `a` is foreground in `b`. Shapes must agree.
bool is_subset(const BinaryImage& a, const BinaryImage& b);

/// Renders foreground as `ink` on a `paper` background, 3 channels.
RasterImage render_binary(const BinaryImage& img, std::uint8_t ink = 0, std::uint8_t paper = 255);

struct Rect {
  int x = 0;
  int y = 0;
  int width = 1;
  int height = 1;
};

/// Boolean neighbourhood mask with an origin cell (row, col).
class StructuringElement {
 public:
  StructuringElement(int width, int height, std::vector<std::uint8_t> mask, int origin_row,
                     int origin_col);

  static StructuringElement square(int side);
  static StructuringElement rect(int width, int height);
  /// Plus-shaped element with arms of length `radius`.
  static StructuringElement cross(int radius = 1);
  static StructuringElement disk(int radius);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int origin_row() const noexcept { return origin_row_; }
  int origin_col() const noexcept { return origin_col_; }
  bool at(int row, int col) const { return mask_[static_cast<std::size_t>(row) * width_ + col] != 0; }

  /// Point reflection about the origin.
  StructuringElement reflect() const;

  /// Largest distance from the origin to any cell edge, used for padding.
  int extent() const noexcept;

  friend bool operator==(const StructuringElement&, const StructuringElement&) = default;

 private:
  int width_;
  int height_;
  std::vector<std::uint8_t> mask_;
  int origin_row_;
  int origin_col_;
};

}  // namespace noksha::imaging
