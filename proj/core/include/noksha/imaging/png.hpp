#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "noksha/imaging/raster.hpp"

namespace noksha::imaging {

/// Decodes an 8-bit PNG. Gray and RGB map directly; palette images expand to RGB;
/// alpha is flattened over white. Throws DecodeError (with byte offset) on malformed
/// streams and UnsupportedFormatError for other bit depths or non-PNG input.
RasterImage decode_png(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_png(const RasterImage& img);

RasterImage read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const RasterImage& img);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace noksha::imaging
