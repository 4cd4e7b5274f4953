#include "noksha/imaging/png.hpp"

#include <png.h>

#include <csetjmp>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>

#include "noksha/error.hpp"

namespace noksha::imaging {

namespace {

constexpr std::uint8_t kSignature[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};

// libpng reports errors through longjmp. Everything that must survive the jump lives
// in heap state reached through a pointer created before setjmp.
struct ReadState {
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;
  std::string error;
  bool unsupported = false;
  std::vector<std::uint8_t> raw;
  std::vector<png_bytep> rows;
};

struct WriteState {
  std::vector<std::uint8_t> out;
  std::string error;
  std::vector<png_bytep> rows;
};

void read_fn(png_structp png, png_bytep dst, png_size_t n) {
  auto* st = static_cast<ReadState*>(png_get_io_ptr(png));
  if (st->pos + n > st->bytes.size()) png_error(png, "unexpected end of stream");
  std::memcpy(dst, st->bytes.data() + st->pos, n);
  st->pos += n;
}

void read_error_fn(png_structp png, png_const_charp msg) {
  auto* st = static_cast<ReadState*>(png_get_error_ptr(png));
  st->error = msg ? msg : "png decode error";
  std::longjmp(png_jmpbuf(png), 1);
}

void write_fn(png_structp png, png_bytep src, png_size_t n) {
  auto* st = static_cast<WriteState*>(png_get_io_ptr(png));
  st->out.insert(st->out.end(), src, src + n);
}

void write_error_fn(png_structp png, png_const_charp msg) {
  auto* st = static_cast<WriteState*>(png_get_error_ptr(png));
  st->error = msg ? msg : "png encode error";
  std::longjmp(png_jmpbuf(png), 1);
}

void flush_fn(png_structp) {}
void warn_fn(png_structp, png_const_charp) {}

// (c*a + 255*(255-a)) / 255, rounded.
std::uint8_t over_white(std::uint8_t c, std::uint8_t a) {
  const unsigned v = static_cast<unsigned>(c) * a + 255u * (255u - a);
  return static_cast<std::uint8_t>((v + 127u) / 255u);
}

}  // namespace

RasterImage decode_png(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kSignature, 8) != 0) {
    throw UnsupportedFormatError("not a PNG stream (signature mismatch)");
  }

  auto st = std::make_unique<ReadState>();
  st->bytes = bytes;
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, st.get(), read_error_fn, warn_fn);
  if (png == nullptr) throw Error("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error("png_create_info_struct failed");
  }

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    if (st->unsupported) throw UnsupportedFormatError(st->error);
    throw DecodeError(st->error, st->pos);
  }

  png_set_read_fn(png, st.get(), read_fn);
  png_read_info(png, info);

  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);

  if (color == PNG_COLOR_TYPE_PALETTE) {
    png_set_palette_to_rgb(png);
  } else if (depth != 8) {
    st->unsupported = true;
    png_error(png, ("unsupported bit depth " + std::to_string(depth)).c_str());
  }
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  const std::size_t row_bytes = png_get_rowbytes(png, info);
  const int in_channels = png_get_channels(png, info);
  st->raw.resize(row_bytes * height);
  st->rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) st->rows[y] = st->raw.data() + y * row_bytes;
  png_read_image(png, st->rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const int w = static_cast<int>(width);
  const int h = static_cast<int>(height);
  const std::uint8_t* raw = st->raw.data();
  switch (in_channels) {
    case 1:
    case 3:
      return RasterImage(w, h, in_channels, std::move(st->raw));
    case 2: {
      RasterImage out(w, h, 1);
      for (std::size_t i = 0, n = static_cast<std::size_t>(w) * h; i < n; ++i)
        out.pixels()[i] = over_white(raw[2 * i], raw[2 * i + 1]);
      return out;
    }
    case 4: {
      RasterImage out(w, h, 3);
      for (std::size_t i = 0, n = static_cast<std::size_t>(w) * h; i < n; ++i)
        for (int c = 0; c < 3; ++c) out.pixels()[3 * i + c] = over_white(raw[4 * i + c], raw[4 * i + 3]);
      return out;
    }
    default:
      throw UnsupportedFormatError("unsupported channel count " + std::to_string(in_channels));
  }
}

std::vector<std::uint8_t> encode_png(const RasterImage& img) {
  if (img.empty()) throw ShapeError("cannot encode an empty image");
  auto st = std::make_unique<WriteState>();
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, st.get(), write_error_fn, warn_fn);
  if (png == nullptr) throw Error("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    throw Error("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError(st->error);
  }

  png_set_write_fn(png, st.get(), write_fn, flush_fn);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()),
               static_cast<png_uint_32>(img.height()), 8,
               img.channels() == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = static_cast<std::size_t>(img.width()) * img.channels();
  // libpng takes non-const row pointers but does not write through them.
  auto* base = const_cast<std::uint8_t*>(img.pixels().data());
  st->rows.resize(static_cast<std::size_t>(img.height()));
  for (int y = 0; y < img.height(); ++y) st->rows[static_cast<std::size_t>(y)] = base + y * stride;
  png_write_image(png, st->rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return std::move(st->out);
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

RasterImage read_png(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return decode_png(bytes);
  } catch (const UnsupportedFormatError& e) {
    throw UnsupportedFormatError(path.string() + ": " + e.what());
  }
}

void write_png(const std::filesystem::path& path, const RasterImage& img) {
  write_file(path, encode_png(img));
}

}  // namespace noksha::imaging
