#include "ose/png_io.hpp"

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <memory>

#include "ose/error.hpp"

namespace ose::png {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f) std::fclose(f);
  }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

File open(const std::filesystem::path& path, const char* mode) {
  File f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError(path, mode[0] == 'w' ? "cannot open for writing" : "cannot open for reading");
  return f;
}

// Rows are filled by `fill_row(y, buffer)`; `bytes_per_row` bytes each.
template <typename FillRow>
void write_png(const std::filesystem::path& path, std::size_t w, std::size_t h, int bit_depth, int color_type,
               std::size_t bytes_per_row, FillRow&& fill_row) {
  File f = open(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError(path, "png: out of memory");
  }
  std::vector<png_byte> row(bytes_per_row);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError(path, "png: write failed");
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), bit_depth, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::size_t y = 0; y < h; ++y) {
    fill_row(y, row.data());
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fflush(f.get()) != 0) throw IoError(path, "png: flush failed");
}

struct Decoded {
  std::size_t w = 0, h = 0;
  int bit_depth = 0, color_type = 0, channels = 0;
  std::vector<png_byte> pixels;
  std::size_t rowbytes = 0;
};

Decoded read_png(const std::filesystem::path& path) {
  File f = open(path, "rb");
  png_byte sig[8];
  if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) throw IoError(path, "not a PNG file");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path, "png: out of memory");
  }
  Decoded d;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path, "png: corrupt data");
  }
  png_init_io(png, f.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  d.w = png_get_image_width(png, info);
  d.h = png_get_image_height(png, info);
  d.bit_depth = png_get_bit_depth(png, info);
  d.color_type = png_get_color_type(png, info);
  if (d.color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (d.color_type == PNG_COLOR_TYPE_GRAY && d.bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  png_read_update_info(png, info);
  d.bit_depth = png_get_bit_depth(png, info);
  d.color_type = png_get_color_type(png, info);
  d.channels = png_get_channels(png, info);
  d.rowbytes = png_get_rowbytes(png, info);
  d.pixels.resize(d.rowbytes * d.h);
  std::vector<png_bytep> rows(d.h);
  for (std::size_t y = 0; y < d.h; ++y) rows[y] = d.pixels.data() + y * d.rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return d;
}

}  // namespace

void write_gray16(const std::filesystem::path& path, const Grid<std::uint16_t>& image) {
  write_png(path, image.width(), image.height(), 16, PNG_COLOR_TYPE_GRAY, 2 * image.width(),
            [&](std::size_t y, png_byte* row) {
              const auto src = image.row(y);
              for (std::size_t x = 0; x < src.size(); ++x) {
                row[2 * x] = static_cast<png_byte>(src[x] >> 8);
                row[2 * x + 1] = static_cast<png_byte>(src[x] & 0xff);
              }
            });
}

Grid<std::uint16_t> read_gray16(const std::filesystem::path& path) {
  Decoded d = read_png(path);
  if (d.channels != 1 || (d.bit_depth != 8 && d.bit_depth != 16))
    throw IoError(path, "expected an 8- or 16-bit grayscale PNG");
  Grid<std::uint16_t> out(d.w, d.h);
  for (std::size_t y = 0; y < d.h; ++y) {
    const png_byte* row = d.pixels.data() + y * d.rowbytes;
    for (std::size_t x = 0; x < d.w; ++x)
      out(x, y) = d.bit_depth == 16 ? static_cast<std::uint16_t>((row[2 * x] << 8) | row[2 * x + 1]) : row[x];
  }
  return out;
}

void write_rgb8(const std::filesystem::path& path, const Grid<Rgb>& image) {
  write_png(path, image.width(), image.height(), 8, PNG_COLOR_TYPE_RGB, 3 * image.width(),
            [&](std::size_t y, png_byte* row) {
              const auto src = image.row(y);
              for (std::size_t x = 0; x < src.size(); ++x) {
                row[3 * x] = src[x].r;
                row[3 * x + 1] = src[x].g;
                row[3 * x + 2] = src[x].b;
              }
            });
}

Grid<Rgb> read_rgb8(const std::filesystem::path& path) {
  Decoded d = read_png(path);
  if (d.bit_depth != 8 || d.channels < 3) throw IoError(path, "expected an 8-bit RGB PNG");
  Grid<Rgb> out(d.w, d.h);
  for (std::size_t y = 0; y < d.h; ++y) {
    const png_byte* row = d.pixels.data() + y * d.rowbytes;
    for (std::size_t x = 0; x < d.w; ++x) {
      const png_byte* p = row + static_cast<std::size_t>(d.channels) * x;
      out(x, y) = {p[0], p[1], p[2]};
    }
  }
  return out;
}

}  // namespace ose::png
