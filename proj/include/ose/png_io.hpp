#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "ose/grid.hpp"

namespace ose::png {

/// 16-bit grayscale, big-endian samples as PNG requires.
void write_gray16(const std::filesystem::path& path, const Grid<std::uint16_t>& image);

/// Reads 8- or 16-bit grayscale PNGs.
Grid<std::uint16_t> read_gray16(const std::filesystem::path& path);

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

void write_rgb8(const std::filesystem::path& path, const Grid<Rgb>& image);
Grid<Rgb> read_rgb8(const std::filesystem::path& path);

}  // namespace ose::png
