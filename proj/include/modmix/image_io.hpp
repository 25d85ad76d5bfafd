#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "modmix/geometry.hpp"

namespace modmix {

/// Single channel image with the sample depth it was stored at (1, 8 or 16 bits).
struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  int bit_depth = 8;
  std::vector<std::uint16_t> samples;
};

/// Reads any 8- or 16-bit PNG and converts it to 8-bit RGB (gray is
/// replicated, alpha is dropped, 16-bit samples keep their high byte).
RgbImage read_rgb_png(const std::filesystem::path& path);

/// Reads a grayscale PNG keeping its native sample values; throws
/// FormatError for color images.
GrayImage read_gray_png(const std::filesystem::path& path);

void write_rgb_png(const std::filesystem::path& path, const RgbImage& image);

/// bit_depth must be 1, 8 or 16; samples must fit in that depth.
void write_gray_png(const std::filesystem::path& path, const GrayImage& image);

}  // namespace modmix
