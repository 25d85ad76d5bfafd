#include "modmix/image_io.hpp"

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <memory>
#include <string>

#include "modmix/error.hpp"

namespace modmix {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw FormatError("cannot open " + path.string());
  return f;
}

void on_png_error(png_structp png, png_const_charp message) {
  auto* text = static_cast<std::string*>(png_get_error_ptr(png));
  if (text) *text = message;
  png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

struct DecodedPng {
  std::size_t width = 0;
  std::size_t height = 0;
  int bit_depth = 8;
  int channels = 1;
  bool gray = true;
  std::vector<std::uint16_t> samples;
};

// Decodes to native bit depth (palette expanded to RGB, sub-byte gray kept
// as unpacked samples, alpha stripped).
DecodedPng decode(const std::filesystem::path& path) {
  FilePtr file = open_file(path, "rb");
  unsigned char sig[8] = {};
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw FormatError(path.string() + " is not a PNG file");
  }

  std::string error;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, on_png_error, on_png_warning);
  if (!png) throw FormatError("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw FormatError("png_create_info_struct failed");
  }

  DecodedPng out;
  std::vector<png_bytep> rows;
  std::vector<unsigned char> raw;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(path.string() + ": " + (error.empty() ? "corrupt PNG" : error));
  }

  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const png_byte color = png_get_color_type(png, info);
  int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) {
    png_set_palette_to_rgb(png);
    depth = 8;
  }
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (depth < 8) png_set_packing(png);
  if (depth == 16) png_set_swap(png);
  png_read_update_info(png, info);

  out.width = png_get_image_width(png, info);
  out.height = png_get_image_height(png, info);
  out.channels = png_get_channels(png, info);
  out.gray = out.channels == 1;
  out.bit_depth = depth;

  const std::size_t rowbytes = png_get_rowbytes(png, info);
  raw.resize(rowbytes * out.height);
  rows.resize(out.height);
  for (std::size_t r = 0; r < out.height; ++r) rows[r] = raw.data() + r * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const std::size_t count = out.width * out.height * static_cast<std::size_t>(out.channels);
  out.samples.resize(count);
  if (depth == 16) {
    for (std::size_t i = 0; i < count; ++i) {
      out.samples[i] = static_cast<std::uint16_t>(raw[2 * i] | (raw[2 * i + 1] << 8));
    }
  } else {
    for (std::size_t r = 0; r < out.height; ++r) {
      const std::size_t row_samples = out.width * static_cast<std::size_t>(out.channels);
      for (std::size_t i = 0; i < row_samples; ++i) out.samples[r * row_samples + i] = raw[r * rowbytes + i];
    }
  }
  return out;
}

void encode(const std::filesystem::path& path, std::size_t width, std::size_t height, int color_type, int bit_depth,
            std::span<const unsigned char> packed, std::size_t rowbytes) {
  FilePtr file = open_file(path, "wb");
  std::string error;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, on_png_error, on_png_warning);
  if (!png) throw FormatError("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw FormatError("png_create_info_struct failed");
  }
  std::vector<png_bytep> rows(height);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw FormatError(path.string() + ": " + (error.empty() ? "PNG encoding failed" : error));
  }
  png_init_io(png, file.get());
  png_set_compression_level(png, 6);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bit_depth, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::size_t r = 0; r < height; ++r) rows[r] = const_cast<png_bytep>(packed.data() + r * rowbytes);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

RgbImage read_rgb_png(const std::filesystem::path& path) {
  DecodedPng png = decode(path);
  const int shift = png.bit_depth == 16 ? 8 : 0;
  const int gray_scale = png.bit_depth < 8 ? 255 / ((1 << png.bit_depth) - 1) : 1;
  std::vector<std::uint8_t> pixels(png.width * png.height * 3);
  for (std::size_t i = 0; i < png.width * png.height; ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      const std::uint16_t v = png.gray ? png.samples[i] : png.samples[i * 3 + c];
      pixels[i * 3 + c] = static_cast<std::uint8_t>((v >> shift) * gray_scale);
    }
  }
  return RgbImage(png.width, png.height, std::move(pixels));
}

GrayImage read_gray_png(const std::filesystem::path& path) {
  DecodedPng png = decode(path);
  if (!png.gray) throw FormatError(path.string() + " is not a grayscale PNG");
  return GrayImage{png.width, png.height, png.bit_depth, std::move(png.samples)};
}

void write_rgb_png(const std::filesystem::path& path, const RgbImage& image) {
  if (image.width() == 0 || image.height() == 0) throw InvalidInput("cannot write an empty image");
  encode(path, image.width(), image.height(), PNG_COLOR_TYPE_RGB, 8, image.pixels(), image.width() * 3);
}

void write_gray_png(const std::filesystem::path& path, const GrayImage& image) {
  if (image.width == 0 || image.height == 0) throw InvalidInput("cannot write an empty image");
  if (image.samples.size() != image.width * image.height) throw InvalidInput("gray buffer size mismatch");
  const int depth = image.bit_depth;
  if (depth != 1 && depth != 8 && depth != 16) throw InvalidInput("unsupported PNG bit depth");
  const std::uint32_t limit = (1u << depth) - 1;

  std::size_t rowbytes = 0;
  std::vector<unsigned char> packed;
  if (depth == 1) {
    rowbytes = (image.width + 7) / 8;
    packed.assign(rowbytes * image.height, 0);
    for (std::size_t r = 0; r < image.height; ++r) {
      for (std::size_t c = 0; c < image.width; ++c) {
        const std::uint16_t v = image.samples[r * image.width + c];
        if (v > limit) throw InvalidInput("sample exceeds bit depth");
        if (v) packed[r * rowbytes + c / 8] |= static_cast<unsigned char>(0x80u >> (c % 8));
      }
    }
  } else if (depth == 8) {
    rowbytes = image.width;
    packed.resize(rowbytes * image.height);
    for (std::size_t i = 0; i < image.samples.size(); ++i) {
      if (image.samples[i] > limit) throw InvalidInput("sample exceeds bit depth");
      packed[i] = static_cast<unsigned char>(image.samples[i]);
    }
  } else {
    rowbytes = image.width * 2;
    packed.resize(rowbytes * image.height);
    for (std::size_t i = 0; i < image.samples.size(); ++i) {
      packed[2 * i] = static_cast<unsigned char>(image.samples[i] >> 8);
      packed[2 * i + 1] = static_cast<unsigned char>(image.samples[i] & 0xff);
    }
  }
  encode(path, image.width, image.height, PNG_COLOR_TYPE_GRAY, depth, packed, rowbytes);
}

}  // namespace modmix
