#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "volcap/io.hpp"

namespace volcap {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

struct Raster {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 8;
  std::vector<std::uint8_t> bytes;  // rows tightly packed, 16-bit samples big-endian
};

void png_error_fn(png_structp png, png_const_charp msg) {
  auto* message = static_cast<std::string*>(png_get_error_ptr(png));
  if (message) *message = msg;
  png_longjmp(png, 1);
}

void png_warning_fn(png_structp, png_const_charp) {}

// Plain C-style body: every object with a destructor is created before setjmp,
// and longjmp only lands back in this frame.
bool decode(std::FILE* file, Raster& out, std::string& message) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, png_error_fn, png_warning_fn);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  std::vector<png_bytep> rows;
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_init_io(png, file);
  png_read_info(png, info);
  const png_byte color_type = png_get_color_type(png, info);
  const png_byte depth = png_get_bit_depth(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_read_update_info(png, info);

  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.channels = png_get_channels(png, info);
  out.bit_depth = png_get_bit_depth(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  out.bytes.assign(stride * static_cast<std::size_t>(out.height), 0);
  rows.resize(static_cast<std::size_t>(out.height));
  for (int y = 0; y < out.height; ++y) rows[static_cast<std::size_t>(y)] = out.bytes.data() + stride * static_cast<std::size_t>(y);
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

Raster read_raster(const fs::path& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw MissingFileError("cannot open " + path.string());
  std::uint8_t sig[8] = {};
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw ImageDecodeError("not a PNG file: " + path.string());
  }
  std::rewind(file.get());
  Raster r;
  std::string message = "decode failure";
  if (!decode(file.get(), r, message)) throw ImageDecodeError(path.string() + ": " + message);
  return r;
}

bool encode(std::FILE* file, const Raster& in, std::string& message) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, png_error_fn, png_warning_fn);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  std::vector<png_bytep> rows(static_cast<std::size_t>(in.height));
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_init_io(png, file);
  const int type = in.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY;
  png_set_IHDR(png, info, static_cast<png_uint_32>(in.width), static_cast<png_uint_32>(in.height), in.bit_depth,
               type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride =
      static_cast<std::size_t>(in.width) * static_cast<std::size_t>(in.channels) * (in.bit_depth == 16 ? 2u : 1u);
  for (int y = 0; y < in.height; ++y) {
    rows[static_cast<std::size_t>(y)] = const_cast<png_bytep>(in.bytes.data() + stride * static_cast<std::size_t>(y));
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

void write_raster(const fs::path& path, const Raster& r) {
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw MissingFileError("cannot create " + path.string());
  std::string message = "encode failure";
  if (!encode(file.get(), r, message)) throw ImageDecodeError(path.string() + ": " + message);
}

std::uint8_t quantize8(double v) {
  const double c = std::clamp(v, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::lround(c * 255.0));
}

}  // namespace

void write_png_rgb8(const fs::path& path, const RgbImage& img) {
  Raster r{img.width(), img.height(), 3, 8, {}};
  r.bytes.reserve(img.size() * 3);
  for (const Rgb& c : img) {
    for (int k = 0; k < 3; ++k) r.bytes.push_back(quantize8(c[k]));
  }
  write_raster(path, r);
}

RgbImage read_png_rgb8(const fs::path& path) {
  const Raster r = read_raster(path);
  if (r.bit_depth != 8) throw ImageDecodeError(path.string() + ": expected 8-bit color");
  RgbImage img(r.width, r.height);
  for (std::size_t i = 0; i < img.size(); ++i) {
    const std::uint8_t* px = r.bytes.data() + i * static_cast<std::size_t>(r.channels);
    if (r.channels >= 3) {
      img[i] = Rgb(px[0], px[1], px[2]) / 255.0;
    } else {
      img[i] = Rgb::Constant(px[0] / 255.0);
    }
  }
  return img;
}

void write_png_gray8(const fs::path& path, const ScalarImage& img) {
  Raster r{img.width(), img.height(), 1, 8, {}};
  r.bytes.reserve(img.size());
  for (double v : img) r.bytes.push_back(quantize8(v));
  write_raster(path, r);
}

ScalarImage read_png_gray8(const fs::path& path) {
  const Raster r = read_raster(path);
  if (r.bit_depth != 8) throw ImageDecodeError(path.string() + ": expected 8-bit gray");
  ScalarImage img(r.width, r.height);
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = r.bytes[i * static_cast<std::size_t>(r.channels)] / 255.0;
  return img;
}

void write_png_gray16(const fs::path& path, const Image<std::uint16_t>& img) {
  Raster r{img.width(), img.height(), 1, 16, {}};
  r.bytes.reserve(img.size() * 2);
  for (std::uint16_t v : img) {
    r.bytes.push_back(static_cast<std::uint8_t>(v >> 8));
    r.bytes.push_back(static_cast<std::uint8_t>(v & 0xff));
  }
  write_raster(path, r);
}

Image<std::uint16_t> read_png_gray16(const fs::path& path) {
  const Raster r = read_raster(path);
  if (r.bit_depth != 16 || r.channels != 1) throw ImageDecodeError(path.string() + ": expected 16-bit gray");
  Image<std::uint16_t> img(r.width, r.height);
  for (std::size_t i = 0; i < img.size(); ++i) {
    img[i] = static_cast<std::uint16_t>((r.bytes[2 * i] << 8) | r.bytes[2 * i + 1]);
  }
  return img;
}

}  // namespace volcap
