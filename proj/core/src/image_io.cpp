#include "ecgraph/image_io.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <vector>

namespace ecgraph {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::string& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) {
    if (mode[0] == 'r') fail(Errc::FileNotFound, "cannot open " + path);
    fail(Errc::IoError, "cannot write " + path);
  }
  return f;
}

RasterImage decode_png(std::FILE* fp, const std::string& path) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) fail(Errc::DecodeError, "libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    fail(Errc::DecodeError, "libpng init failed");
  }
  std::vector<png_bytep> rows;
  std::vector<png_byte> buf;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(Errc::DecodeError, "corrupt PNG: " + path);
  }
  png_init_io(png, fp);
  png_read_info(png, info);

  png_uint_32 w = png_get_image_width(png, info);
  png_uint_32 h = png_get_image_height(png, info);

  // Normalize every variant to 8-bit RGB.
  png_set_expand(png);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_gray_to_rgb(png);
  png_set_palette_to_rgb(png);
  png_read_update_info(png, info);

  const std::size_t rowbytes = png_get_rowbytes(png, info);
  buf.resize(rowbytes * h);
  rows.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = buf.data() + y * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  RasterImage img(static_cast<int>(w), static_cast<int>(h));
  for (png_uint_32 y = 0; y < h; ++y) {
    const png_byte* row = buf.data() + y * rowbytes;
    for (png_uint_32 x = 0; x < w; ++x)
      img.set(static_cast<int>(x), static_cast<int>(y), Rgb{row[3 * x], row[3 * x + 1], row[3 * x + 2]});
  }
  return img;
}

std::uint32_t rd_u32le(const std::uint8_t* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
         std::uint32_t(p[3]) << 24;
}
std::int32_t rd_i32le(const std::uint8_t* p) { return static_cast<std::int32_t>(rd_u32le(p)); }
std::uint16_t rd_u16le(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(std::uint16_t(p[0]) | std::uint16_t(p[1]) << 8);
}

RasterImage decode_bmp(const std::vector<std::uint8_t>& d, const std::string& path) {
  if (d.size() < 54) fail(Errc::DecodeError, "BMP too short: " + path);
  const std::uint32_t pixel_off = rd_u32le(&d[10]);
  const std::uint32_t hdr_size = rd_u32le(&d[14]);
  if (hdr_size < 40) fail(Errc::DecodeError, "unsupported BMP header: " + path);
  const std::int32_t w = rd_i32le(&d[18]);
  std::int32_t h = rd_i32le(&d[22]);
  const std::uint16_t bpp = rd_u16le(&d[28]);
  const std::uint32_t compression = rd_u32le(&d[30]);
  const bool top_down = h < 0;
  if (top_down) h = -h;
  if (w <= 0 || h <= 0) fail(Errc::DecodeError, "bad BMP dimensions: " + path);
  if (compression != 0 || (bpp != 24 && bpp != 32))
    fail(Errc::DecodeError, "only uncompressed 24/32-bit BMP supported: " + path);

  const std::size_t bytespp = bpp / 8;
  const std::size_t stride = ((static_cast<std::size_t>(w) * bytespp + 3) / 4) * 4;
  if (d.size() < pixel_off + stride * static_cast<std::size_t>(h))
    fail(Errc::DecodeError, "BMP pixel data truncated: " + path);

  RasterImage img(w, h);
  for (int y = 0; y < h; ++y) {
    const int src_y = top_down ? y : (h - 1 - y);
    const std::uint8_t* row = d.data() + pixel_off + stride * static_cast<std::size_t>(src_y);
    for (int x = 0; x < w; ++x) {
      const std::uint8_t* p = row + bytespp * static_cast<std::size_t>(x);
      img.set(x, y, Rgb{p[2], p[1], p[0]}); // BGR order
    }
  }
  return img;
}

} // namespace

RasterImage load_image(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(Errc::FileNotFound, "cannot open " + path);
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  static const std::uint8_t png_sig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
  if (data.size() >= 8 && std::memcmp(data.data(), png_sig, 8) == 0) {
    auto fp = open_file(path, "rb");
    return decode_png(fp.get(), path);
  }
  if (data.size() >= 2 && data[0] == 'B' && data[1] == 'M') return decode_bmp(data, path);
  fail(Errc::DecodeError, "unrecognized image format: " + path);
}

namespace {

void write_png_impl(const std::string& path, int w, int h, int color_type,
                    const std::vector<png_bytep>& rows) {
  auto fp = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) fail(Errc::IoError, "libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    fail(Errc::IoError, "libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(Errc::IoError, "PNG write failed: " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, const_cast<png_bytepp>(rows.data()));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

} // namespace

void save_png(const RasterImage& img, const std::string& path) {
  const int w = img.width(), h = img.height();
  std::vector<png_byte> buf(static_cast<std::size_t>(w) * h * 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const Rgb c = img.at(x, y);
      png_byte* p = buf.data() + (static_cast<std::size_t>(y) * w + x) * 3;
      p[0] = c.r;
      p[1] = c.g;
      p[2] = c.b;
    }
  std::vector<png_bytep> rows(static_cast<std::size_t>(h));
  for (int y = 0; y < h; ++y) rows[y] = buf.data() + static_cast<std::size_t>(y) * w * 3;
  write_png_impl(path, w, h, PNG_COLOR_TYPE_RGB, rows);
}

void save_mask_png(const BinaryRaster& mask, const std::string& path) {
  const int w = mask.width(), h = mask.height();
  std::vector<png_byte> buf(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      buf[static_cast<std::size_t>(y) * w + x] = mask.get(x, y) ? 255 : 0;
  std::vector<png_bytep> rows(static_cast<std::size_t>(h));
  for (int y = 0; y < h; ++y) rows[y] = buf.data() + static_cast<std::size_t>(y) * w;
  write_png_impl(path, w, h, PNG_COLOR_TYPE_GRAY, rows);
}

BinaryRaster load_mask_png(const std::string& path) {
  RasterImage img = load_image(path);
  BinaryRaster out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      out.set(x, y, luminance(img.at(x, y)) >= 128);
  return out;
}

} // namespace ecgraph
