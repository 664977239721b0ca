#include "vsc/io/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstring>

#include "vsc/io/fsio.hpp"

namespace vsc::io {

namespace {

struct MemReader {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t pos;
};

void mem_read(png_structp png, png_bytep out, png_size_t n) {
  auto* r = static_cast<MemReader*>(png_get_io_ptr(png));
  if (r->pos + n > r->size) {
    png_error(png, "truncated PNG stream");
    return;
  }
  std::memcpy(out, r->data + r->pos, n);
  r->pos += n;
}

void mem_write(png_structp png, png_bytep data, png_size_t n) {
  auto* buf = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  buf->insert(buf->end(), data, data + n);
}

void mem_flush(png_structp) {}

// Collects the libpng error message so it can be rethrown as a categorized
// error after the longjmp unwinds the C frames.
struct PngErrorCtx {
  char message[256] = "png error";
};

void on_png_error(png_structp png, png_const_charp msg) {
  auto* ctx = static_cast<PngErrorCtx*>(png_get_error_ptr(png));
  std::snprintf(ctx->message, sizeof(ctx->message), "%s", msg);
  png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

struct DecodedPng {
  int width = 0, height = 0, bit_depth = 0, color_type = 0;
  std::vector<std::vector<std::uint8_t>> rows;
};

DecodedPng decode_png(const std::string& path) {
  const auto file = read_file(path);
  if (file.size() < 8 || png_sig_cmp(file.data(), 0, 8) != 0)
    fail(ErrorCategory::Format, "not a PNG file: " + path, 0);

  PngErrorCtx ctx;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &ctx,
                                           on_png_error, on_png_warning);
  if (!png) fail(ErrorCategory::Internal, "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    fail(ErrorCategory::Internal, "png_create_info_struct failed");
  }

  DecodedPng out;
  {
    MemReader reader{file.data(), file.size(), 0};
    if (setjmp(png_jmpbuf(png))) {
      png_destroy_read_struct(&png, &info, nullptr);
      fail(ErrorCategory::Format, std::string("png decode: ") + ctx.message);
    }
    png_set_read_fn(png, &reader, mem_read);
    png_read_info(png, info);

    out.width = int(png_get_image_width(png, info));
    out.height = int(png_get_image_height(png, info));
    out.bit_depth = png_get_bit_depth(png, info);
    out.color_type = png_get_color_type(png, info);

    const int passes = png_set_interlace_handling(png);
    png_read_update_info(png, info);
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    out.rows.assign(std::size_t(out.height), std::vector<std::uint8_t>(rowbytes));
    std::vector<png_bytep> row_ptrs(out.height);
    for (int y = 0; y < out.height; ++y) row_ptrs[y] = out.rows[y].data();
    for (int p = 0; p < passes; ++p)
      png_read_rows(png, row_ptrs.data(), nullptr, png_uint_32(out.height));
    png_read_end(png, nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

std::vector<std::uint8_t> encode_png(int width, int height, int bit_depth,
                                     int color_type,
                                     const std::vector<std::vector<std::uint8_t>>& rows) {
  PngErrorCtx ctx;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &ctx,
                                            on_png_error, on_png_warning);
  if (!png) fail(ErrorCategory::Internal, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    fail(ErrorCategory::Internal, "png_create_info_struct failed");
  }

  std::vector<std::uint8_t> buf;
  {
    if (setjmp(png_jmpbuf(png))) {
      png_destroy_write_struct(&png, &info);
      fail(ErrorCategory::Io, std::string("png encode: ") + ctx.message);
    }
    png_set_write_fn(png, &buf, mem_write, mem_flush);
    png_set_IHDR(png, info, png_uint_32(width), png_uint_32(height), bit_depth,
                 color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (const auto& row : rows)
      png_write_row(png, const_cast<png_bytep>(row.data()));
    png_write_end(png, nullptr);
  }
  png_destroy_write_struct(&png, &info);
  return buf;
}

}  // namespace

geom::DepthImage read_depth_png(const std::string& path) {
  const DecodedPng png = decode_png(path);
  if (png.bit_depth != 16 || png.color_type != PNG_COLOR_TYPE_GRAY)
    fail(ErrorCategory::Format,
         "depth PNG must be 16-bit grayscale; got bit depth " +
             std::to_string(png.bit_depth) + ", color type " +
             std::to_string(png.color_type) + ": " + path);
  geom::DepthImage depth = geom::DepthImage::zeros(png.width, png.height);
  for (int v = 0; v < png.height; ++v) {
    const auto& row = png.rows[v];
    for (int u = 0; u < png.width; ++u) {
      // PNG stores 16-bit samples big-endian.
      const std::uint16_t mm = std::uint16_t(row[2 * u] << 8 | row[2 * u + 1]);
      depth.at(u, v) = float(mm);
    }
  }
  return depth;
}

geom::ColorImage read_color_png(const std::string& path) {
  const DecodedPng png = decode_png(path);
  if (png.bit_depth != 8 || png.color_type != PNG_COLOR_TYPE_RGB)
    fail(ErrorCategory::Format,
         "color PNG must be 8-bit RGB; got bit depth " +
             std::to_string(png.bit_depth) + ", color type " +
             std::to_string(png.color_type) + ": " + path);
  geom::ColorImage img;
  img.width = png.width;
  img.height = png.height;
  img.rgb.resize(std::size_t(png.width) * png.height);
  for (int v = 0; v < png.height; ++v) {
    const auto& row = png.rows[v];
    for (int u = 0; u < png.width; ++u)
      img.at(u, v) = {row[3 * u] / 255.f, row[3 * u + 1] / 255.f,
                      row[3 * u + 2] / 255.f};
  }
  return img;
}

void write_depth_png(const std::string& path, const geom::DepthImage& depth) {
  depth.validate();
  std::vector<std::vector<std::uint8_t>> rows(
      std::size_t(depth.height), std::vector<std::uint8_t>(std::size_t(depth.width) * 2));
  for (int v = 0; v < depth.height; ++v)
    for (int u = 0; u < depth.width; ++u) {
      const double mm = std::clamp(std::round(double(depth.at(u, v))), 0.0, 65535.0);
      const auto q = std::uint16_t(mm);
      rows[v][2 * u] = std::uint8_t(q >> 8);
      rows[v][2 * u + 1] = std::uint8_t(q & 0xff);
    }
  const auto buf =
      encode_png(depth.width, depth.height, 16, PNG_COLOR_TYPE_GRAY, rows);
  atomic_write_file(path, buf.data(), buf.size());
}

geom::MaskImage read_mask_png(const std::string& path) {
  const DecodedPng png = decode_png(path);
  if (png.bit_depth != 8 || png.color_type != PNG_COLOR_TYPE_GRAY)
    fail(ErrorCategory::Format,
         "mask PNG must be 8-bit grayscale; got bit depth " +
             std::to_string(png.bit_depth) + ", color type " +
             std::to_string(png.color_type) + ": " + path);
  geom::MaskImage mask = geom::MaskImage::zeros(png.width, png.height);
  for (int v = 0; v < png.height; ++v)
    for (int u = 0; u < png.width; ++u) mask.at(u, v) = png.rows[v][u];
  return mask;
}

void write_mask_png(const std::string& path, const geom::MaskImage& mask) {
  mask.validate();
  std::vector<std::vector<std::uint8_t>> rows(
      std::size_t(mask.height), std::vector<std::uint8_t>(std::size_t(mask.width)));
  for (int v = 0; v < mask.height; ++v)
    for (int u = 0; u < mask.width; ++u) rows[v][u] = mask.at(u, v);
  const auto buf = encode_png(mask.width, mask.height, 8, PNG_COLOR_TYPE_GRAY, rows);
  atomic_write_file(path, buf.data(), buf.size());
}

void write_color_png(const std::string& path, const geom::ColorImage& color) {
  color.validate();
  std::vector<std::vector<std::uint8_t>> rows(
      std::size_t(color.height), std::vector<std::uint8_t>(std::size_t(color.width) * 3));
  for (int v = 0; v < color.height; ++v)
    for (int u = 0; u < color.width; ++u) {
      const auto& c = color.at(u, v);
      for (int ch = 0; ch < 3; ++ch)
        rows[v][3 * u + ch] =
            std::uint8_t(std::clamp(std::lround(c[ch] * 255.f), 0l, 255l));
    }
  const auto buf = encode_png(color.width, color.height, 8, PNG_COLOR_TYPE_RGB, rows);
  atomic_write_file(path, buf.data(), buf.size());
}

}  // namespace vsc::io
