#include "scrubber/png_io.hpp"

#include <png.h>

#include <cstdio>
#include <memory>
#include <stdexcept>

namespace scrubber::png {

namespace {

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

[[noreturn]] void fail(const std::string& path, const char* what) {
  throw std::runtime_error(std::string("png: ") + what + ": " + path);
}

void write_image(const std::string& path, int width, int height, int bit_depth, int color_type,
                 const std::vector<png_bytep>& rows) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) fail(path, "cannot open for writing");
  png_structp png_ptr = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png_ptr) fail(path, "create_write_struct failed");
  png_infop info_ptr = png_create_info_struct(png_ptr);
  if (!info_ptr) {
    png_destroy_write_struct(&png_ptr, nullptr);
    fail(path, "create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png_ptr))) {
    png_destroy_write_struct(&png_ptr, &info_ptr);
    fail(path, "write error");
  }
  png_init_io(png_ptr, fp.get());
  png_set_IHDR(png_ptr, info_ptr, width, height, bit_depth, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png_ptr, info_ptr);
  if (bit_depth == 16) png_set_swap(png_ptr);  // rows are little-endian in memory
  png_write_image(png_ptr, const_cast<png_bytep*>(rows.data()));
  png_write_end(png_ptr, nullptr);
  png_destroy_write_struct(&png_ptr, &info_ptr);
}

struct ReadCtx {
  png_structp png_ptr = nullptr;
  png_infop info_ptr = nullptr;
  FilePtr fp;

  ~ReadCtx() {
    if (png_ptr) png_destroy_read_struct(&png_ptr, info_ptr ? &info_ptr : nullptr, nullptr);
  }
};

void open_read(const std::string& path, ReadCtx* ctx) {
  ctx->fp.reset(std::fopen(path.c_str(), "rb"));
  if (!ctx->fp) fail(path, "cannot open for reading");
  ctx->png_ptr = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!ctx->png_ptr) fail(path, "create_read_struct failed");
  ctx->info_ptr = png_create_info_struct(ctx->png_ptr);
  if (!ctx->info_ptr) fail(path, "create_info_struct failed");
  if (setjmp(png_jmpbuf(ctx->png_ptr))) fail(path, "corrupt file");
  png_init_io(ctx->png_ptr, ctx->fp.get());
  png_read_info(ctx->png_ptr, ctx->info_ptr);
}

}  // namespace

void write_rgb8(const std::string& path, int width, int height, const std::vector<uint8_t>& rgb) {
  if (rgb.size() != static_cast<size_t>(width) * height * 3) fail(path, "bad rgb buffer size");
  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y) {
    rows[y] = const_cast<png_bytep>(&rgb[static_cast<size_t>(y) * width * 3]);
  }
  write_image(path, width, height, 8, PNG_COLOR_TYPE_RGB, rows);
}

void read_rgb8(const std::string& path, int* width, int* height, std::vector<uint8_t>* rgb) {
  ReadCtx ctx;
  open_read(path, &ctx);
  if (setjmp(png_jmpbuf(ctx.png_ptr))) fail(path, "read error");
  png_set_expand(ctx.png_ptr);
  png_set_strip_16(ctx.png_ptr);
  png_set_strip_alpha(ctx.png_ptr);
  png_set_gray_to_rgb(ctx.png_ptr);
  png_read_update_info(ctx.png_ptr, ctx.info_ptr);
  *width = png_get_image_width(ctx.png_ptr, ctx.info_ptr);
  *height = png_get_image_height(ctx.png_ptr, ctx.info_ptr);
  rgb->assign(static_cast<size_t>(*width) * *height * 3, 0);
  std::vector<png_bytep> rows(*height);
  for (int y = 0; y < *height; ++y) {
    rows[y] = &(*rgb)[static_cast<size_t>(y) * *width * 3];
  }
  png_read_image(ctx.png_ptr, rows.data());
}

void write_gray16(const std::string& path, int width, int height,
                  const std::vector<uint16_t>& gray) {
  if (gray.size() != static_cast<size_t>(width) * height) fail(path, "bad gray16 buffer size");
  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y) {
    rows[y] = const_cast<png_bytep>(
        reinterpret_cast<const png_byte*>(&gray[static_cast<size_t>(y) * width]));
  }
  write_image(path, width, height, 16, PNG_COLOR_TYPE_GRAY, rows);
}

void read_gray16(const std::string& path, int* width, int* height, std::vector<uint16_t>* gray) {
  ReadCtx ctx;
  open_read(path, &ctx);
  if (setjmp(png_jmpbuf(ctx.png_ptr))) fail(path, "read error");
  if (png_get_color_type(ctx.png_ptr, ctx.info_ptr) != PNG_COLOR_TYPE_GRAY ||
      png_get_bit_depth(ctx.png_ptr, ctx.info_ptr) != 16) {
    fail(path, "expected 16-bit grayscale");
  }
  png_set_swap(ctx.png_ptr);
  png_read_update_info(ctx.png_ptr, ctx.info_ptr);
  *width = png_get_image_width(ctx.png_ptr, ctx.info_ptr);
  *height = png_get_image_height(ctx.png_ptr, ctx.info_ptr);
  gray->assign(static_cast<size_t>(*width) * *height, 0);
  std::vector<png_bytep> rows(*height);
  for (int y = 0; y < *height; ++y) {
    rows[y] = reinterpret_cast<png_byte*>(&(*gray)[static_cast<size_t>(y) * *width]);
  }
  png_read_image(ctx.png_ptr, rows.data());
}

void write_gray8(const std::string& path, int width, int height, const std::vector<uint8_t>& gray) {
  if (gray.size() != static_cast<size_t>(width) * height) fail(path, "bad gray8 buffer size");
  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y) {
    rows[y] = const_cast<png_bytep>(&gray[static_cast<size_t>(y) * width]);
  }
  write_image(path, width, height, 8, PNG_COLOR_TYPE_GRAY, rows);
}

void read_gray8(const std::string& path, int* width, int* height, std::vector<uint8_t>* gray) {
  ReadCtx ctx;
  open_read(path, &ctx);
  if (setjmp(png_jmpbuf(ctx.png_ptr))) fail(path, "read error");
  if (png_get_color_type(ctx.png_ptr, ctx.info_ptr) != PNG_COLOR_TYPE_GRAY ||
      png_get_bit_depth(ctx.png_ptr, ctx.info_ptr) != 8) {
    fail(path, "expected 8-bit grayscale");
  }
  png_read_update_info(ctx.png_ptr, ctx.info_ptr);
  *width = png_get_image_width(ctx.png_ptr, ctx.info_ptr);
  *height = png_get_image_height(ctx.png_ptr, ctx.info_ptr);
  gray->assign(static_cast<size_t>(*width) * *height, 0);
  std::vector<png_bytep> rows(*height);
  for (int y = 0; y < *height; ++y) {
    rows[y] = &(*gray)[static_cast<size_t>(y) * *width];
  }
  png_read_image(ctx.png_ptr, rows.data());
}

}  // namespace scrubber::png
