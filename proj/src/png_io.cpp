#include "png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

#include "error.hpp"

namespace matfit {

namespace {

unsigned char quantize(double v) {
  v = std::clamp(v, 0.0, 255.0);
  const double f = std::floor(v);
  const double frac = v - f;
  double r;
  if (frac > 0.5) {
    r = f + 1.0;
  } else if (frac < 0.5) {
    r = f;
  } else {
    // Ties to even, so 127.5 -> 128 and 128.5 -> 128.
    r = (std::fmod(f, 2.0) == 0.0) ? f : f + 1.0;
  }
  return static_cast<unsigned char>(r);
}

}  // namespace

Image load_png(const std::string& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str())) {
    fail(ErrorCode::kIo, "cannot read PNG '" + path + "': " + png.message);
  }
  if (png.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&png);
    fail(ErrorCode::kFormat, "unsupported PNG bit depth (16-bit) in '" + path + "'");
  }
  if ((png.format & PNG_FORMAT_FLAG_COLORMAP) || !(png.format & PNG_FORMAT_FLAG_COLOR)) {
    png_image_free(&png);
    fail(ErrorCode::kFormat, "unsupported PNG color type in '" + path + "' (need 8-bit RGB/RGBA)");
  }

  // Always decode as RGBA and discard alpha rather than compositing it.
  png.format = PNG_FORMAT_RGBA;
  std::vector<unsigned char> raw(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, raw.data(), 0, nullptr)) {
    const std::string msg = png.message;
    png_image_free(&png);
    fail(ErrorCode::kIo, "corrupt PNG '" + path + "': " + msg);
  }

  Image img = Image::create(static_cast<int>(png.width), static_cast<int>(png.height));
  const size_t pixels = static_cast<size_t>(png.width) * png.height;
  for (size_t i = 0; i < pixels; ++i) {
    img.data[3 * i + 0] = raw[4 * i + 0];
    img.data[3 * i + 1] = raw[4 * i + 1];
    img.data[3 * i + 2] = raw[4 * i + 2];
  }
  return img;
}

void save_png(const Image& img, const std::string& path) {
  if (img.width <= 0 || img.height <= 0 ||
      img.data.size() != static_cast<size_t>(3) * img.width * img.height) {
    fail(ErrorCode::kInvalidArgument, "save_png: malformed image");
  }
  std::vector<unsigned char> raw(img.data.size());
  for (size_t i = 0; i < img.data.size(); ++i) raw[i] = quantize(img.data[i]);

  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(img.width);
  png.height = static_cast<png_uint_32>(img.height);
  png.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&png, path.c_str(), 0, raw.data(), 0, nullptr)) {
    fail(ErrorCode::kIo, "cannot write PNG '" + path + "': " + png.message);
  }
}

}  // namespace matfit
