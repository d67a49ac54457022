#include "image.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace matfit {

namespace {

double clamp255(double v) { return std::clamp(v, 0.0, 255.0); }

void require_same_size(const Image& a, const Image& b, const char* what) {
  if (a.width != b.width || a.height != b.height) {
    fail(ErrorCode::kInvalidArgument,
         std::string(what) + ": image dimensions differ");
  }
}

// Mirror an out-of-range index back into [0, n), reflecting about the edge
// pixels (… 2 1 | 0 1 2 … n-1 | n-2 n-3 …). Works for any offset.
int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n - 2;
  i = ((i % period) + period) % period;
  return i < n ? i : period - i;
}

}  // namespace

Image Image::create(int w, int h, double fill) {
  if (w <= 0 || h <= 0) {
    fail(ErrorCode::kInvalidArgument, "image dimensions must be positive");
  }
  Image img;
  img.width = w;
  img.height = h;
  img.data.assign(static_cast<size_t>(3) * w * h, fill);
  return img;
}

double rmse(const Image& a, const Image& b) {
  require_same_size(a, b, "rmse");
  double acc = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(a.data.size()));
}

double luminance(double r, double g, double b) {
  return 0.2126 * r + 0.7152 * g + 0.0722 * b;
}

Image saturate(const Image& img, double factor) {
  Image out = img;
  for (size_t i = 0; i < img.data.size(); i += 3) {
    const double lum = luminance(img.data[i], img.data[i + 1], img.data[i + 2]);
    for (int c = 0; c < 3; ++c) {
      out.data[i + c] = clamp255(lum + factor * (img.data[i + c] - lum));
    }
  }
  return out;
}

Image grayscale(const Image& img) { return saturate(img, 0.0); }

Image colorize(const Image& img, const double tint[3], double strength) {
  Image out = img;
  for (size_t i = 0; i < img.data.size(); i += 3) {
    const double lum = luminance(img.data[i], img.data[i + 1], img.data[i + 2]);
    for (int c = 0; c < 3; ++c) {
      const double target = 2.0 * lum * tint[c];
      out.data[i + c] =
          clamp255(img.data[i + c] + strength * (target - img.data[i + c]));
    }
  }
  return out;
}

Image black_level(const Image& img, double b) {
  Image out = img;
  const double scale = (255.0 - b) / 255.0;
  for (double& v : out.data) v = clamp255(b + v * scale);
  return out;
}

Image gaussian_blur(const Image& img, double sigma, const Image* mask) {
  if (!(sigma > 0.0)) {
    fail(ErrorCode::kInvalidArgument, "gaussian_blur: sigma must be positive");
  }
  if (mask) require_same_size(img, *mask, "gaussian_blur mask");

  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int j = -radius; j <= radius; ++j) {
    const double w = std::exp(-0.5 * (j / sigma) * (j / sigma));
    kernel[j + radius] = w;
    sum += w;
  }
  for (double& w : kernel) w /= sum;

  Image tmp = img;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int j = -radius; j <= radius; ++j) {
          acc += kernel[j + radius] * img.at(reflect_index(x + j, img.width), y, c);
        }
        tmp.at(x, y, c) = acc;
      }
    }
  }
  Image blurred = img;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int j = -radius; j <= radius; ++j) {
          acc += kernel[j + radius] * tmp.at(x, reflect_index(y + j, img.height), c);
        }
        blurred.at(x, y, c) = clamp255(acc);
      }
    }
  }
  if (!mask) return blurred;

  Image out = img;
  for (size_t i = 0; i < img.data.size(); ++i) {
    const double t = mask->data[i] / 255.0;
    out.data[i] = clamp255(img.data[i] + t * (blurred.data[i] - img.data[i]));
  }
  return out;
}

Image mix_images(const Image& a, const Image& b, double alpha) {
  require_same_size(a, b, "mix_images");
  Image out = a;
  for (size_t i = 0; i < a.data.size(); ++i) {
    out.data[i] = (1.0 - alpha) * a.data[i] + alpha * b.data[i];
  }
  return out;
}

Image stitch(const Image& base, const Image& patch, const RectRegion& region) {
  if (region.w <= 0 || region.h <= 0 || region.x0 < 0 || region.y0 < 0 ||
      region.x0 + region.w > base.width || region.y0 + region.h > base.height) {
    fail(ErrorCode::kInvalidArgument, "stitch: region outside base image");
  }
  if (patch.width != region.w || patch.height != region.h) {
    fail(ErrorCode::kInvalidArgument, "stitch: patch does not match region extent");
  }
  Image out = base;
  for (int y = 0; y < region.h; ++y) {
    for (int x = 0; x < region.w; ++x) {
      for (int c = 0; c < 3; ++c) {
        out.at(region.x0 + x, region.y0 + y, c) = patch.at(x, y, c);
      }
    }
  }
  return out;
}

Image box_resample(const Image& img, int new_w, int new_h) {
  if (new_w <= 0 || new_h <= 0) {
    fail(ErrorCode::kInvalidArgument, "box_resample: target size must be positive");
  }
  Image out = Image::create(new_w, new_h);
  const double sx = static_cast<double>(img.width) / new_w;
  const double sy = static_cast<double>(img.height) / new_h;
  for (int y = 0; y < new_h; ++y) {
    const double y_lo = y * sy, y_hi = (y + 1) * sy;
    const int iy0 = static_cast<int>(std::floor(y_lo));
    const int iy1 = std::min(static_cast<int>(std::ceil(y_hi)), img.height);
    for (int x = 0; x < new_w; ++x) {
      const double x_lo = x * sx, x_hi = (x + 1) * sx;
      const int ix0 = static_cast<int>(std::floor(x_lo));
      const int ix1 = std::min(static_cast<int>(std::ceil(x_hi)), img.width);
      double acc[3] = {0.0, 0.0, 0.0};
      double area = 0.0;
      for (int iy = iy0; iy < iy1; ++iy) {
        const double wy = std::min<double>(iy + 1, y_hi) - std::max<double>(iy, y_lo);
        for (int ix = ix0; ix < ix1; ++ix) {
          const double wx = std::min<double>(ix + 1, x_hi) - std::max<double>(ix, x_lo);
          const double w = wx * wy;
          area += w;
          for (int c = 0; c < 3; ++c) acc[c] += w * img.at(ix, iy, c);
        }
      }
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = clamp255(acc[c] / area);
    }
  }
  return out;
}

}  // namespace matfit
