#pragma once

#include <vector>

namespace matfit {

// Channel-interleaved RGB raster, components kept as doubles on a 0..255
// scale. Exported operations leave every component finite and in range.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<double> data;  // 3 * width * height

  static Image create(int w, int h, double fill = 0.0);

  double& at(int x, int y, int c) { return data[3 * (static_cast<size_t>(y) * width + x) + c]; }
  double at(int x, int y, int c) const { return data[3 * (static_cast<size_t>(y) * width + x) + c]; }
  size_t components() const { return data.size(); }
};

struct RectRegion {
  int x0 = 0;
  int y0 = 0;
  int w = 0;
  int h = 0;
};

// Root-mean-square error over all 3wh components. Throws on size mismatch.
double rmse(const Image& a, const Image& b);

// Rec. 709 luminance of one pixel, same 0..255 scale as the inputs.
double luminance(double r, double g, double b);

// out = clamp(lum + factor * (in - lum)); factor 0 collapses to grayscale.
Image saturate(const Image& img, double factor);
Image grayscale(const Image& img);

// Blends each pixel toward 2 * lum * tint (tint per channel in [0,1]).
Image colorize(const Image& img, const double tint[3], double strength);

// out = b + in * (255 - b) / 255, lifting the darkest representable value.
Image black_level(const Image& img, double b);

// Separable Gaussian, kernel radius ceil(3*sigma), reflect padding. With a
// mask, per component: out = in + (mask/255) * (blurred - in).
Image gaussian_blur(const Image& img, double sigma, const Image* mask = nullptr);

// (1 - alpha) * a + alpha * b.
Image mix_images(const Image& a, const Image& b, double alpha);

// Copies patch over region of base; patch extent must match the region and
// the region must lie inside base.
Image stitch(const Image& base, const Image& patch, const RectRegion& region);

// Area-weighted (box) resampling; exact block average for integer ratios.
Image box_resample(const Image& img, int new_w, int new_h);

}  // namespace matfit
