#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "error.hpp"
#include "image.hpp"
#include "png_io.hpp"
#include "rng.hpp"

using namespace matfit;

namespace {

Image random_image(int w, int h, Rng& rng) {
  Image img = Image::create(w, h);
  for (double& v : img.data) v = rng.uniform(0.0, 255.0);
  return img;
}

int reflect_oracle(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n - 2;
  i = ((i % period) + period) % period;
  return i < n ? i : period - i;
}

// Brute-force 2-D convolution with the outer-product Gaussian kernel;
// independent of the separable implementation under test.
Image direct_blur(const Image& img, double sigma) {
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * r + 1);
  double sum = 0.0;
  for (int j = -r; j <= r; ++j) {
    k[j + r] = std::exp(-0.5 * (j / sigma) * (j / sigma));
    sum += k[j + r];
  }
  for (double& w : k) w /= sum;
  Image out = img;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int dy = -r; dy <= r; ++dy) {
          for (int dx = -r; dx <= r; ++dx) {
            acc += k[dy + r] * k[dx + r] *
                   img.at(reflect_oracle(x + dx, img.width),
                          reflect_oracle(y + dy, img.height), c);
          }
        }
        out.at(x, y, c) = acc;
      }
    }
  }
  return out;
}

}  // namespace

TEST_CASE("rmse basics") {
  Image a = Image::create(8, 8, 40.0);
  CHECK(rmse(a, a) == 0.0);

  Image zeros = Image::create(8, 8, 0.0);
  Image whites = Image::create(8, 8, 255.0);
  CHECK(rmse(zeros, whites) == doctest::Approx(255.0));
  CHECK(rmse(zeros, whites) == rmse(whites, zeros));

  Image b = a;
  b.at(3, 5, 1) += 255.0;
  CHECK(rmse(a, b) > 0.0);

  Image c = Image::create(64, 64, 10.0);
  Image d = c;
  d.at(17, 40, 2) = 10.0 + 255.0;
  CHECK(rmse(c, d) == doctest::Approx(255.0 / std::sqrt(12288.0)).epsilon(1e-12));

  Image e = Image::create(8, 9);
  CHECK_THROWS_AS(rmse(a, e), Error);
}

TEST_CASE("saturate") {
  Rng rng(7);
  Image img = random_image(6, 5, rng);

  Image same = saturate(img, 1.0);
  for (size_t i = 0; i < img.data.size(); ++i) {
    CHECK(same.data[i] == doctest::Approx(img.data[i]).epsilon(1e-12));
  }

  Image gray = saturate(img, 0.0);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      CHECK(gray.at(x, y, 0) == gray.at(x, y, 1));
      CHECK(gray.at(x, y, 1) == gray.at(x, y, 2));
    }
  }

  Image px = Image::create(1, 1);
  px.at(0, 0, 0) = 200.0;
  px.at(0, 0, 1) = 100.0;
  px.at(0, 0, 2) = 50.0;
  const double lum = 0.2126 * 200 + 0.7152 * 100 + 0.0722 * 50;  // 117.65
  Image boosted = saturate(px, 2.0);
  CHECK(boosted.at(0, 0, 0) == doctest::Approx(255.0));
  CHECK(boosted.at(0, 0, 1) == doctest::Approx(lum + 2.0 * (100.0 - lum)).epsilon(1e-12));
  CHECK(boosted.at(0, 0, 2) == doctest::Approx(0.0));
}

TEST_CASE("grayscale") {
  Image gray_in = Image::create(4, 4, 99.0);
  Image out = grayscale(gray_in);
  for (size_t i = 0; i < out.data.size(); ++i) {
    CHECK(out.data[i] == doctest::Approx(99.0).epsilon(1e-12));
  }

  Image red = Image::create(1, 1);
  red.at(0, 0, 0) = 255.0;
  Image g = grayscale(red);
  for (int c = 0; c < 3; ++c) {
    CHECK(g.at(0, 0, c) == doctest::Approx(0.2126 * 255.0).epsilon(1e-12));
  }
}

TEST_CASE("colorize") {
  Rng rng(11);
  Image img = random_image(5, 4, rng);
  const double tint[3] = {1.0, 0.84, 0.0};

  Image same = colorize(img, tint, 0.0);
  for (size_t i = 0; i < img.data.size(); ++i) CHECK(same.data[i] == img.data[i]);

  Image gray = Image::create(2, 2, 128.0);
  const double white[3] = {1.0, 1.0, 1.0};
  Image lit = colorize(gray, white, 1.0);
  // 2 * lum * 1 = 256 clamps to 255.
  for (double v : lit.data) CHECK(v == doctest::Approx(255.0));

  Image gold = colorize(gray, tint, 1.0);
  for (int y = 0; y < 2; ++y) {
    for (int x = 0; x < 2; ++x) CHECK(gold.at(x, y, 2) == doctest::Approx(0.0));
  }
}

TEST_CASE("black_level") {
  Rng rng(13);
  Image img = random_image(6, 6, rng);
  Image same = black_level(img, 0.0);
  for (size_t i = 0; i < img.data.size(); ++i) {
    CHECK(same.data[i] == doctest::Approx(img.data[i]).epsilon(1e-12));
  }
  Image white = black_level(img, 255.0);
  for (double v : white.data) CHECK(v == doctest::Approx(255.0));

  Image px = Image::create(1, 1, 100.0);
  Image lifted = black_level(px, 51.0);
  CHECK(lifted.at(0, 0, 0) == doctest::Approx(131.0).epsilon(1e-12));
}

TEST_CASE("gaussian blur on constants and impulses") {
  Image flat = Image::create(9, 7, 77.0);
  for (double sigma : {0.5, 1.0, 2.5}) {
    Image out = gaussian_blur(flat, sigma);
    for (double v : out.data) CHECK(v == doctest::Approx(77.0).epsilon(1e-9));
  }

  CHECK_THROWS_AS(gaussian_blur(flat, 0.0), Error);
  CHECK_THROWS_AS(gaussian_blur(flat, -1.0), Error);

  // sigma=1 -> radius 3; a centered impulse in 15x15 never touches a border,
  // so the response center is exactly the squared 1-D center weight.
  Image impulse = Image::create(15, 15, 0.0);
  impulse.at(7, 7, 0) = 255.0;
  double sum = 0.0;
  for (int j = -3; j <= 3; ++j) sum += std::exp(-0.5 * j * j);
  const double k0 = 1.0 / sum;
  Image blurred = gaussian_blur(impulse, 1.0);
  CHECK(blurred.at(7, 7, 0) == doctest::Approx(k0 * k0 * 255.0).epsilon(1e-9));
  CHECK(blurred.at(7, 7, 1) == 0.0);
}

TEST_CASE("separable blur matches direct 2-D convolution") {
  Rng rng(17);
  for (double sigma : {0.8, 1.0, 2.0}) {
    Image img = random_image(16, 16, rng);
    Image fast = gaussian_blur(img, sigma);
    Image slow = direct_blur(img, sigma);
    for (size_t i = 0; i < img.data.size(); ++i) {
      CHECK(std::abs(fast.data[i] - slow.data[i]) < 1e-6);
    }
  }
}

TEST_CASE("masked blur") {
  Rng rng(19);
  Image img = random_image(12, 10, rng);
  Image zero_mask = Image::create(12, 10, 0.0);
  Image full_mask = Image::create(12, 10, 255.0);

  Image untouched = gaussian_blur(img, 1.5, &zero_mask);
  for (size_t i = 0; i < img.data.size(); ++i) CHECK(untouched.data[i] == img.data[i]);

  Image full = gaussian_blur(img, 1.5, &full_mask);
  Image plain = gaussian_blur(img, 1.5);
  for (size_t i = 0; i < img.data.size(); ++i) {
    CHECK(full.data[i] == doctest::Approx(plain.data[i]).epsilon(1e-12));
  }

  // Half-weight mask sits midway between input and blurred.
  Image half_mask = Image::create(12, 10, 127.5);
  Image half = gaussian_blur(img, 1.5, &half_mask);
  for (size_t i = 0; i < img.data.size(); ++i) {
    CHECK(half.data[i] ==
          doctest::Approx(0.5 * (img.data[i] + plain.data[i])).epsilon(1e-9));
  }

  Image bad_mask = Image::create(3, 3);
  CHECK_THROWS_AS(gaussian_blur(img, 1.0, &bad_mask), Error);
}

TEST_CASE("mix and stitch") {
  Rng rng(23);
  Image a = random_image(8, 8, rng);
  Image b = random_image(8, 8, rng);

  Image m0 = mix_images(a, b, 0.0);
  Image m1 = mix_images(a, b, 1.0);
  for (size_t i = 0; i < a.data.size(); ++i) {
    CHECK(m0.data[i] == a.data[i]);
    CHECK(m1.data[i] == b.data[i]);
  }
  Image mid = mix_images(a, a, 0.5);
  for (size_t i = 0; i < a.data.size(); ++i) {
    CHECK(mid.data[i] == doctest::Approx(a.data[i]).epsilon(1e-12));
  }
  Image other = Image::create(4, 4);
  CHECK_THROWS_AS(mix_images(a, other, 0.5), Error);

  Image patch = random_image(3, 2, rng);
  RectRegion region{2, 4, 3, 2};
  Image stitched = stitch(a, patch, region);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      const bool inside = x >= 2 && x < 5 && y >= 4 && y < 6;
      for (int c = 0; c < 3; ++c) {
        const double expect = inside ? patch.at(x - 2, y - 4, c) : a.at(x, y, c);
        CHECK(stitched.at(x, y, c) == expect);
      }
    }
  }
  CHECK_THROWS_AS(stitch(a, patch, RectRegion{6, 4, 3, 2}), Error);
  CHECK_THROWS_AS(stitch(a, patch, RectRegion{-1, 0, 3, 2}), Error);
  Image wrong_patch = Image::create(2, 2);
  CHECK_THROWS_AS(stitch(a, wrong_patch, region), Error);
}

TEST_CASE("box resample") {
  Image flat = Image::create(64, 64, 42.5);
  Image small = box_resample(flat, 32, 32);
  CHECK(small.width == 32);
  CHECK(small.height == 32);
  for (double v : small.data) CHECK(v == doctest::Approx(42.5).epsilon(1e-12));

  // Integer-ratio downsample is an exact block average.
  Image img = Image::create(4, 4);
  Rng rng(29);
  for (double& v : img.data) v = rng.uniform(0.0, 255.0);
  Image half = box_resample(img, 2, 2);
  for (int y = 0; y < 2; ++y) {
    for (int x = 0; x < 2; ++x) {
      for (int c = 0; c < 3; ++c) {
        const double mean = 0.25 * (img.at(2 * x, 2 * y, c) + img.at(2 * x + 1, 2 * y, c) +
                                    img.at(2 * x, 2 * y + 1, c) + img.at(2 * x + 1, 2 * y + 1, c));
        CHECK(half.at(x, y, c) == doctest::Approx(mean).epsilon(1e-12));
      }
    }
  }

  // Non-integer ratio still averages to the global mean for a constant image.
  Image odd = box_resample(flat, 10, 7);
  for (double v : odd.data) CHECK(v == doctest::Approx(42.5).epsilon(1e-12));
}

TEST_CASE("png round trip and rejection") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "matfit_imgproc_test";
  fs::create_directories(dir);

  Image img = Image::create(7, 5);
  Rng rng(31);
  for (double& v : img.data) v = static_cast<double>(rng.uniform_index(256));
  const std::string path = (dir / "roundtrip.png").string();
  save_png(img, path);
  Image back = load_png(path);
  REQUIRE(back.width == img.width);
  REQUIRE(back.height == img.height);
  for (size_t i = 0; i < img.data.size(); ++i) CHECK(back.data[i] == img.data[i]);

  // Half-to-even rounding on save.
  Image frac = Image::create(1, 1);
  frac.at(0, 0, 0) = 127.5;
  frac.at(0, 0, 1) = 128.5;
  frac.at(0, 0, 2) = 100.25;
  const std::string fpath = (dir / "frac.png").string();
  save_png(frac, fpath);
  Image fback = load_png(fpath);
  CHECK(fback.at(0, 0, 0) == 128.0);
  CHECK(fback.at(0, 0, 1) == 128.0);
  CHECK(fback.at(0, 0, 2) == 100.0);

  CHECK_THROWS_AS(load_png((dir / "missing.png").string()), Error);

  // Minimal 1x1 16-bit RGB PNG: bit depth outside the supported contract.
  static const unsigned char deep_png[] = {
      0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a, 0x00, 0x00, 0x00, 0x0d,
      0x49, 0x48, 0x44, 0x52, 0x00, 0x00, 0x00, 0x01, 0x00, 0x00, 0x00, 0x01,
      0x10, 0x02, 0x00, 0x00, 0x00, 0xc0, 0xe7, 0x8f, 0x9d, 0x00, 0x00, 0x00,
      0x0d, 0x49, 0x44, 0x41, 0x54, 0x78, 0x9c, 0x63, 0xf8, 0xff, 0x9f, 0x01,
      0x08, 0x00, 0x0a, 0xfc, 0x01, 0xff, 0x13, 0xc9, 0x85, 0x09, 0x00, 0x00,
      0x00, 0x00, 0x49, 0x45, 0x4e, 0x44, 0xae, 0x42, 0x60, 0x82};
  const std::string dpath = (dir / "deep.png").string();
  {
    std::ofstream out(dpath, std::ios::binary);
    out.write(reinterpret_cast<const char*>(deep_png), sizeof(deep_png));
  }
  CHECK_THROWS_AS(load_png(dpath), Error);
  try {
    load_png(dpath);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kFormat);
  }

  fs::remove_all(dir);
}
