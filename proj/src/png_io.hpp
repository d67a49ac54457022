#pragma once

#include <string>

#include "image.hpp"

namespace matfit {

// 8-bit RGB or RGBA only; alpha is dropped. Anything else (16-bit, palette,
// grayscale) is rejected with a diagnostic.
Image load_png(const std::string& path);

// Components are clamped to [0,255] and rounded half-to-even, so integer
// images round-trip losslessly.
void save_png(const Image& img, const std::string& path);

}  // namespace matfit
