#pragma once

#include <array>
#include <string>

namespace matfit {

// The shader configuration is a fixed 19-vector. Component layout:
//   0-2   base color RGB            [0, 1]
//   3     metallic                  [0, 1]
//   4     specular weight           [0, 1]
//   5-7   specular tint RGB         [0, 1]
//   8     roughness                 [0.02, 1]
//   9     index of refraction       [1, 2.5]
//   10    transmission              [0, 1]
//   11-13 absorption RGB            [0, 4] per unit chord
//   14    subsurface                [0, 1]
//   15    sheen                     [0, 1]
//   16-18 emission RGB              [0, 1]
inline constexpr int kParamCount = 19;

enum ParamIndex : int {
  kBaseR = 0,
  kBaseG = 1,
  kBaseB = 2,
  kMetallic = 3,
  kSpecWeight = 4,
  kSpecTintR = 5,
  kSpecTintG = 6,
  kSpecTintB = 7,
  kRoughness = 8,
  kIor = 9,
  kTransmission = 10,
  kAbsorbR = 11,
  kAbsorbG = 12,
  kAbsorbB = 13,
  kSubsurface = 14,
  kSheen = 15,
  kEmitR = 16,
  kEmitG = 17,
  kEmitB = 18,
};

using ParamVector = std::array<double, kParamCount>;

struct Bounds {
  ParamVector lower;
  ParamVector upper;
};

// Out-of-box penalty. Large enough to dominate any image RMSE (max 255)
// while staying finite for arithmetic.
inline constexpr double kBarrierValue = 1.0e9;

Bounds default_bounds();

// Human-readable component name, for diagnostics.
const char* param_name(int index);

// True iff lower <= x <= upper componentwise (boundary counts as feasible).
bool is_feasible(const ParamVector& x, const Bounds& b);

// 0 inside the feasible box, kBarrierValue outside.
double barrier(const ParamVector& x, const Bounds& b);

// Componentwise projection onto the box.
ParamVector clamp_to_bounds(const ParamVector& x, const Bounds& b);

// Affine map of the box onto [0,1]^19 and back. denormalize clamps its
// input into [0,1] first, so its result is always feasible.
ParamVector normalize(const ParamVector& x, const Bounds& b);
ParamVector denormalize(const ParamVector& u, const Bounds& b);

}  // namespace matfit
