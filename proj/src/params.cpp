#include "params.hpp"

#include <algorithm>

#include "error.hpp"

namespace matfit {

Bounds default_bounds() {
  Bounds b;
  b.lower.fill(0.0);
  b.upper.fill(1.0);
  b.lower[kRoughness] = 0.02;
  b.lower[kIor] = 1.0;
  b.upper[kIor] = 2.5;
  b.upper[kAbsorbR] = 4.0;
  b.upper[kAbsorbG] = 4.0;
  b.upper[kAbsorbB] = 4.0;
  return b;
}

const char* param_name(int index) {
  static const char* names[kParamCount] = {
      "base_r",      "base_g",    "base_b",    "metallic",  "spec_weight",
      "spec_tint_r", "spec_tint_g", "spec_tint_b", "roughness", "ior",
      "transmission", "absorb_r",  "absorb_g",  "absorb_b",  "subsurface",
      "sheen",       "emit_r",    "emit_g",    "emit_b",
  };
  if (index < 0 || index >= kParamCount) {
    fail(ErrorCode::kInvalidArgument, "parameter index out of range");
  }
  return names[index];
}

bool is_feasible(const ParamVector& x, const Bounds& b) {
  for (int i = 0; i < kParamCount; ++i) {
    if (x[i] < b.lower[i] || x[i] > b.upper[i]) return false;
  }
  return true;
}

double barrier(const ParamVector& x, const Bounds& b) {
  return is_feasible(x, b) ? 0.0 : kBarrierValue;
}

ParamVector clamp_to_bounds(const ParamVector& x, const Bounds& b) {
  ParamVector out;
  for (int i = 0; i < kParamCount; ++i) {
    out[i] = std::clamp(x[i], b.lower[i], b.upper[i]);
  }
  return out;
}

ParamVector normalize(const ParamVector& x, const Bounds& b) {
  ParamVector u;
  for (int i = 0; i < kParamCount; ++i) {
    u[i] = (x[i] - b.lower[i]) / (b.upper[i] - b.lower[i]);
  }
  return u;
}

ParamVector denormalize(const ParamVector& u, const Bounds& b) {
  ParamVector x;
  for (int i = 0; i < kParamCount; ++i) {
    double t = std::clamp(u[i], 0.0, 1.0);
    x[i] = b.lower[i] + t * (b.upper[i] - b.lower[i]);
  }
  return x;
}

}  // namespace matfit
