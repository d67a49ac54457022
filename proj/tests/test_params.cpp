#include "doctest.h"

#include <cmath>

#include "params.hpp"
#include "rng.hpp"

using namespace matfit;

TEST_CASE("default bounds match the documented box") {
  Bounds b = default_bounds();
  // Unit-interval components.
  for (int i : {kBaseR, kBaseG, kBaseB, kMetallic, kSpecWeight, kSpecTintR,
                kSpecTintG, kSpecTintB, kTransmission, kSubsurface, kSheen,
                kEmitR, kEmitG, kEmitB}) {
    CHECK(b.lower[i] == 0.0);
    CHECK(b.upper[i] == 1.0);
  }
  CHECK(b.lower[kRoughness] == 0.02);
  CHECK(b.upper[kRoughness] == 1.0);
  CHECK(b.lower[kIor] == 1.0);
  CHECK(b.upper[kIor] == 2.5);
  for (int i : {kAbsorbR, kAbsorbG, kAbsorbB}) {
    CHECK(b.lower[i] == 0.0);
    CHECK(b.upper[i] == 4.0);
  }
  for (int i = 0; i < kParamCount; ++i) CHECK(b.lower[i] < b.upper[i]);
}

TEST_CASE("feasibility includes the boundary") {
  Bounds b = default_bounds();
  ParamVector mid;
  for (int i = 0; i < kParamCount; ++i) mid[i] = 0.5 * (b.lower[i] + b.upper[i]);
  CHECK(is_feasible(mid, b));
  CHECK(is_feasible(b.lower, b));
  CHECK(is_feasible(b.upper, b));

  ParamVector x = mid;
  x[kRoughness] = 0.02;  // exactly on the lower bound
  CHECK(is_feasible(x, b));
  x[kRoughness] = 0.019999;
  CHECK_FALSE(is_feasible(x, b));
  x = mid;
  x[kIor] = 2.5000001;
  CHECK_FALSE(is_feasible(x, b));
}

TEST_CASE("barrier is exactly zero or the penalty constant") {
  Bounds b = default_bounds();
  ParamVector x = b.lower;
  CHECK(barrier(x, b) == 0.0);
  x[kMetallic] = -1e-9;
  CHECK(barrier(x, b) == kBarrierValue);
  CHECK(kBarrierValue == 1.0e9);
}

TEST_CASE("clamp projects onto the box") {
  Bounds b = default_bounds();
  ParamVector x;
  x.fill(-3.0);
  x[kIor] = 7.0;
  ParamVector c = clamp_to_bounds(x, b);
  CHECK(is_feasible(c, b));
  CHECK(c[kBaseR] == 0.0);
  CHECK(c[kRoughness] == 0.02);
  CHECK(c[kIor] == 2.5);
  // Feasible input is untouched.
  ParamVector mid;
  for (int i = 0; i < kParamCount; ++i) mid[i] = 0.5 * (b.lower[i] + b.upper[i]);
  ParamVector cm = clamp_to_bounds(mid, b);
  for (int i = 0; i < kParamCount; ++i) CHECK(cm[i] == mid[i]);
}

TEST_CASE("normalize/denormalize round-trips feasible points") {
  Bounds b = default_bounds();
  Rng rng(1234);
  for (int trial = 0; trial < 100; ++trial) {
    ParamVector x;
    for (int i = 0; i < kParamCount; ++i) x[i] = rng.uniform(b.lower[i], b.upper[i]);
    ParamVector u = normalize(x, b);
    for (int i = 0; i < kParamCount; ++i) {
      CHECK(u[i] >= 0.0);
      CHECK(u[i] <= 1.0);
    }
    ParamVector back = denormalize(u, b);
    for (int i = 0; i < kParamCount; ++i) {
      CHECK(back[i] == doctest::Approx(x[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("denormalize clamps out-of-range coordinates") {
  Bounds b = default_bounds();
  ParamVector u;
  u.fill(-0.25);
  ParamVector x = denormalize(u, b);
  for (int i = 0; i < kParamCount; ++i) CHECK(x[i] == b.lower[i]);
  u.fill(1.75);
  x = denormalize(u, b);
  for (int i = 0; i < kParamCount; ++i) CHECK(x[i] == b.upper[i]);
}

TEST_CASE("param names are stable and distinct") {
  CHECK(std::string(param_name(kRoughness)) == "roughness");
  CHECK(std::string(param_name(kIor)) == "ior");
  for (int i = 0; i < kParamCount; ++i) {
    for (int j = i + 1; j < kParamCount; ++j) {
      CHECK(std::string(param_name(i)) != std::string(param_name(j)));
    }
  }
}
