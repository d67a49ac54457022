#pragma once

#include "image.hpp"
#include "params.hpp"

namespace matfit {

// Fixed sphere-on-gradient test scene. Only the resolution is normally
// varied; the lighting constants define the look every network is trained
// against, so changing them invalidates saved models.
struct RenderConfig {
  int width = 64;
  int height = 64;
  double sphere_radius = 0.8;  // NDC units

  double light_dir[2][3] = {{0.4, 0.6, 0.7}, {-0.5, 0.1, 0.5}};  // normalized in ctor
  double light_intensity[2] = {1.0, 0.3};
  double ambient = 0.08;
  double bg_top[3] = {0.85, 0.87, 0.90};
  double bg_bottom[3] = {0.30, 0.32, 0.35};

  RenderConfig();

  // Throws unless width/height >= 8, directions unit-length, constants finite.
  void validate() const;
};

// Deterministic analytic forward map: shader parameters to an RGB raster.
// Defined only on the feasible box; infeasible x is an error.
Image render(const ParamVector& x, const RenderConfig& cfg);

// Max absolute per-component difference between render(x) and the render of
// x perturbed by delta along axis i. Both points must be feasible.
double sensitivity_probe(const ParamVector& x, int i, double delta,
                         const RenderConfig& cfg);

}  // namespace matfit
