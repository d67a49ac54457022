#include "render.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace matfit {

namespace {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;
};

Vec3 normalized(const Vec3& v) {
  const double len = std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z);
  return {v.x / len, v.y / len, v.z / len};
}

double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

RenderConfig::RenderConfig() {
  for (auto& dir : light_dir) {
    Vec3 n = normalized({dir[0], dir[1], dir[2]});
    dir[0] = n.x;
    dir[1] = n.y;
    dir[2] = n.z;
  }
}

void RenderConfig::validate() const {
  if (width < 8 || height < 8) {
    fail(ErrorCode::kInvalidArgument, "render resolution must be at least 8x8");
  }
  if (!(sphere_radius > 0.0) || !std::isfinite(sphere_radius)) {
    fail(ErrorCode::kInvalidArgument, "sphere radius must be positive");
  }
  for (const auto& dir : light_dir) {
    const double len2 = dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2];
    if (std::abs(len2 - 1.0) > 1e-9) {
      fail(ErrorCode::kInvalidArgument, "light directions must be unit length");
    }
  }
  for (double v : {light_intensity[0], light_intensity[1], ambient,
                   bg_top[0], bg_top[1], bg_top[2],
                   bg_bottom[0], bg_bottom[1], bg_bottom[2]}) {
    if (!std::isfinite(v)) fail(ErrorCode::kInvalidArgument, "scene constant not finite");
  }
}

Image render(const ParamVector& x, const RenderConfig& cfg) {
  cfg.validate();
  if (!is_feasible(x, default_bounds())) {
    fail(ErrorCode::kInfeasible, "parameter out of bounds");
  }

  const Vec3 view{0.0, 0.0, 1.0};
  Vec3 lights[2];
  Vec3 halves[2];
  for (int k = 0; k < 2; ++k) {
    lights[k] = {cfg.light_dir[k][0], cfg.light_dir[k][1], cfg.light_dir[k][2]};
    halves[k] = normalized({lights[k].x + view.x, lights[k].y + view.y, lights[k].z + view.z});
  }

  const double* base = &x[kBaseR];
  const double* spec_tint = &x[kSpecTintR];
  const double* absorb = &x[kAbsorbR];
  const double* emit = &x[kEmitR];
  const double metallic = x[kMetallic];
  const double spec_weight = x[kSpecWeight];
  const double roughness = x[kRoughness];
  const double ior = x[kIor];
  const double transmission = x[kTransmission];
  const double subsurface = x[kSubsurface];
  const double sheen = x[kSheen];

  const double f0 = ((ior - 1.0) / (ior + 1.0)) * ((ior - 1.0) / (ior + 1.0));
  const double spec_exp = std::max(1.0, 2.0 / (roughness * roughness) - 2.0);
  const double kd = (1.0 - metallic) * (1.0 - transmission);
  const double r2 = cfg.sphere_radius * cfg.sphere_radius;

  double tint[3];
  for (int c = 0; c < 3; ++c) {
    tint[c] = spec_tint[c] + metallic * (base[c] - spec_tint[c]);
  }

  auto fresnel = [f0](double c) {
    const double m = 1.0 - c;
    const double m2 = m * m;
    return f0 + (1.0 - f0) * m2 * m2 * m;
  };

  Image img = Image::create(cfg.width, cfg.height);
  for (int py = 0; py < cfg.height; ++py) {
    const double v = 1.0 - 2.0 * (py + 0.5) / cfg.height;
    double bg[3];
    const double t = (v + 1.0) * 0.5;
    for (int c = 0; c < 3; ++c) {
      bg[c] = cfg.bg_bottom[c] + t * (cfg.bg_top[c] - cfg.bg_bottom[c]);
    }
    for (int px = 0; px < cfg.width; ++px) {
      const double u = 2.0 * (px + 0.5) / cfg.width - 1.0;
      const double d2 = u * u + v * v;
      double color[3];
      if (d2 > r2) {
        for (int c = 0; c < 3; ++c) color[c] = bg[c];
      } else {
        const Vec3 n{u / cfg.sphere_radius, v / cfg.sphere_radius,
                     std::sqrt(std::max(0.0, 1.0 - d2 / r2))};
        const double cn = std::max(0.0, dot(n, view));

        double diffuse = 0.0;
        double spec = 0.0;
        for (int k = 0; k < 2; ++k) {
          const double nl = dot(n, lights[k]);
          diffuse += cfg.light_intensity[k] *
                     clamp01((nl + subsurface) / (1.0 + subsurface));
          const double nh = std::max(0.0, dot(n, halves[k]));
          spec += cfg.light_intensity[k] * spec_weight * fresnel(nh) *
                  std::pow(nh, spec_exp);
        }

        const double sheen_term = sheen * (1.0 - cn) * (1.0 - cn) * (1.0 - cn);
        const double chord = 2.0 * std::sqrt(std::max(0.0, r2 - d2)) / cfg.sphere_radius;
        const double transmit_w = transmission * (1.0 - fresnel(cn));

        for (int c = 0; c < 3; ++c) {
          const double transmit = transmit_w * std::exp(-absorb[c] * chord) * bg[c];
          color[c] = emit[c] + cfg.ambient * base[c] + kd * diffuse * base[c] +
                     spec * tint[c] + sheen_term + transmit;
        }
      }
      for (int c = 0; c < 3; ++c) {
        img.at(px, py, c) = std::clamp(color[c] * 255.0, 0.0, 255.0);
      }
    }
  }
  return img;
}

double sensitivity_probe(const ParamVector& x, int i, double delta,
                         const RenderConfig& cfg) {
  if (i < 0 || i >= kParamCount) {
    fail(ErrorCode::kInvalidArgument, "sensitivity_probe: bad index");
  }
  ParamVector y = x;
  y[i] += delta;
  const Image a = render(x, cfg);
  const Image b = render(y, cfg);  // throws if the perturbed point left the box
  double max_diff = 0.0;
  for (size_t j = 0; j < a.data.size(); ++j) {
    max_diff = std::max(max_diff, std::abs(a.data[j] - b.data[j]));
  }
  return max_diff;
}

}  // namespace matfit
