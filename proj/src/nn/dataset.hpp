#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>

#include "image.hpp"
#include "params.hpp"
#include "render.hpp"

namespace matfit::nn {

// Column s holds sample s. Encoders train images -> params; the decoder
// trains params -> images (same data, inputs and outputs swapped).
struct Dataset {
  uint64_t seed = 0;
  int input_side = 0;           // image side after box downsample
  RenderConfig render_cfg;      // resolution the samples were rendered at
  Bounds bounds;
  Eigen::MatrixXf params;       // 19 x count, normalized to [0,1]
  Eigen::MatrixXf images;       // 3*side^2 x count, scaled to [0,1]

  int count() const { return static_cast<int>(params.cols()); }
};

// Uniform per-component parameter draws, render, box-downsample. Fully
// reproducible from (count, seed, bounds, render_cfg, net_input_side).
Dataset gen_dataset(int count, uint64_t seed, const Bounds& bounds,
                    const RenderConfig& render_cfg, int net_input_side);

// Interleaved 0..255 raster -> channel-major [0,1] network input column.
Eigen::VectorXf image_to_input(const Image& img);

// "MFDS1" cache: magic, length-prefixed JSON header, float32 LE blobs.
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace matfit::nn
