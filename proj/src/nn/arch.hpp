#pragma once

#include <string>
#include <vector>

namespace matfit::nn {

enum class LayerKind { kConv2D, kMaxPool, kDense, kFlatten, kActivation };
enum class Act { kRelu, kSigmoid, kLinear };

// Activation maps are stored channel-major: index = (c*H + y)*W + x.
// After Flatten the shape is a bare vector and only `c` carries the length.
struct Shape {
  int h = 0, w = 0, c = 0;
  bool flat = false;
  int size() const { return flat ? c : h * w * c; }
};

struct LayerSpec {
  LayerKind kind;
  int filters = 0, kernel = 0, stride = 1;  // conv
  int pool = 0, pool_stride = 0;            // maxpool
  int units = 0;                            // dense
  double dropout_p = 0.0;                   // dense (inverted dropout on its output)
  Act act = Act::kLinear;                   // activation
};

LayerSpec conv2d(int filters, int kernel, int stride = 1);
LayerSpec maxpool(int size, int stride);
LayerSpec dense(int units, double dropout_p = 0.0);
LayerSpec flatten();
LayerSpec activation(Act a);

struct ArchDescriptor {
  std::string label;
  Shape input;
  std::vector<LayerSpec> layers;
  std::vector<Shape> shapes;  // output shape per layer, filled by finalize()

  // Chains shapes through the layer list; throws (naming the layer) when a
  // layer cannot consume its input, a kernel outgrows the map, or
  // dropout_p is outside [0,1).
  void finalize();

  int output_size() const { return shapes.empty() ? 0 : shapes.back().size(); }
};

// The nine encoder variants (1-based index), desk-scaled: 32x32x3 input,
// conv blocks of 32/64/128 filters, hidden FC widths 256/512/100, sigmoid
// head so predictions always land inside the unit cube.
ArchDescriptor encoder_arch(int index, int input_side = 32, int output_size = 19);

// Surrogate renderer: 19 -> 128 -> 384 -> 3*side^2, relu/relu/sigmoid.
// Sized so one forward is an order of magnitude cheaper than the true
// renderer at 64x64 — a fatter decoder erases the surrogate's entire point.
ArchDescriptor decoder_arch(int input_size = 19, int output_side = 16);

const char* act_name(Act a);
Act act_from_name(const std::string& name);

}  // namespace matfit::nn
