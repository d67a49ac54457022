#include "nn/arch.hpp"

#include "error.hpp"

namespace matfit::nn {

LayerSpec conv2d(int filters, int kernel, int stride) {
  LayerSpec s;
  s.kind = LayerKind::kConv2D;
  s.filters = filters;
  s.kernel = kernel;
  s.stride = stride;
  return s;
}

LayerSpec maxpool(int size, int stride) {
  LayerSpec s;
  s.kind = LayerKind::kMaxPool;
  s.pool = size;
  s.pool_stride = stride;
  return s;
}

LayerSpec dense(int units, double dropout_p) {
  LayerSpec s;
  s.kind = LayerKind::kDense;
  s.units = units;
  s.dropout_p = dropout_p;
  return s;
}

LayerSpec flatten() {
  LayerSpec s;
  s.kind = LayerKind::kFlatten;
  return s;
}

LayerSpec activation(Act a) {
  LayerSpec s;
  s.kind = LayerKind::kActivation;
  s.act = a;
  return s;
}

namespace {

[[noreturn]] void bad_layer(const std::string& label, size_t idx, const std::string& why) {
  fail(ErrorCode::kInvalidArgument,
       "arch '" + label + "' layer " + std::to_string(idx) + ": " + why);
}

}  // namespace

void ArchDescriptor::finalize() {
  if (input.size() <= 0) {
    fail(ErrorCode::kInvalidArgument, "arch '" + label + "': empty input shape");
  }
  shapes.clear();
  shapes.reserve(layers.size());
  Shape cur = input;
  for (size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& l = layers[i];
    switch (l.kind) {
      case LayerKind::kConv2D: {
        if (cur.flat) bad_layer(label, i, "conv2d needs a spatial input");
        if (l.filters <= 0 || l.kernel <= 0 || l.stride <= 0) {
          bad_layer(label, i, "conv2d parameters must be positive");
        }
        if (l.kernel > cur.h || l.kernel > cur.w) {
          bad_layer(label, i, "kernel larger than input map");
        }
        cur = Shape{(cur.h - l.kernel) / l.stride + 1,
                    (cur.w - l.kernel) / l.stride + 1, l.filters, false};
        break;
      }
      case LayerKind::kMaxPool: {
        if (cur.flat) bad_layer(label, i, "maxpool needs a spatial input");
        if (l.pool <= 0 || l.pool_stride <= 0) {
          bad_layer(label, i, "maxpool parameters must be positive");
        }
        if (l.pool > cur.h || l.pool > cur.w) {
          bad_layer(label, i, "pool window larger than input map");
        }
        cur = Shape{(cur.h - l.pool) / l.pool_stride + 1,
                    (cur.w - l.pool) / l.pool_stride + 1, cur.c, false};
        break;
      }
      case LayerKind::kFlatten: {
        cur = Shape{0, 0, cur.size(), true};
        break;
      }
      case LayerKind::kDense: {
        if (!cur.flat) bad_layer(label, i, "dense needs a flattened input");
        if (l.units <= 0) bad_layer(label, i, "dense units must be positive");
        if (l.dropout_p < 0.0 || l.dropout_p >= 1.0) {
          bad_layer(label, i, "dropout probability must be in [0,1)");
        }
        cur = Shape{0, 0, l.units, true};
        break;
      }
      case LayerKind::kActivation:
        break;
    }
    shapes.push_back(cur);
  }
  if (shapes.empty()) {
    fail(ErrorCode::kInvalidArgument, "arch '" + label + "': no layers");
  }
}

namespace {

void add_block(ArchDescriptor& d, int filters) {
  d.layers.push_back(conv2d(filters, 3, 1));
  d.layers.push_back(activation(Act::kRelu));
  d.layers.push_back(maxpool(2, 2));
}

void add_head(ArchDescriptor& d, int hidden, double dropout_p, int repeats, int out) {
  d.layers.push_back(flatten());
  for (int i = 0; i < repeats; ++i) {
    d.layers.push_back(dense(hidden, dropout_p));
    d.layers.push_back(activation(Act::kRelu));
  }
  d.layers.push_back(dense(out, 0.0));
  d.layers.push_back(activation(Act::kSigmoid));
}

}  // namespace

ArchDescriptor encoder_arch(int index, int input_side, int output_size) {
  if (index < 1 || index > 9) {
    fail(ErrorCode::kInvalidArgument, "encoder index must be in 1..9");
  }
  ArchDescriptor d;
  d.label = "encoder" + std::to_string(index);
  d.input = Shape{input_side, input_side, 3, false};
  const bool deep = index == 1 || index == 4 || index == 5;
  if (deep) {
    add_block(d, 32);
    add_block(d, 64);
    add_block(d, 128);
  } else {
    add_block(d, 32);
    add_block(d, 32);
  }
  switch (index) {
    case 1: add_head(d, 256, 0.1, 2, output_size); break;
    case 2: add_head(d, 256, 0.1, 2, output_size); break;
    case 3: add_head(d, 256, 0.5, 2, output_size); break;
    case 4: add_head(d, 512, 0.5, 2, output_size); break;
    case 5: add_head(d, 512, 0.0, 2, output_size); break;
    case 6:
    case 7:
    case 9: add_head(d, 256, 0.0, 2, output_size); break;
    case 8: add_head(d, 100, 0.0, 2, output_size); break;
  }
  d.finalize();
  return d;
}

ArchDescriptor decoder_arch(int input_size, int output_side) {
  ArchDescriptor d;
  d.label = "decoder";
  d.input = Shape{0, 0, input_size, true};
  d.layers.push_back(dense(128, 0.0));
  d.layers.push_back(activation(Act::kRelu));
  d.layers.push_back(dense(384, 0.0));
  d.layers.push_back(activation(Act::kRelu));
  d.layers.push_back(dense(3 * output_side * output_side, 0.0));
  d.layers.push_back(activation(Act::kSigmoid));
  d.finalize();
  return d;
}

const char* act_name(Act a) {
  switch (a) {
    case Act::kRelu: return "relu";
    case Act::kSigmoid: return "sigmoid";
    case Act::kLinear: return "linear";
  }
  return "linear";
}

Act act_from_name(const std::string& name) {
  if (name == "relu") return Act::kRelu;
  if (name == "sigmoid") return Act::kSigmoid;
  if (name == "linear") return Act::kLinear;
  fail(ErrorCode::kFormat, "unknown activation '" + name + "'");
}

}  // namespace matfit::nn
