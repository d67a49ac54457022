#include "nn/serialize.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <memory>
#include <vector>

#include "error.hpp"

static_assert(std::endian::native == std::endian::little,
              "MFNN1 assumes a little-endian host");

namespace matfit::nn {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

std::string layer_desc(const ArchDescriptor& d, size_t i) {
  const LayerSpec& l = d.layers[i];
  std::string kind;
  switch (l.kind) {
    case LayerKind::kConv2D:
      kind = "conv2d " + std::to_string(l.filters);
      break;
    case LayerKind::kDense:
      kind = "dense " + std::to_string(l.units);
      break;
    case LayerKind::kMaxPool: kind = "maxpool"; break;
    case LayerKind::kFlatten: kind = "flatten"; break;
    case LayerKind::kActivation: kind = act_name(l.act); break;
  }
  return "layer " + std::to_string(i) + " (" + kind + ")";
}

}  // namespace

nlohmann::json arch_to_json(const ArchDescriptor& d) {
  nlohmann::json layers = nlohmann::json::array();
  for (const LayerSpec& l : d.layers) {
    nlohmann::json j;
    switch (l.kind) {
      case LayerKind::kConv2D:
        j = {{"type", "conv2d"}, {"filters", l.filters}, {"kernel", l.kernel}, {"stride", l.stride}};
        break;
      case LayerKind::kMaxPool:
        j = {{"type", "maxpool"}, {"size", l.pool}, {"stride", l.pool_stride}};
        break;
      case LayerKind::kDense:
        j = {{"type", "dense"}, {"units", l.units}, {"dropout", l.dropout_p}};
        break;
      case LayerKind::kFlatten:
        j = {{"type", "flatten"}};
        break;
      case LayerKind::kActivation:
        j = {{"type", "activation"}, {"fn", act_name(l.act)}};
        break;
    }
    layers.push_back(std::move(j));
  }
  return {{"label", d.label},
          {"input", {{"h", d.input.h}, {"w", d.input.w}, {"c", d.input.c}, {"flat", d.input.flat}}},
          {"layers", layers}};
}

ArchDescriptor arch_from_json(const nlohmann::json& j) {
  ArchDescriptor d;
  d.label = j.at("label").get<std::string>();
  const auto& in = j.at("input");
  d.input = Shape{in.at("h").get<int>(), in.at("w").get<int>(), in.at("c").get<int>(),
                  in.at("flat").get<bool>()};
  for (const auto& lj : j.at("layers")) {
    const std::string type = lj.at("type").get<std::string>();
    if (type == "conv2d") {
      d.layers.push_back(conv2d(lj.at("filters").get<int>(), lj.at("kernel").get<int>(),
                                lj.at("stride").get<int>()));
    } else if (type == "maxpool") {
      d.layers.push_back(maxpool(lj.at("size").get<int>(), lj.at("stride").get<int>()));
    } else if (type == "dense") {
      d.layers.push_back(dense(lj.at("units").get<int>(), lj.at("dropout").get<double>()));
    } else if (type == "flatten") {
      d.layers.push_back(flatten());
    } else if (type == "activation") {
      d.layers.push_back(activation(act_from_name(lj.at("fn").get<std::string>())));
    } else {
      fail(ErrorCode::kFormat, "unknown layer type '" + type + "'");
    }
  }
  d.finalize();
  return d;
}

void save_model(const Network<float>& net, const Bounds& bounds,
                const nlohmann::json& meta, const std::string& path) {
  nlohmann::json hdr;
  hdr["format"] = "MFNN1";
  hdr["arch"] = arch_to_json(net.desc());
  hdr["bounds"] = {{"lower", bounds.lower}, {"upper", bounds.upper}};
  hdr["meta"] = meta;
  const std::string doc = hdr.dump();

  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) fail(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  auto put = [&](const void* data, size_t bytes) {
    if (std::fwrite(data, 1, bytes, f.get()) != bytes) {
      fail(ErrorCode::kIo, "short write to '" + path + "'");
    }
  };
  put("MFNN1", 5);
  const uint32_t len = static_cast<uint32_t>(doc.size());
  put(&len, sizeof(len));
  put(doc.data(), doc.size());

  using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  for (const auto& lw : net.weights()) {
    if (!lw.present()) continue;
    const RowMat w = lw.W;  // blob stores W row-major
    put(w.data(), sizeof(float) * w.size());
    put(lw.b.data(), sizeof(float) * lw.b.size());
  }
}

ModelInfo load_model(const std::string& path, const Bounds* expected_bounds,
                     std::ostream* warn) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) fail(ErrorCode::kIo, "cannot open model '" + path + "'");

  char magic[5];
  if (std::fread(magic, 1, 5, f.get()) != 5 || std::string(magic, 5) != "MFNN1") {
    fail(ErrorCode::kFormat, "'" + path + "' is not an MFNN1 model");
  }
  uint32_t len = 0;
  if (std::fread(&len, 1, sizeof(len), f.get()) != sizeof(len)) {
    fail(ErrorCode::kFormat, "truncated model header in '" + path + "'");
  }
  std::string doc(len, '\0');
  if (std::fread(doc.data(), 1, len, f.get()) != len) {
    fail(ErrorCode::kFormat, "truncated model header in '" + path + "'");
  }

  ModelInfo info;
  ArchDescriptor desc;
  try {
    const nlohmann::json hdr = nlohmann::json::parse(doc);
    desc = arch_from_json(hdr.at("arch"));
    const auto lower = hdr.at("bounds").at("lower").get<std::vector<double>>();
    const auto upper = hdr.at("bounds").at("upper").get<std::vector<double>>();
    if (lower.size() != kParamCount || upper.size() != kParamCount) {
      fail(ErrorCode::kFormat, "model bounds have wrong arity");
    }
    std::copy(lower.begin(), lower.end(), info.bounds.lower.begin());
    std::copy(upper.begin(), upper.end(), info.bounds.upper.begin());
    info.meta = hdr.value("meta", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormat, "bad model header in '" + path + "': " + e.what());
  }

  info.net = Network<float>(desc);
  using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  auto& ws = info.net.weights();
  for (size_t i = 0; i < ws.size(); ++i) {
    if (!ws[i].present()) continue;
    RowMat w(ws[i].W.rows(), ws[i].W.cols());
    if (std::fread(w.data(), sizeof(float), w.size(), f.get()) !=
        static_cast<size_t>(w.size())) {
      fail(ErrorCode::kFormat,
           "model file truncated in " + layer_desc(info.net.desc(), i));
    }
    ws[i].W = w;
    if (std::fread(ws[i].b.data(), sizeof(float), ws[i].b.size(), f.get()) !=
        static_cast<size_t>(ws[i].b.size())) {
      fail(ErrorCode::kFormat,
           "model file truncated in " + layer_desc(info.net.desc(), i) + " bias");
    }
  }
  char extra;
  if (std::fread(&extra, 1, 1, f.get()) == 1) {
    fail(ErrorCode::kFormat, "trailing data after weight blob in '" + path + "'");
  }

  if (expected_bounds) {
    for (int i = 0; i < kParamCount; ++i) {
      if (std::abs(expected_bounds->lower[i] - info.bounds.lower[i]) > 1e-12 ||
          std::abs(expected_bounds->upper[i] - info.bounds.upper[i]) > 1e-12) {
        std::ostream& out = warn ? *warn : std::cerr;
        out << "warning: model '" << path << "' bounds differ from configured bounds ("
            << param_name(i) << ": [" << info.bounds.lower[i] << "," << info.bounds.upper[i]
            << "] vs [" << expected_bounds->lower[i] << "," << expected_bounds->upper[i]
            << "])\n";
        break;
      }
    }
  }
  return info;
}

}  // namespace matfit::nn
