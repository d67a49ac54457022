#include "invert.hpp"

#include <filesystem>
#include <fstream>

#include "error.hpp"
#include "nn/dataset.hpp"
#include "nn/serialize.hpp"

namespace matfit {

Ensemble load_ensemble(const std::string& manifest_path, const Bounds* expected,
                       std::ostream* warn) {
  std::ifstream in(manifest_path);
  if (!in) fail(ErrorCode::kIo, "cannot open ensemble manifest '" + manifest_path + "'");
  const auto base = std::filesystem::path(manifest_path).parent_path();

  Ensemble ens;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r')) {
      line.pop_back();
    }
    size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    const std::filesystem::path p(line.substr(start));
    const std::string full = p.is_absolute() ? p.string() : (base / p).string();

    nn::ModelInfo info = nn::load_model(full, expected, warn);
    const nn::Shape& shape = info.net.desc().input;
    if (shape.flat || shape.h != shape.w || shape.c != 3) {
      fail(ErrorCode::kFormat, "'" + full + "' is not an image-input encoder");
    }
    if (info.net.desc().output_size() != kParamCount) {
      fail(ErrorCode::kFormat, "'" + full + "' output size is not " + std::to_string(kParamCount));
    }
    if (ens.nets.empty()) {
      ens.input_side = shape.h;
      ens.bounds = info.bounds;
    } else if (shape.h != ens.input_side) {
      fail(ErrorCode::kFormat, "ensemble members disagree on input resolution");
    }
    ens.labels.push_back(info.net.desc().label);
    ens.nets.push_back(std::move(info.net));
  }
  if (ens.nets.empty()) {
    fail(ErrorCode::kFormat, "ensemble manifest '" + manifest_path + "' lists no models");
  }
  return ens;
}

ParamVector predict(const nn::Network<float>& net, const Image& target,
                    const Bounds& bounds) {
  const int side = net.desc().input.h;
  const Image small = (target.width == side && target.height == side)
                          ? target
                          : box_resample(target, side, side);
  const Eigen::VectorXf out = net.forward(nn::image_to_input(small));
  ParamVector u;
  for (int i = 0; i < kParamCount; ++i) u[i] = static_cast<double>(out[i]);
  return denormalize(u, bounds);
}

SelectionResult best_of_n(const Ensemble& ens, const Image& target,
                          const RenderFn& render_true,
                          const std::vector<ParamVector>& extra_candidates) {
  SelectionResult sel;
  sel.candidates.reserve(ens.size() + extra_candidates.size());
  for (const auto& net : ens.nets) {
    sel.candidates.push_back(predict(net, target, ens.bounds));
  }
  for (const auto& x : extra_candidates) sel.candidates.push_back(x);
  if (sel.candidates.empty()) {
    fail(ErrorCode::kInvalidArgument, "best_of_n: no candidates");
  }

  sel.rmses.reserve(sel.candidates.size());
  for (const auto& x : sel.candidates) {
    sel.rmses.push_back(rmse(render_true(x), target));
  }
  sel.index = 0;
  for (size_t i = 1; i < sel.rmses.size(); ++i) {
    if (sel.rmses[i] < sel.rmses[sel.index]) sel.index = static_cast<int>(i);
  }
  sel.x = sel.candidates[sel.index];
  return sel;
}

}  // namespace matfit
