#pragma once

#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "image.hpp"
#include "nn/network.hpp"
#include "params.hpp"

namespace matfit {

// Ordered encoder collection. Members must agree on input resolution and
// output arity; kept loaded for the whole session.
struct Ensemble {
  std::vector<nn::Network<float>> nets;
  std::vector<std::string> labels;
  int input_side = 0;
  Bounds bounds;

  size_t size() const { return nets.size(); }
};

// Manifest: one model path per line, relative to the manifest's directory;
// blank lines and '#' comments ignored. Bounds mismatches against
// `expected` are warned about (the first mismatching model wins the warning).
Ensemble load_ensemble(const std::string& manifest_path,
                       const Bounds* expected = nullptr,
                       std::ostream* warn = nullptr);

// Box-downsample to the net's input resolution, scale to [0,1], forward,
// denormalize. The sigmoid head keeps every prediction feasible.
ParamVector predict(const nn::Network<float>& net, const Image& target,
                    const Bounds& bounds);

struct SelectionResult {
  int index = -1;              // into the combined candidate order
  ParamVector x{};
  std::vector<double> rmses;   // ensemble predictions first, extras appended
  std::vector<ParamVector> candidates;
};

using RenderFn = std::function<Image(const ParamVector&)>;

// Best-of-n selection: render every candidate with the true renderer and
// pick the argmin RMSE against the target; ties break to the lowest index.
// extra_candidates are appended after the ensemble predictions.
SelectionResult best_of_n(const Ensemble& ens, const Image& target,
                          const RenderFn& render_true,
                          const std::vector<ParamVector>& extra_candidates = {});

}  // namespace matfit
