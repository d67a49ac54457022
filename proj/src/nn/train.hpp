#pragma once

#include <cstdint>
#include <ostream>

#include "nn/dataset.hpp"
#include "nn/network.hpp"

namespace matfit::nn {

struct TrainHyper {
  int epochs = 30;
  int batch = 64;
  AdamParams adam;   // lr 1e-3, betas (0.9, 0.999), eps 1e-8
  uint64_t seed = 1;
};

struct TrainHistory {
  std::vector<double> train_loss;  // one entry per epoch
  std::vector<double> val_loss;
};

enum class TrainTask { kEncoder, kDecoder };

// Mini-batch Adam on MSE in the normalized spaces. Deterministic from
// hp.seed (epoch shuffles and dropout masks share one generator). Progress
// is emitted to `log` as CSV lines "epoch,train_loss,val_loss". A non-finite
// loss aborts with a diagnostic. val_ds may be empty (val_loss = NaN).
TrainHistory train(Network<float>& net, const Dataset& train_ds, const Dataset& val_ds,
                   TrainTask task, const TrainHyper& hp, std::ostream* log = nullptr);

}  // namespace matfit::nn
