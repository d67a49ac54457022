#include "nn/train.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "rng.hpp"

namespace matfit::nn {

namespace {

const Eigen::MatrixXf& inputs_of(const Dataset& ds, TrainTask task) {
  return task == TrainTask::kEncoder ? ds.images : ds.params;
}

const Eigen::MatrixXf& targets_of(const Dataset& ds, TrainTask task) {
  return task == TrainTask::kEncoder ? ds.params : ds.images;
}

double eval_loss(const Network<float>& net, const Eigen::MatrixXf& X,
                 const Eigen::MatrixXf& Y) {
  double acc = 0.0;
  for (Eigen::Index s = 0; s < X.cols(); ++s) {
    const Eigen::VectorXf out = net.forward(X.col(s));
    acc += mse<float>(out, Y.col(s));
  }
  return acc / static_cast<double>(X.cols());
}

}  // namespace

TrainHistory train(Network<float>& net, const Dataset& train_ds, const Dataset& val_ds,
                   TrainTask task, const TrainHyper& hp, std::ostream* log) {
  const Eigen::MatrixXf& X = inputs_of(train_ds, task);
  const Eigen::MatrixXf& Y = targets_of(train_ds, task);
  if (X.cols() == 0) fail(ErrorCode::kInvalidArgument, "train: empty dataset");
  if (X.rows() != net.desc().input.size() || Y.rows() != net.desc().output_size()) {
    fail(ErrorCode::kInvalidArgument, "train: dataset shapes do not match the network");
  }
  if (hp.batch < 1 || hp.epochs < 0) {
    fail(ErrorCode::kInvalidArgument, "train: bad hyperparameters");
  }

  Rng rng(hp.seed);
  AdamState<float> adam(net);
  GradBuffers<float> grads = net.make_grads();
  ForwardCache<float> cache;

  std::vector<int> order(X.cols());
  std::iota(order.begin(), order.end(), 0);

  TrainHistory hist;
  for (int epoch = 0; epoch < hp.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (size_t start = 0; start < order.size(); start += hp.batch) {
      const size_t bs = std::min<size_t>(hp.batch, order.size() - start);
      grads.zero();
      double batch_loss = 0.0;
      for (size_t k = 0; k < bs; ++k) {
        const int s = order[start + k];
        const Eigen::VectorXf out = net.forward(X.col(s), cache, true, &rng);
        batch_loss += mse<float>(out, Y.col(s));
        Eigen::VectorXf dout =
            (out - Y.col(s)) *
            static_cast<float>(2.0 / (static_cast<double>(out.size()) * bs));
        net.backward(cache, std::move(dout), grads);
      }
      batch_loss /= static_cast<double>(bs);
      if (!std::isfinite(batch_loss)) {
        fail(ErrorCode::kNumeric,
             "training diverged (non-finite loss) at epoch " + std::to_string(epoch));
      }
      adam.step(net, grads, hp.adam);
      epoch_loss += batch_loss * static_cast<double>(bs);
    }
    epoch_loss /= static_cast<double>(order.size());

    const double val = val_ds.count() > 0
                           ? eval_loss(net, inputs_of(val_ds, task), targets_of(val_ds, task))
                           : std::numeric_limits<double>::quiet_NaN();
    hist.train_loss.push_back(epoch_loss);
    hist.val_loss.push_back(val);
    if (log) {
      (*log) << epoch << "," << epoch_loss << "," << val << "\n";
      log->flush();
    }
  }
  return hist;
}

}  // namespace matfit::nn
