#include "optim/objective.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"
#include "nn/dataset.hpp"

namespace matfit {

Objective::Objective(const Bounds& bounds, int dim, std::vector<long> marks)
    : bounds_(bounds), dim_(dim), marks_(std::move(marks)) {
  if (dim_ < 1 || dim_ > kParamCount) {
    fail(ErrorCode::kInvalidArgument, "objective dim must be in [1, 19]");
  }
  for (int i = 0; i < kParamCount; ++i) {
    if (!(bounds_.lower[i] < bounds_.upper[i])) {
      fail(ErrorCode::kInvalidArgument,
           "objective bounds must have positive range for '" + std::string(param_name(i)) + "'");
    }
  }
  std::sort(marks_.begin(), marks_.end());
  marks_.erase(std::unique(marks_.begin(), marks_.end()), marks_.end());
  if (!marks_.empty() && marks_.front() < 1) {
    fail(ErrorCode::kInvalidArgument, "checkpoint marks must be positive");
  }
}

double Objective::evaluate(const ParamVector& x) {
  const double gamma = barrier(x, bounds_);
  const double value = gamma > 0.0 ? gamma : raw_value(x);
  ++evals_;
  if (!has_best_ || value < best_value_) {
    has_best_ = true;
    best_value_ = value;
    best_x_ = x;
  }
  if (next_mark_ < marks_.size() && evals_ == marks_[next_mark_]) {
    checkpoints_.push_back({evals_, best_value_, best_x_});
    ++next_mark_;
  }
  return value;
}

RenderObjective::RenderObjective(Image target, const RenderConfig& cfg, const Bounds& bounds,
                                 std::vector<long> marks)
    : Objective(bounds, kParamCount, std::move(marks)), target_(std::move(target)), cfg_(cfg) {
  cfg_.validate();
  if (target_.width != cfg_.width || target_.height != cfg_.height) {
    fail(ErrorCode::kInvalidArgument, "objective target does not match render resolution");
  }
}

double RenderObjective::raw_value(const ParamVector& x) {
  return rmse(render(x, cfg_), target_);
}

SurrogateObjective::SurrogateObjective(const Image& target, const nn::Network<float>& decoder,
                                       const Bounds& bounds, std::vector<long> marks)
    : Objective(bounds, kParamCount, std::move(marks)), decoder_(&decoder) {
  const nn::ArchDescriptor& d = decoder.desc();
  if (d.input.size() != kParamCount) {
    fail(ErrorCode::kInvalidArgument, "surrogate decoder must take 19 inputs");
  }
  const int out = d.output_size();
  side_ = static_cast<int>(std::lround(std::sqrt(out / 3.0)));
  if (3 * side_ * side_ != out) {
    fail(ErrorCode::kInvalidArgument, "surrogate decoder output is not a square RGB image");
  }
  const Image small = (target.width == side_ && target.height == side_)
                          ? target
                          : box_resample(target, side_, side_);
  target01_ = nn::image_to_input(small).cast<double>();
}

double SurrogateObjective::raw_value(const ParamVector& x) {
  const ParamVector u = normalize(x, bounds());
  Eigen::VectorXf in(kParamCount);
  for (int i = 0; i < kParamCount; ++i) in[i] = static_cast<float>(u[i]);
  const Eigen::VectorXd out = decoder_->forward(in).cast<double>();
  return 255.0 * std::sqrt((out - target01_).squaredNorm() / out.size());
}

FunctionObjective::FunctionObjective(std::function<double(const ParamVector&)> fn,
                                     const Bounds& bounds, int dim, std::vector<long> marks)
    : Objective(bounds, dim, std::move(marks)), fn_(std::move(fn)) {
  if (!fn_) fail(ErrorCode::kInvalidArgument, "function objective needs a function");
}

double FunctionObjective::raw_value(const ParamVector& x) { return fn_(x); }

}  // namespace matfit
