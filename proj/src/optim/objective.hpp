#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "image.hpp"
#include "nn/network.hpp"
#include "params.hpp"
#include "render.hpp"

namespace matfit {

// Snapshot taken when the evaluation counter hits a reporting mark. Table
// columns re-score `x` with the true renderer, so the point is kept too.
struct Checkpoint {
  long evals = 0;
  double value = 0.0;
  ParamVector x{};
};

inline std::vector<long> default_checkpoint_marks() { return {50, 300, 1500}; }

// Barrier-augmented cost: evaluate() = raw cost + barrier, with the barrier
// short-circuiting the evaluator entirely (infeasible points never render).
// The counter moves by exactly 1 per call and best-seen never regresses.
// Single consumer per instance; independent fits use independent objectives.
class Objective {
 public:
  Objective(const Bounds& bounds, int dim, std::vector<long> marks);
  virtual ~Objective() = default;

  double evaluate(const ParamVector& x);

  const Bounds& bounds() const { return bounds_; }
  int dim() const { return dim_; }
  long evals() const { return evals_; }
  bool has_best() const { return has_best_; }
  double best_value() const { return best_value_; }
  const ParamVector& best_x() const { return best_x_; }
  const std::vector<Checkpoint>& checkpoints() const { return checkpoints_; }

 protected:
  virtual double raw_value(const ParamVector& x) = 0;

 private:
  Bounds bounds_;
  int dim_;
  std::vector<long> marks_;
  size_t next_mark_ = 0;
  long evals_ = 0;
  bool has_best_ = false;
  double best_value_ = 0.0;
  ParamVector best_x_{};
  std::vector<Checkpoint> checkpoints_;
};

// True-renderer cost: rmse(render(x), target).
class RenderObjective : public Objective {
 public:
  RenderObjective(Image target, const RenderConfig& cfg, const Bounds& bounds,
                  std::vector<long> marks = default_checkpoint_marks());

 protected:
  double raw_value(const ParamVector& x) override;

 private:
  Image target_;
  RenderConfig cfg_;
};

// Surrogate cost: the decoder net stands in for the renderer. The target is
// box-downsampled once to the decoder's output resolution; values stay on
// the 0..255 RMSE scale so barrier and tolerance behavior match the true
// objective. Reported results must be re-scored with the true renderer.
class SurrogateObjective : public Objective {
 public:
  SurrogateObjective(const Image& target, const nn::Network<float>& decoder,
                     const Bounds& bounds,
                     std::vector<long> marks = default_checkpoint_marks());

  int side() const { return side_; }

 protected:
  double raw_value(const ParamVector& x) override;

 private:
  const nn::Network<float>* decoder_;
  int side_ = 0;
  Eigen::VectorXd target01_;
};

// Raw scalar function under the same barrier/counter plumbing; `dim` lets
// low-dimensional test problems run the optimizers unchanged (components
// at and above dim are never moved).
class FunctionObjective : public Objective {
 public:
  FunctionObjective(std::function<double(const ParamVector&)> fn, const Bounds& bounds,
                    int dim = kParamCount,
                    std::vector<long> marks = default_checkpoint_marks());

 protected:
  double raw_value(const ParamVector& x) override;

 private:
  std::function<double(const ParamVector&)> fn_;
};

}  // namespace matfit
