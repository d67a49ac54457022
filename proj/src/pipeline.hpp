#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "invert.hpp"
#include "optim/objective.hpp"
#include "optim/optimizers.hpp"

namespace matfit {

enum class OptimizerKind { kNelderMead, kCg, kLbfgs, kBasinHopping };
enum class EvaluatorKind { kTrue, kSurrogate };

OptimizerKind optimizer_from_name(const std::string& name);  // nm|cg|lbfgs|bh
const char* optimizer_name(OptimizerKind k);

struct FitOptions {
  long budget = 1500;
  OptimizerKind optimizer = OptimizerKind::kNelderMead;
  EvaluatorKind evaluator = EvaluatorKind::kTrue;
  const nn::Network<float>* decoder = nullptr;  // required for the surrogate path
  double spread_tol = 1e-6;
  long bh_local_evals = 200;
  double bh_temperature = 1.0;
  double bh_step_scale = 0.1;
  std::uint64_t seed = 0;  // basin-hopping hops / random initialization
  std::vector<long> marks = default_checkpoint_marks();
  std::string target_id;
};

// Everything a benchmark table column needs. Checkpoints are scored with
// the true renderer at full resolution no matter what drove the refinement,
// and run as the best-so-far (never increasing, starting from the guess).
struct FitReport {
  std::string target_id;
  std::vector<double> candidate_rmses;  // initial RMSE per candidate
  int chosen = -1;
  ParamVector x_init{};
  double init_rmse = 0.0;
  std::vector<Checkpoint> checkpoints;  // value = true RMSE, x = best-so-far
  ParamVector x_final{};
  double final_rmse = 0.0;
  long evals = 0;
  double wall_seconds = 0.0;
};

struct SequenceReport {
  std::vector<FitReport> frames;
  bool reinit = false;
  double cumulative_rmse = 0.0;  // sum of per-frame final RMSEs
};

// Guess-then-refine: score every ensemble prediction (plus any extras) with
// the true renderer, start the optimizer at the argmin, refine under the
// barrier objective, re-score with the true renderer. The final result is
// never worse than the chosen guess.
FitReport hybrid_fit(const Image& target, const Ensemble& ens, const RenderConfig& cfg,
                     const FitOptions& opt,
                     const std::vector<ParamVector>& extra_candidates = {});

// Baseline arm: a seeded uniform draw over the box instead of predictions,
// then the identical refinement path.
FitReport random_init_fit(const Image& target, const RenderConfig& cfg, const Bounds& bounds,
                          const FitOptions& opt);

// Ordered frames. With reinit, each frame after the first adds the previous
// frame's fitted parameters to the candidate pool (n+1 candidates);
// without, frames are independent fits.
SequenceReport fit_sequence(const std::vector<Image>& targets, const Ensemble& ens,
                            const RenderConfig& cfg, const FitOptions& opt, bool reinit);

// Reports as CSV (one row per checkpoint / per frame) and a terse
// human-readable block; fitted parameters as a plain 19-line text vector.
void write_fit_csv(const FitReport& r, std::ostream& out);
void write_fit_summary(const FitReport& r, std::ostream& out);
void write_sequence_csv(const SequenceReport& r, std::ostream& out);
void write_sequence_summary(const SequenceReport& r, std::ostream& out);
void write_params_text(const ParamVector& x, std::ostream& out);
ParamVector read_params_text(std::istream& in);

// Locale-independent fixed-point cell formatting shared by every CSV writer
// so identical values always serialize to identical bytes.
std::string fmt_fixed(double v, int digits = 6);

}  // namespace matfit
