#include "pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <memory>
#include <ostream>

#include "error.hpp"
#include "rng.hpp"

namespace matfit {

OptimizerKind optimizer_from_name(const std::string& name) {
  if (name == "nm") return OptimizerKind::kNelderMead;
  if (name == "cg") return OptimizerKind::kCg;
  if (name == "lbfgs") return OptimizerKind::kLbfgs;
  if (name == "bh") return OptimizerKind::kBasinHopping;
  fail(ErrorCode::kInvalidArgument,
       "unknown optimizer '" + name + "' (expected nm, cg, lbfgs, or bh)");
}

const char* optimizer_name(OptimizerKind k) {
  switch (k) {
    case OptimizerKind::kNelderMead: return "nm";
    case OptimizerKind::kCg: return "cg";
    case OptimizerKind::kLbfgs: return "lbfgs";
    default: return "bh";
  }
}

namespace {

OptResult run_optimizer(Objective& obj, const ParamVector& x_init, const FitOptions& opt) {
  switch (opt.optimizer) {
    case OptimizerKind::kNelderMead:
      return nelder_mead(obj, x_init, opt.budget, opt.spread_tol);
    case OptimizerKind::kCg:
      return cg_fd(obj, x_init, opt.budget);
    case OptimizerKind::kLbfgs:
      return lbfgs_fd(obj, x_init, opt.budget);
    default:
      return basin_hopping(obj, x_init, opt.budget, opt.bh_local_evals, opt.bh_temperature,
                           opt.bh_step_scale, opt.seed, opt.spread_tol);
  }
}

// Refinement shared by both arms. `report` arrives with the candidate
// bookkeeping filled in; this adds checkpoints, the final point, and timing.
void refine(FitReport& report, const Image& target, const RenderConfig& cfg,
            const Bounds& bounds, const FitOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  if (opt.budget < 1) fail(ErrorCode::kInvalidArgument, "fit budget must be at least 1");
  if (target.width != cfg.width || target.height != cfg.height) {
    fail(ErrorCode::kInvalidArgument, "fit target does not match render resolution");
  }

  std::unique_ptr<Objective> obj;
  if (opt.evaluator == EvaluatorKind::kSurrogate) {
    if (opt.decoder == nullptr) {
      fail(ErrorCode::kInvalidArgument, "surrogate fitting needs a decoder model");
    }
    obj = std::make_unique<SurrogateObjective>(target, *opt.decoder, bounds, opt.marks);
  } else {
    obj = std::make_unique<RenderObjective>(target, cfg, bounds, opt.marks);
  }

  const OptResult opt_res = run_optimizer(*obj, report.x_init, opt);
  report.evals = opt_res.evals;

  // Re-score milestones with the true renderer: the guess at eval 0, each
  // recorded mark, and the optimizer's own best at the end of its run.
  auto true_rmse = [&](const ParamVector& x) { return rmse(render(x, cfg), target); };
  struct Milestone {
    long evals;
    ParamVector x;
  };
  std::vector<Milestone> stones;
  stones.push_back({0, report.x_init});
  for (const Checkpoint& c : opt_res.trace) stones.push_back({c.evals, c.x});
  stones.push_back({opt_res.evals, opt_res.x});
  std::stable_sort(stones.begin(), stones.end(),
                   [](const Milestone& a, const Milestone& b) { return a.evals < b.evals; });

  double running = report.init_rmse;
  ParamVector running_x = report.x_init;
  size_t next = 0;
  report.checkpoints.clear();
  for (long mark : opt.marks) {
    while (next < stones.size() && stones[next].evals <= mark) {
      const double r = true_rmse(stones[next].x);
      if (r < running) {
        running = r;
        running_x = stones[next].x;
      }
      ++next;
    }
    report.checkpoints.push_back({mark, running, running_x});
  }
  for (; next < stones.size(); ++next) {
    const double r = true_rmse(stones[next].x);
    if (r < running) {
      running = r;
      running_x = stones[next].x;
    }
  }
  report.x_final = running_x;
  report.final_rmse = running;
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

FitReport hybrid_fit(const Image& target, const Ensemble& ens, const RenderConfig& cfg,
                     const FitOptions& opt, const std::vector<ParamVector>& extra_candidates) {
  FitReport report;
  report.target_id = opt.target_id;
  auto phi = [&](const ParamVector& x) { return render(x, cfg); };
  const SelectionResult sel = best_of_n(ens, target, phi, extra_candidates);
  report.candidate_rmses = sel.rmses;
  report.chosen = sel.index;
  report.x_init = sel.x;
  report.init_rmse = sel.rmses[sel.index];
  refine(report, target, cfg, ens.bounds, opt);
  return report;
}

FitReport random_init_fit(const Image& target, const RenderConfig& cfg, const Bounds& bounds,
                          const FitOptions& opt) {
  FitReport report;
  report.target_id = opt.target_id;
  Rng rng(opt.seed);
  ParamVector x;
  for (int i = 0; i < kParamCount; ++i) x[i] = rng.uniform(bounds.lower[i], bounds.upper[i]);
  report.x_init = x;
  report.init_rmse = rmse(render(x, cfg), target);
  report.candidate_rmses = {report.init_rmse};
  report.chosen = 0;
  refine(report, target, cfg, bounds, opt);
  return report;
}

SequenceReport fit_sequence(const std::vector<Image>& targets, const Ensemble& ens,
                            const RenderConfig& cfg, const FitOptions& opt, bool reinit) {
  if (targets.empty()) fail(ErrorCode::kInvalidArgument, "sequence needs at least one frame");
  SequenceReport rep;
  rep.reinit = reinit;
  ParamVector prev{};
  for (size_t k = 0; k < targets.size(); ++k) {
    FitOptions frame_opt = opt;
    const std::string base = opt.target_id.empty() ? "frame" : opt.target_id;
    frame_opt.target_id = base + "_" + std::to_string(k);
    std::vector<ParamVector> extras;
    if (reinit && k > 0) extras.push_back(prev);
    FitReport fr = hybrid_fit(targets[k], ens, cfg, frame_opt, extras);
    prev = fr.x_final;
    rep.cumulative_rmse += fr.final_rmse;
    rep.frames.push_back(std::move(fr));
  }
  return rep;
}

std::string fmt_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

void write_fit_csv(const FitReport& r, std::ostream& out) {
  out << "target,stage,evals,rmse\n";
  out << r.target_id << ",init,0," << fmt_fixed(r.init_rmse) << "\n";
  for (const Checkpoint& c : r.checkpoints) {
    out << r.target_id << ",checkpoint," << c.evals << "," << fmt_fixed(c.value) << "\n";
  }
  out << r.target_id << ",final," << r.evals << "," << fmt_fixed(r.final_rmse) << "\n";
}

void write_fit_summary(const FitReport& r, std::ostream& out) {
  out << "target: " << (r.target_id.empty() ? "(unnamed)" : r.target_id) << "\n";
  out << "candidates: " << r.candidate_rmses.size() << " (chosen " << r.chosen
      << ", initial rmse " << fmt_fixed(r.init_rmse) << ")\n";
  out << "refinement: " << r.evals << " evals, " << fmt_fixed(r.wall_seconds, 3) << " s\n";
  out << "rmse: " << fmt_fixed(r.init_rmse) << " -> " << fmt_fixed(r.final_rmse) << "\n";
  out << "checkpoints:";
  for (const Checkpoint& c : r.checkpoints) {
    out << " " << c.evals << ":" << fmt_fixed(c.value);
  }
  out << "\n";
}

void write_sequence_csv(const SequenceReport& r, std::ostream& out) {
  out << "frame,target,chosen,init_rmse,final_rmse,evals\n";
  for (size_t k = 0; k < r.frames.size(); ++k) {
    const FitReport& f = r.frames[k];
    out << k << "," << f.target_id << "," << f.chosen << "," << fmt_fixed(f.init_rmse) << ","
        << fmt_fixed(f.final_rmse) << "," << f.evals << "\n";
  }
}

void write_sequence_summary(const SequenceReport& r, std::ostream& out) {
  out << "frames: " << r.frames.size() << (r.reinit ? " (reinit)" : " (independent)") << "\n";
  out << "cumulative rmse: " << fmt_fixed(r.cumulative_rmse) << "\n";
  double worst = 0.0;
  for (const FitReport& f : r.frames) worst = std::max(worst, f.final_rmse);
  out << "worst frame rmse: " << fmt_fixed(worst) << "\n";
}

void write_params_text(const ParamVector& x, std::ostream& out) {
  char buf[64];
  for (int i = 0; i < kParamCount; ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", x[i]);
    out << buf << "\n";
  }
}

ParamVector read_params_text(std::istream& in) {
  ParamVector x{};
  for (int i = 0; i < kParamCount; ++i) {
    if (!(in >> x[i])) {
      fail(ErrorCode::kFormat, "parameter vector file must hold 19 numbers");
    }
  }
  double extra;
  if (in >> extra) {
    fail(ErrorCode::kFormat, "parameter vector file must hold exactly 19 numbers");
  }
  return x;
}

}  // namespace matfit
