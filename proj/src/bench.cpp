#include "bench.hpp"

#include <ostream>

#include "error.hpp"
#include "rng.hpp"

namespace matfit {

namespace {

// Seed offsets keep every stochastic draw a pure function of the config
// seed and a row index, never of loop order.
constexpr std::uint64_t kMaterialSalt = 101;
constexpr std::uint64_t kAuxMaterialSalt = 50101;
constexpr std::uint64_t kRandomArmSalt = 90001;
constexpr std::uint64_t kHopSalt = 70001;

const char* const kEditNames[6] = {"saturate", "grayscale", "colorize",
                                   "mix",      "stitch",    "blur"};

Image center_crop(const Image& src, int w, int h) {
  Image out = Image::create(w, h);
  const int x0 = (src.width - w) / 2;
  const int y0 = (src.height - h) / 2;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = src.at(x0 + x, y0 + y, c);
    }
  }
  return out;
}

Image quadrant_mask(int w, int h) {  // white top-right quadrant
  Image m = Image::create(w, h, 0.0);
  for (int y = 0; y < h / 2; ++y) {
    for (int x = w / 2; x < w; ++x) {
      for (int c = 0; c < 3; ++c) m.at(x, y, c) = 255.0;
    }
  }
  return m;
}

}  // namespace

ParamVector bench_material(const BenchConfig& bc, int index, bool aux) {
  if (index < 0) fail(ErrorCode::kInvalidArgument, "bench material index must be >= 0");
  Rng rng(bc.seed + (aux ? kAuxMaterialSalt : kMaterialSalt) + static_cast<std::uint64_t>(index));
  ParamVector x;
  for (int i = 0; i < kParamCount; ++i) x[i] = rng.uniform(bc.bounds.lower[i], bc.bounds.upper[i]);
  return x;
}

std::vector<BenchTarget> bench_targets(const BenchConfig& bc, int materials) {
  std::vector<BenchTarget> targets;
  targets.reserve(static_cast<size_t>(materials) * 6);
  const double gold[3] = {1.0, 215.0 / 255.0, 0.0};
  for (int m = 0; m < materials; ++m) {
    const Image base = render(bench_material(bc, m), bc.render);
    const Image second = render(bench_material(bc, m, true), bc.render);
    const std::string prefix = "m" + std::to_string(m) + "_";

    targets.push_back({prefix + kEditNames[0], saturate(base, 2.0)});
    targets.push_back({prefix + kEditNames[1], grayscale(base)});
    targets.push_back({prefix + kEditNames[2], colorize(base, gold, 1.0)});
    targets.push_back({prefix + kEditNames[3], mix_images(base, second, 0.5)});

    const int pw = bc.render.width / 2;
    const int ph = bc.render.height / 2;
    const RectRegion region{(bc.render.width - pw) / 2, (bc.render.height - ph) / 2, pw, ph};
    targets.push_back({prefix + kEditNames[4], stitch(base, center_crop(second, pw, ph), region)});

    const Image mask = quadrant_mask(bc.render.width, bc.render.height);
    targets.push_back({prefix + kEditNames[5], gaussian_blur(base, 2.0, &mask)});
  }
  return targets;
}

FitReport bench_cell_a(const BenchConfig& bc, const Ensemble& ens, int target_index,
                       bool hybrid_arm) {
  const int material = target_index / 6;
  std::vector<BenchTarget> targets = bench_targets(bc, material + 1);
  const BenchTarget& tgt = targets.at(static_cast<size_t>(target_index));

  FitOptions opt;
  opt.budget = bc.budget;
  opt.marks = bc.marks;
  opt.target_id = tgt.id;
  if (hybrid_arm) return hybrid_fit(tgt.image, ens, bc.render, opt);
  opt.seed = bc.seed + kRandomArmSalt + static_cast<std::uint64_t>(target_index);
  return random_init_fit(tgt.image, bc.render, bc.bounds, opt);
}

SuiteA run_suite_a(const BenchConfig& bc, const Ensemble& ens) {
  SuiteA s;
  s.marks = bc.marks;
  const std::vector<BenchTarget> targets = bench_targets(bc, bc.materials);
  for (size_t t = 0; t < targets.size(); ++t) {
    SuiteARow row;
    row.id = targets[t].id;

    FitOptions opt;
    opt.budget = bc.budget;
    opt.marks = bc.marks;
    opt.target_id = row.id;
    row.hybrid_arm = hybrid_fit(targets[t].image, ens, bc.render, opt);
    opt.seed = bc.seed + kRandomArmSalt + t;
    row.random_arm = random_init_fit(targets[t].image, bc.render, bc.bounds, opt);
    s.rows.push_back(std::move(row));
  }
  return s;
}

void write_suite_a_csv(const SuiteA& s, std::ostream& out) {
  out << "input,random_init,nn_init";
  for (long m : s.marks) out << ",opt_" << m << ",ours_" << m;
  out << "\n";
  for (const SuiteARow& row : s.rows) {
    out << row.id << "," << fmt_fixed(row.random_arm.init_rmse) << ","
        << fmt_fixed(row.hybrid_arm.init_rmse);
    for (size_t k = 0; k < s.marks.size(); ++k) {
      out << "," << fmt_fixed(row.random_arm.checkpoints[k].value) << ","
          << fmt_fixed(row.hybrid_arm.checkpoints[k].value);
    }
    out << "\n";
  }
}

SequenceReport bench_cell_b(const BenchConfig& bc, const Ensemble& ens, long frame_budget,
                            bool reinit) {
  const Image base = render(bench_material(bc, 0), bc.render);
  std::vector<Image> frames;
  frames.reserve(static_cast<size_t>(bc.frames));
  for (int k = 0; k < bc.frames; ++k) frames.push_back(black_level(base, bc.black_step * k));

  FitOptions opt;
  opt.budget = frame_budget;
  opt.target_id = "seq";
  return fit_sequence(frames, ens, bc.render, opt, reinit);
}

SuiteB run_suite_b(const BenchConfig& bc, const Ensemble& ens) {
  SuiteB s;
  s.budgets = bc.frame_budgets;
  for (long budget : bc.frame_budgets) {
    s.reinit.push_back(bench_cell_b(bc, ens, budget, true));
    s.plain.push_back(bench_cell_b(bc, ens, budget, false));
  }
  return s;
}

void write_suite_b_csv(const SuiteB& s, std::ostream& out) {
  out << "frame";
  for (long b : s.budgets) out << ",reinit_" << b << ",plain_" << b;
  out << "\n";
  const size_t frames = s.reinit.empty() ? 0 : s.reinit.front().frames.size();
  for (size_t k = 0; k < frames; ++k) {
    out << k;
    for (size_t j = 0; j < s.budgets.size(); ++j) {
      out << "," << fmt_fixed(s.reinit[j].frames[k].final_rmse) << ","
          << fmt_fixed(s.plain[j].frames[k].final_rmse);
    }
    out << "\n";
  }
  out << "total";
  for (size_t j = 0; j < s.budgets.size(); ++j) {
    out << "," << fmt_fixed(s.reinit[j].cumulative_rmse) << ","
        << fmt_fixed(s.plain[j].cumulative_rmse);
  }
  out << "\n";
}

FitReport bench_cell_c(const BenchConfig& bc, const Ensemble& ens, int target_index,
                       OptimizerKind optimizer, bool ensemble_init) {
  const int material = target_index / 6;
  std::vector<BenchTarget> targets = bench_targets(bc, material + 1);
  const BenchTarget& tgt = targets.at(static_cast<size_t>(target_index));

  FitOptions opt;
  opt.budget = bc.budget;
  opt.marks = bc.marks;
  opt.optimizer = optimizer;
  opt.target_id = tgt.id;
  opt.seed = bc.seed + kHopSalt + static_cast<std::uint64_t>(target_index);
  if (ensemble_init) return hybrid_fit(tgt.image, ens, bc.render, opt);
  opt.seed = bc.seed + kRandomArmSalt + static_cast<std::uint64_t>(target_index);
  return random_init_fit(tgt.image, bc.render, bc.bounds, opt);
}

SuiteC run_suite_c(const BenchConfig& bc, const Ensemble& ens) {
  static const OptimizerKind kOrder[4] = {OptimizerKind::kNelderMead, OptimizerKind::kCg,
                                          OptimizerKind::kLbfgs, OptimizerKind::kBasinHopping};
  SuiteC s;
  for (OptimizerKind k : kOrder) {
    s.methods.push_back(std::string(optimizer_name(k)) + "_random");
    s.methods.push_back(std::string(optimizer_name(k)) + "_ensemble");
  }
  const std::vector<BenchTarget> targets = bench_targets(bc, bc.c_materials);
  for (size_t t = 0; t < targets.size(); ++t) {
    SuiteCRow row;
    row.id = targets[t].id;
    for (OptimizerKind k : kOrder) {
      row.cells.push_back(bench_cell_c(bc, ens, static_cast<int>(t), k, false));
      row.cells.push_back(bench_cell_c(bc, ens, static_cast<int>(t), k, true));
    }
    s.rows.push_back(std::move(row));
  }
  return s;
}

void write_suite_c_csv(const SuiteC& s, std::ostream& out) {
  out << "input";
  for (const std::string& m : s.methods) out << "," << m;
  out << "\n";
  for (const SuiteCRow& row : s.rows) {
    out << row.id;
    for (const FitReport& cell : row.cells) out << "," << fmt_fixed(cell.final_rmse);
    out << "\n";
  }
}

}  // namespace matfit
