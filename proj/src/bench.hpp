#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "invert.hpp"
#include "pipeline.hpp"

namespace matfit {

// Benchmark harness settings. Every cell's seed is a pure function of
// (seed, row index), so any single cell can be recomputed in isolation and
// must reproduce its CSV value byte for byte.
struct BenchConfig {
  RenderConfig render;
  Bounds bounds;
  std::uint64_t seed = 1234;
  int materials = 10;  // suite (a): one target per (material, edit) pair
  long budget = 1500;  // refinement budget for suites (a) and (c)
  std::vector<long> marks = default_checkpoint_marks();
  int frames = 120;  // suite (b) sequence length
  double black_step = 0.75;
  std::vector<long> frame_budgets = {100, 300, 600};
  int c_materials = 2;  // suite (c): material subset (x 6 edits)
};

struct BenchTarget {
  std::string id;
  Image image;
};

// Deterministic material draw; aux materials supply the second image used
// by the mix/stitch edits.
ParamVector bench_material(const BenchConfig& bc, int index, bool aux = false);

// The fixed six-edit family applied to `materials` seeded base renders:
// saturate x2, grayscale, gold colorize, 50% mix with a second render, a
// stitched center patch from that render, and a masked blur on the
// top-right quadrant. Ordered material-major.
std::vector<BenchTarget> bench_targets(const BenchConfig& bc, int materials);

// Suite (a): hybrid versus random initialization at the reporting marks.
struct SuiteARow {
  std::string id;
  FitReport random_arm;
  FitReport hybrid_arm;
};
struct SuiteA {
  std::vector<long> marks;
  std::vector<SuiteARow> rows;
};
FitReport bench_cell_a(const BenchConfig& bc, const Ensemble& ens, int target_index,
                       bool hybrid_arm);
SuiteA run_suite_a(const BenchConfig& bc, const Ensemble& ens);
void write_suite_a_csv(const SuiteA& s, std::ostream& out);

// Suite (b): the black-level sequence, reinitialization on and off at each
// per-frame budget.
struct SuiteB {
  std::vector<long> budgets;
  std::vector<SequenceReport> reinit;  // parallel to budgets
  std::vector<SequenceReport> plain;
};
SequenceReport bench_cell_b(const BenchConfig& bc, const Ensemble& ens, long frame_budget,
                            bool reinit);
SuiteB run_suite_b(const BenchConfig& bc, const Ensemble& ens);
void write_suite_b_csv(const SuiteB& s, std::ostream& out);

// Suite (c): every optimizer from both initialization types.
struct SuiteCRow {
  std::string id;
  std::vector<FitReport> cells;  // method-major: optimizer x {random, ensemble}
};
struct SuiteC {
  std::vector<std::string> methods;  // "nm_random", "nm_ensemble", ...
  std::vector<SuiteCRow> rows;
};
FitReport bench_cell_c(const BenchConfig& bc, const Ensemble& ens, int target_index,
                       OptimizerKind optimizer, bool ensemble_init);
SuiteC run_suite_c(const BenchConfig& bc, const Ensemble& ens);
void write_suite_c_csv(const SuiteC& s, std::ostream& out);

}  // namespace matfit
