#include "doctest.h"

#include <sstream>
#include <string>
#include <vector>

#include "bench.hpp"
#include "error.hpp"
#include "image.hpp"
#include "invert.hpp"
#include "params.hpp"
#include "render.hpp"

using namespace matfit;

namespace {

// Initialized-only encoders: bench rows only need deterministic feasible
// predictions, quality is covered by the pipeline tests.
Ensemble tiny_ensemble(const Bounds& b) {
  Ensemble e;
  e.input_side = 8;
  e.bounds = b;
  for (int i = 0; i < 2; ++i) {
    nn::ArchDescriptor d;
    d.label = "enc" + std::to_string(i);
    d.input = nn::Shape{8, 8, 3, false};
    d.layers = {nn::flatten(), nn::dense(24), nn::activation(nn::Act::kRelu),
                nn::dense(19), nn::activation(nn::Act::kSigmoid)};
    d.finalize();
    nn::Network<float> net(d);
    net.init_weights(500 + i);
    e.nets.push_back(std::move(net));
    e.labels.push_back(d.label);
  }
  return e;
}

BenchConfig tiny_bench() {
  BenchConfig bc;
  bc.render.width = 16;
  bc.render.height = 16;
  bc.bounds = default_bounds();
  bc.seed = 77;
  bc.materials = 1;
  bc.budget = 25;
  bc.marks = {5, 20};
  bc.frames = 3;
  bc.black_step = 0.5;
  bc.frame_budgets = {12, 20};
  bc.c_materials = 1;
  return bc;
}

bool same_params(const ParamVector& a, const ParamVector& b) {
  for (int i = 0; i < kParamCount; ++i) {
    if (a[i] != b[i]) return false;
  }
  return true;
}

bool same_report(const FitReport& a, const FitReport& b) {
  if (a.init_rmse != b.init_rmse || a.final_rmse != b.final_rmse) return false;
  if (a.evals != b.evals || a.chosen != b.chosen) return false;
  if (!same_params(a.x_init, b.x_init) || !same_params(a.x_final, b.x_final)) return false;
  if (a.checkpoints.size() != b.checkpoints.size()) return false;
  for (size_t k = 0; k < a.checkpoints.size(); ++k) {
    if (a.checkpoints[k].value != b.checkpoints[k].value) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("material draws are seeded and boxed") {
  const BenchConfig bc = tiny_bench();
  const ParamVector a = bench_material(bc, 0);
  const ParamVector again = bench_material(bc, 0);
  CHECK(same_params(a, again));
  CHECK(is_feasible(a, bc.bounds));

  const ParamVector other = bench_material(bc, 1);
  CHECK_FALSE(same_params(a, other));
  const ParamVector aux = bench_material(bc, 0, true);
  CHECK_FALSE(same_params(a, aux));
  CHECK(is_feasible(aux, bc.bounds));

  BenchConfig reseeded = bc;
  reseeded.seed = 78;
  CHECK_FALSE(same_params(a, bench_material(reseeded, 0)));

  CHECK_THROWS_AS(bench_material(bc, -1), Error);
}

TEST_CASE("target family is material-major and deterministic") {
  const BenchConfig bc = tiny_bench();
  const std::vector<BenchTarget> t = bench_targets(bc, 2);
  REQUIRE(t.size() == 12);
  const char* expect[6] = {"saturate", "grayscale", "colorize", "mix", "stitch", "blur"};
  for (int m = 0; m < 2; ++m) {
    for (int e = 0; e < 6; ++e) {
      const BenchTarget& tgt = t[m * 6 + e];
      CHECK(tgt.id == "m" + std::to_string(m) + "_" + expect[e]);
      CHECK(tgt.image.width == bc.render.width);
      CHECK(tgt.image.height == bc.render.height);
    }
  }
  const std::vector<BenchTarget> u = bench_targets(bc, 2);
  for (size_t i = 0; i < t.size(); ++i) {
    CHECK(rmse(t[i].image, u[i].image) == 0.0);
  }
  // The edits genuinely move the image away from the base render.
  const Image base = render(bench_material(bc, 0), bc.render);
  for (int e = 0; e < 6; ++e) CHECK(rmse(t[e].image, base) > 0.0);
}

TEST_CASE("suite (a) rows reproduce from their index alone") {
  const BenchConfig bc = tiny_bench();
  const Ensemble ens = tiny_ensemble(bc.bounds);
  const SuiteA s = run_suite_a(bc, ens);
  REQUIRE(s.rows.size() == 6);

  for (int t = 0; t < 6; ++t) {
    CHECK(same_report(s.rows[t].hybrid_arm, bench_cell_a(bc, ens, t, true)));
    CHECK(same_report(s.rows[t].random_arm, bench_cell_a(bc, ens, t, false)));
  }

  for (const SuiteARow& row : s.rows) {
    REQUIRE(row.hybrid_arm.checkpoints.size() == 2);
    CHECK(row.hybrid_arm.final_rmse <= row.hybrid_arm.init_rmse);
    CHECK(row.random_arm.final_rmse <= row.random_arm.init_rmse);
    CHECK(is_feasible(row.hybrid_arm.x_final, bc.bounds));
    CHECK(is_feasible(row.random_arm.x_final, bc.bounds));
  }
}

TEST_CASE("suite (a) csv layout") {
  const BenchConfig bc = tiny_bench();
  const Ensemble ens = tiny_ensemble(bc.bounds);
  const SuiteA s = run_suite_a(bc, ens);

  std::ostringstream out;
  write_suite_a_csv(s, out);
  std::istringstream lines(out.str());
  std::string header;
  std::getline(lines, header);
  CHECK(header == "input,random_init,nn_init,opt_5,ours_5,opt_20,ours_20");

  int rows = 0;
  std::string line;
  while (std::getline(lines, line)) {
    ++rows;
    CHECK(line.find("m0_") == 0);
    size_t commas = 0;
    for (char c : line) commas += c == ',';
    CHECK(commas == 6);  // id + 2 inits + 2 marks x 2 arms
  }
  CHECK(rows == 6);

  std::ostringstream again;
  write_suite_a_csv(run_suite_a(bc, ens), again);
  CHECK(out.str() == again.str());  // repeated runs are byte-identical
}

TEST_CASE("suite (b) sequences and csv") {
  const BenchConfig bc = tiny_bench();
  const Ensemble ens = tiny_ensemble(bc.bounds);
  const SuiteB s = run_suite_b(bc, ens);
  REQUIRE(s.budgets == std::vector<long>{12, 20});
  REQUIRE(s.reinit.size() == 2);
  REQUIRE(s.plain.size() == 2);
  for (size_t j = 0; j < 2; ++j) {
    CHECK(s.reinit[j].frames.size() == 3);
    CHECK(s.plain[j].frames.size() == 3);
    CHECK(s.reinit[j].reinit);
    CHECK_FALSE(s.plain[j].reinit);
  }

  const SequenceReport cell = bench_cell_b(bc, ens, 20, true);
  CHECK(cell.cumulative_rmse == s.reinit[1].cumulative_rmse);
  REQUIRE(cell.frames.size() == 3);
  for (size_t k = 0; k < 3; ++k) {
    CHECK(same_report(cell.frames[k], s.reinit[1].frames[k]));
  }

  std::ostringstream out;
  write_suite_b_csv(s, out);
  std::istringstream lines(out.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == "frame,reinit_12,plain_12,reinit_20,plain_20");
  std::vector<std::string> rows;
  while (std::getline(lines, line)) rows.push_back(line);
  REQUIRE(rows.size() == 4);  // 3 frames + total
  CHECK(rows[0].substr(0, 2) == "0,");
  CHECK(rows[3].substr(0, 6) == "total,");
  CHECK(rows[3].find(fmt_fixed(s.reinit[0].cumulative_rmse)) != std::string::npos);
}

TEST_CASE("suite (c) covers every optimizer from both inits") {
  BenchConfig bc = tiny_bench();
  bc.budget = 20;  // keep the 48 cells quick
  const Ensemble ens = tiny_ensemble(bc.bounds);
  const SuiteC s = run_suite_c(bc, ens);

  const std::vector<std::string> want = {"nm_random",  "nm_ensemble",  "cg_random",
                                         "cg_ensemble", "lbfgs_random", "lbfgs_ensemble",
                                         "bh_random",  "bh_ensemble"};
  CHECK(s.methods == want);
  REQUIRE(s.rows.size() == 6);
  for (const SuiteCRow& row : s.rows) REQUIRE(row.cells.size() == 8);

  // Spot-check cell re-derivation across the method grid.
  CHECK(same_report(s.rows[2].cells[0], bench_cell_c(bc, ens, 2, OptimizerKind::kNelderMead, false)));
  CHECK(same_report(s.rows[2].cells[5], bench_cell_c(bc, ens, 2, OptimizerKind::kLbfgs, true)));
  CHECK(same_report(s.rows[4].cells[7], bench_cell_c(bc, ens, 4, OptimizerKind::kBasinHopping, true)));

  std::ostringstream out;
  write_suite_c_csv(s, out);
  std::istringstream lines(out.str());
  std::string header;
  std::getline(lines, header);
  CHECK(header ==
        "input,nm_random,nm_ensemble,cg_random,cg_ensemble,lbfgs_random,lbfgs_ensemble,"
        "bh_random,bh_ensemble");
  int rows = 0;
  std::string line;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 6);

  std::ostringstream again;
  write_suite_c_csv(run_suite_c(bc, ens), again);
  CHECK(out.str() == again.str());
}
