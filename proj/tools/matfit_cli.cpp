// Command-line front end. Everything routes through the shared-library C
// API; this file only parses flags, shuffles files, and reports errors.
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "matfit.h"

namespace fs = std::filesystem;

namespace {

int fail_cli(const std::string& what) {
  std::cerr << "error: " << what;
  const char* detail = mf_last_error();
  if (detail && *detail) std::cerr << ": " << detail;
  std::cerr << "\n";
  return 1;
}

// Removes everything registered unless commit() ran, so a failed run never
// leaves partial outputs.
class Outputs {
 public:
  ~Outputs() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& f : files_) fs::remove(f, ec);
  }
  fs::path claim(const fs::path& p) {
    files_.push_back(p);
    return p;
  }
  void commit() { committed_ = true; }

 private:
  std::vector<fs::path> files_;
  bool committed_ = false;
};

struct ConfigDeleter {
  void operator()(mf_config* c) const { mf_config_free(c); }
};
struct ImageDeleter {
  void operator()(mf_image* i) const { mf_image_free(i); }
};
struct EnsembleDeleter {
  void operator()(mf_ensemble* e) const { mf_ensemble_free(e); }
};
struct ModelDeleter {
  void operator()(mf_model* m) const { mf_model_free(m); }
};
struct ReportDeleter {
  void operator()(mf_report* r) const { mf_report_free(r); }
};
struct SeqDeleter {
  void operator()(mf_seq_report* r) const { mf_seq_report_free(r); }
};

using ConfigPtr = std::unique_ptr<mf_config, ConfigDeleter>;
using ImagePtr = std::unique_ptr<mf_image, ImageDeleter>;
using EnsemblePtr = std::unique_ptr<mf_ensemble, EnsembleDeleter>;
using ModelPtr = std::unique_ptr<mf_model, ModelDeleter>;
using ReportPtr = std::unique_ptr<mf_report, ReportDeleter>;
using SeqPtr = std::unique_ptr<mf_seq_report, SeqDeleter>;

bool write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) return false;
  out << text;
  out.flush();
  return out.good();
}

bool parse_bool(const std::string& v, bool fallback) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  return fallback;
}

std::string cfg_str(const mf_config* cfg, const char* key, const char* fallback) {
  return mf_config_get(cfg, key, fallback);
}

// Options shared by fit and fit-seq; CLI values override config values and
// the merged result lands back in the config so the echo stays honest.
struct FitFlags {
  long budget = -1;
  std::string optimizer;
  std::uint64_t seed = 0;
  bool has_seed = false;
  bool surrogate = false;
  int candidate = -2;
};

void add_fit_flags(CLI::App* cmd, FitFlags& f) {
  cmd->add_option("--budget", f.budget, "objective evaluation budget");
  cmd->add_option("--optimizer", f.optimizer, "nm|cg|lbfgs|bh");
  cmd->add_option("--seed", f.seed, "seed for stochastic stages");
  cmd->add_flag("--surrogate", f.surrogate, "refine through the decoder surrogate");
  cmd->add_option("--candidate", f.candidate, "restrict to one ensemble member");
}

void merge_fit_flags(mf_config* cfg, const FitFlags& f, CLI::App* cmd) {
  if (f.budget >= 0) mf_config_set(cfg, "fit.budget", std::to_string(f.budget).c_str());
  if (!f.optimizer.empty()) mf_config_set(cfg, "fit.optimizer", f.optimizer.c_str());
  if (cmd->count("--seed")) mf_config_set(cfg, "fit.seed", std::to_string(f.seed).c_str());
  if (f.surrogate) mf_config_set(cfg, "fit.use_surrogate", "1");
  if (f.candidate != -2)
    mf_config_set(cfg, "fit.candidate", std::to_string(f.candidate).c_str());
}

// Reads the merged fit options out of the config; loads the decoder when
// the surrogate path is on. Returns false (with a message) on failure.
bool gather_fit_options(const mf_config* cfg, mf_fit_options& fo, ModelPtr& decoder,
                        std::string& err) {
  fo.budget = std::atol(cfg_str(cfg, "fit.budget", "1500").c_str());
  fo.seed = std::strtoull(cfg_str(cfg, "fit.seed", "0").c_str(), nullptr, 10);
  fo.spread_tol = std::atof(cfg_str(cfg, "fit.spread_tol", "1e-6").c_str());
  fo.bh_local_evals = std::atol(cfg_str(cfg, "fit.bh_local_evals", "200").c_str());
  fo.bh_temperature = std::atof(cfg_str(cfg, "fit.bh_temperature", "1.0").c_str());
  fo.bh_step_scale = std::atof(cfg_str(cfg, "fit.bh_step_scale", "0.1").c_str());
  fo.candidate = std::atoi(cfg_str(cfg, "fit.candidate", "-1").c_str());
  fo.sphere_radius = std::atof(cfg_str(cfg, "render.sphere_radius", "0").c_str());
  fo.use_surrogate = parse_bool(cfg_str(cfg, "fit.use_surrogate", "0"), false);
  if (fo.use_surrogate) {
    char* path = nullptr;
    if (mf_config_get_path(cfg, "surrogate.model", &path) != MF_OK) {
      err = "surrogate.model is required with --surrogate";
      return false;
    }
    mf_model* m = nullptr;
    const mf_status st = mf_model_load(path, &m);
    mf_string_free(path);
    if (st != MF_OK) {
      err = "cannot load surrogate model";
      return false;
    }
    decoder.reset(m);
    fo.decoder = m;
  }
  return true;
}

// `optimizer` is validated inside mf_fit; keep the string storage alive.
struct OptimizerName {
  std::string value;
};

bool load_ensemble_from(const mf_config* cfg, EnsemblePtr& ens, std::string& err) {
  char* manifest = nullptr;
  if (mf_config_get_path(cfg, "ensemble.manifest", &manifest) != MF_OK) {
    err = "ensemble.manifest is required";
    return false;
  }
  mf_ensemble* e = nullptr;
  const mf_status st = mf_ensemble_load(manifest, &e);
  mf_string_free(manifest);
  if (st != MF_OK) {
    err = "cannot load ensemble";
    return false;
  }
  ens.reset(e);
  return true;
}

bool write_echo(const mf_config* cfg, Outputs& outs, const fs::path& dir, std::string& err) {
  char* echo = nullptr;
  if (mf_config_echo_alloc(cfg, &echo) != MF_OK) {
    err = "cannot format config echo";
    return false;
  }
  const bool ok = write_file(outs.claim(dir / "config_used.txt"), echo);
  mf_string_free(echo);
  if (!ok) err = "cannot write config_used.txt";
  return ok;
}

int run_render(const std::string& params_path, const std::string& out_path,
               const std::string& config_path) {
  int width = 64, height = 64;
  double radius = 0.0;
  if (!config_path.empty()) {
    mf_config* cfg = nullptr;
    if (mf_config_load(config_path.c_str(), &cfg) != MF_OK) return fail_cli("cannot load config");
    ConfigPtr guard(cfg);
    width = std::atoi(cfg_str(cfg, "render.width", "64").c_str());
    height = std::atoi(cfg_str(cfg, "render.height", "64").c_str());
    radius = std::atof(cfg_str(cfg, "render.sphere_radius", "0").c_str());
  }
  double x[MF_PARAM_COUNT];
  if (mf_params_read_text(params_path.c_str(), x) != MF_OK)
    return fail_cli("cannot read parameters from '" + params_path + "'");
  mf_image* img = nullptr;
  if (mf_image_render(x, width, height, radius, &img) != MF_OK) return fail_cli("render failed");
  ImagePtr guard(img);
  Outputs outs;
  if (mf_image_save_png(img, outs.claim(out_path).string().c_str()) != MF_OK)
    return fail_cli("cannot write '" + out_path + "'");
  outs.commit();
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

int run_edit(const std::string& in_path, const std::string& out_path,
             const std::string& config_path) {
  mf_config* cfg = nullptr;
  if (mf_config_load(config_path.c_str(), &cfg) != MF_OK) return fail_cli("cannot load config");
  ConfigPtr cfg_guard(cfg);
  mf_image* img = nullptr;
  if (mf_image_load_png(in_path.c_str(), &img) != MF_OK)
    return fail_cli("cannot load '" + in_path + "'");
  ImagePtr guard(img);

  for (int i = 0;; ++i) {
    const char* op = nullptr;
    if (mf_config_edit_op(cfg, i, &op) != MF_OK) return fail_cli("cannot read edit ops");
    if (!op) break;
    mf_image* next = nullptr;
    if (mf_image_apply_edit(img, op, mf_config_dir(cfg), &next) != MF_OK)
      return fail_cli(std::string("edit op ") + std::to_string(i) + " failed");
    guard.reset(next);
    img = next;
  }
  Outputs outs;
  if (mf_image_save_png(img, outs.claim(out_path).string().c_str()) != MF_OK)
    return fail_cli("cannot write '" + out_path + "'");
  outs.commit();
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

int run_fit(const std::string& target_path, const std::string& config_path,
            const std::string& out_dir, const FitFlags& flags, CLI::App* cmd) {
  mf_config* raw_cfg = nullptr;
  if (mf_config_load(config_path.c_str(), &raw_cfg) != MF_OK)
    return fail_cli("cannot load config");
  ConfigPtr cfg(raw_cfg);
  merge_fit_flags(raw_cfg, flags, cmd);

  mf_image* raw_target = nullptr;
  if (mf_image_load_png(target_path.c_str(), &raw_target) != MF_OK)
    return fail_cli("cannot load target '" + target_path + "'");
  ImagePtr target(raw_target);

  std::string err;
  EnsemblePtr ens;
  if (!load_ensemble_from(raw_cfg, ens, err)) return fail_cli(err);

  mf_fit_options fo;
  mf_fit_options_init(&fo);
  ModelPtr decoder;
  if (!gather_fit_options(raw_cfg, fo, decoder, err)) return fail_cli(err);
  OptimizerName opt_name{cfg_str(raw_cfg, "fit.optimizer", "nm")};
  fo.optimizer = opt_name.value.c_str();
  const std::string target_id = fs::path(target_path).stem().string();
  fo.target_id = target_id.c_str();

  mf_report* raw_rep = nullptr;
  if (mf_fit(raw_target, ens.get(), &fo, &raw_rep) != MF_OK) return fail_cli("fit failed");
  ReportPtr rep(raw_rep);

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  const fs::path dir(out_dir);
  Outputs outs;

  char* csv = nullptr;
  if (mf_report_csv_alloc(raw_rep, &csv) != MF_OK) return fail_cli("cannot format report");
  const bool csv_ok = write_file(outs.claim(dir / "report.csv"), csv);
  mf_string_free(csv);
  if (!csv_ok) return fail_cli("cannot write report.csv");

  char* summary = nullptr;
  if (mf_report_summary_alloc(raw_rep, &summary) != MF_OK)
    return fail_cli("cannot format summary");
  const std::string summary_text = summary;
  mf_string_free(summary);
  if (!write_file(outs.claim(dir / "summary.txt"), summary_text))
    return fail_cli("cannot write summary.txt");

  double fitted[MF_PARAM_COUNT];
  mf_report_final_params(raw_rep, fitted);
  if (mf_params_write_text(outs.claim(dir / "params.txt").string().c_str(), fitted) != MF_OK)
    return fail_cli("cannot write params.txt");

  mf_image* raw_render = nullptr;
  if (mf_image_render(fitted, mf_image_width(raw_target), mf_image_height(raw_target),
                      fo.sphere_radius, &raw_render) != MF_OK)
    return fail_cli("cannot render fitted parameters");
  ImagePtr fitted_img(raw_render);
  if (mf_image_save_png(raw_render, outs.claim(dir / "fit.png").string().c_str()) != MF_OK)
    return fail_cli("cannot write fit.png");

  if (!write_echo(raw_cfg, outs, dir, err)) return fail_cli(err);
  outs.commit();
  std::cout << summary_text << "outputs in " << out_dir << "\n";
  return 0;
}

int run_fit_seq(const std::vector<std::string>& frame_paths, const std::string& config_path,
                const std::string& out_dir, const FitFlags& flags, bool reinit_on,
                bool reinit_off, CLI::App* cmd) {
  mf_config* raw_cfg = nullptr;
  if (mf_config_load(config_path.c_str(), &raw_cfg) != MF_OK)
    return fail_cli("cannot load config");
  ConfigPtr cfg(raw_cfg);
  merge_fit_flags(raw_cfg, flags, cmd);
  if (reinit_on) mf_config_set(raw_cfg, "sequence.reinit", "1");
  if (reinit_off) mf_config_set(raw_cfg, "sequence.reinit", "0");

  std::vector<ImagePtr> frames;
  std::vector<const mf_image*> raw_frames;
  for (const std::string& p : frame_paths) {
    mf_image* img = nullptr;
    if (mf_image_load_png(p.c_str(), &img) != MF_OK)
      return fail_cli("cannot load frame '" + p + "'");
    frames.emplace_back(img);
    raw_frames.push_back(img);
  }

  std::string err;
  EnsemblePtr ens;
  if (!load_ensemble_from(raw_cfg, ens, err)) return fail_cli(err);

  mf_fit_options fo;
  mf_fit_options_init(&fo);
  ModelPtr decoder;
  if (!gather_fit_options(raw_cfg, fo, decoder, err)) return fail_cli(err);
  // A sequence budget overrides the per-fit budget unless --budget was given.
  const char* seq_budget = mf_config_get(raw_cfg, "sequence.budget", nullptr);
  if (flags.budget < 0 && seq_budget) fo.budget = std::atol(seq_budget);
  OptimizerName opt_name{cfg_str(raw_cfg, "fit.optimizer", "nm")};
  fo.optimizer = opt_name.value.c_str();
  const std::string target_id = fs::path(frame_paths.front()).stem().string();
  fo.target_id = target_id.c_str();
  const bool reinit = parse_bool(cfg_str(raw_cfg, "sequence.reinit", "1"), true);

  mf_seq_report* raw_seq = nullptr;
  if (mf_fit_sequence(raw_frames.data(), raw_frames.size(), ens.get(), &fo, reinit ? 1 : 0,
                      &raw_seq) != MF_OK)
    return fail_cli("sequence fit failed");
  SeqPtr seq(raw_seq);

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  const fs::path dir(out_dir);
  Outputs outs;

  char* csv = nullptr;
  if (mf_seq_csv_alloc(raw_seq, &csv) != MF_OK) return fail_cli("cannot format sequence csv");
  const bool csv_ok = write_file(outs.claim(dir / "sequence.csv"), csv);
  mf_string_free(csv);
  if (!csv_ok) return fail_cli("cannot write sequence.csv");

  char* summary = nullptr;
  if (mf_seq_summary_alloc(raw_seq, &summary) != MF_OK)
    return fail_cli("cannot format sequence summary");
  const std::string summary_text = summary;
  mf_string_free(summary);
  if (!write_file(outs.claim(dir / "summary.txt"), summary_text))
    return fail_cli("cannot write summary.txt");

  const mf_report* last = mf_seq_frame(raw_seq, mf_seq_frame_count(raw_seq) - 1);
  double fitted[MF_PARAM_COUNT];
  mf_report_final_params(last, fitted);
  if (mf_params_write_text(outs.claim(dir / "final_params.txt").string().c_str(), fitted) !=
      MF_OK)
    return fail_cli("cannot write final_params.txt");

  if (!write_echo(raw_cfg, outs, dir, err)) return fail_cli(err);
  outs.commit();
  std::cout << summary_text << "outputs in " << out_dir << "\n";
  return 0;
}

int run_command(mf_status (*cmd)(const char*, const mf_overrides*), const std::string& config,
                const mf_overrides& ov, const char* what) {
  if (cmd(config.c_str(), &ov) != MF_OK) return fail_cli(what);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"material fitting toolkit"};
  app.require_subcommand(1);

  // render
  std::string params_path, out_png, config_path;
  CLI::App* render = app.add_subcommand("render", "render a parameter vector to a PNG");
  render->add_option("params", params_path, "parameter text file")->required();
  render->add_option("out", out_png, "output PNG")->required();
  render->add_option("--config", config_path, "run configuration");

  // edit
  std::string edit_in, edit_out, edit_cfg;
  CLI::App* edit = app.add_subcommand("edit", "apply the [edit] script to a PNG");
  edit->add_option("in", edit_in, "input PNG")->required();
  edit->add_option("out", edit_out, "output PNG")->required();
  edit->add_option("--config", edit_cfg, "run configuration")->required();

  // dataset / train / bench share the override structure
  std::string ds_cfg, ds_out;
  std::uint64_t ds_seed = 0;
  CLI::App* dataset = app.add_subcommand("dataset", "generate a training dataset");
  dataset->add_option("--config", ds_cfg, "run configuration")->required();
  dataset->add_option("--out", ds_out, "dataset output path");
  dataset->add_option("--seed", ds_seed, "dataset seed");

  std::string tr_cfg, tr_out, tr_arch;
  std::uint64_t tr_seed = 0;
  CLI::App* train = app.add_subcommand("train", "train one model");
  train->add_option("--config", tr_cfg, "run configuration")->required();
  train->add_option("--arch", tr_arch, "1..9 or 'decoder'");
  train->add_option("--out", tr_out, "model output path");
  train->add_option("--seed", tr_seed, "training seed");

  std::string fit_target, fit_cfg, fit_out;
  FitFlags fit_flags;
  CLI::App* fit = app.add_subcommand("fit", "fit parameters to a target image");
  fit->add_option("target", fit_target, "target PNG")->required();
  fit->add_option("--config", fit_cfg, "run configuration")->required();
  fit->add_option("--out", fit_out, "output directory")->required();
  add_fit_flags(fit, fit_flags);

  std::vector<std::string> seq_frames;
  std::string seq_cfg, seq_out;
  FitFlags seq_flags;
  bool reinit_on = false, reinit_off = false;
  CLI::App* fit_seq = app.add_subcommand("fit-seq", "fit an ordered frame sequence");
  fit_seq->add_option("frames", seq_frames, "frame PNGs in order")->required();
  fit_seq->add_option("--config", seq_cfg, "run configuration")->required();
  fit_seq->add_option("--out", seq_out, "output directory")->required();
  add_fit_flags(fit_seq, seq_flags);
  fit_seq->add_flag("--reinit", reinit_on, "reuse each frame's fit for the next");
  fit_seq->add_flag("--no-reinit", reinit_off, "fit frames independently");

  std::string bench_cfg, bench_out;
  std::uint64_t bench_seed = 0;
  long bench_budget = 0;
  CLI::App* bench = app.add_subcommand("bench", "run the benchmark suites");
  bench->add_option("--config", bench_cfg, "run configuration")->required();
  bench->add_option("--out", bench_out, "output directory");
  bench->add_option("--seed", bench_seed, "benchmark seed");
  bench->add_option("--budget", bench_budget, "refinement budget");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (render->parsed()) return run_render(params_path, out_png, config_path);
  if (edit->parsed()) return run_edit(edit_in, edit_out, edit_cfg);
  if (dataset->parsed()) {
    mf_overrides ov;
    mf_overrides_init(&ov);
    if (!ds_out.empty()) ov.out = ds_out.c_str();
    if (dataset->count("--seed")) {
      ov.seed = ds_seed;
      ov.has_seed = 1;
    }
    return run_command(mf_cmd_dataset, ds_cfg, ov, "dataset generation failed");
  }
  if (train->parsed()) {
    mf_overrides ov;
    mf_overrides_init(&ov);
    if (!tr_out.empty()) ov.out = tr_out.c_str();
    if (!tr_arch.empty()) ov.arch = tr_arch.c_str();
    if (train->count("--seed")) {
      ov.seed = tr_seed;
      ov.has_seed = 1;
    }
    return run_command(mf_cmd_train, tr_cfg, ov, "training failed");
  }
  if (fit->parsed()) return run_fit(fit_target, fit_cfg, fit_out, fit_flags, fit);
  if (fit_seq->parsed())
    return run_fit_seq(seq_frames, seq_cfg, seq_out, seq_flags, reinit_on, reinit_off, fit_seq);
  if (bench->parsed()) {
    mf_overrides ov;
    mf_overrides_init(&ov);
    if (!bench_out.empty()) ov.out = bench_out.c_str();
    if (bench->count("--seed")) {
      ov.seed = bench_seed;
      ov.has_seed = 1;
    }
    if (bench_budget > 0) ov.budget = bench_budget;
    return run_command(mf_cmd_bench, bench_cfg, ov, "benchmark failed");
  }
  return 1;
}
