#include "matfit.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "bench.hpp"
#include "error.hpp"
#include "image.hpp"
#include "invert.hpp"
#include "nn/dataset.hpp"
#include "nn/serialize.hpp"
#include "nn/train.hpp"
#include "params.hpp"
#include "pipeline.hpp"
#include "png_io.hpp"
#include "render.hpp"
#include "runconfig.hpp"

using namespace matfit;

struct mf_image {
  Image img;
};

struct mf_config {
  RunConfig cfg;
  std::vector<std::string> ops;
  bool ops_valid = false;
  std::string scratch;
};

struct mf_ensemble {
  Ensemble ens;
};

struct mf_model {
  nn::ModelInfo info;
};

struct mf_report {
  FitReport rep;
};

struct mf_seq_report {
  SequenceReport rep;
  std::vector<mf_report> frames;  // stable storage behind mf_seq_frame
};

namespace {

thread_local std::string g_last_error;

mf_status map_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::kInvalidArgument: return MF_ERR_INVALID_ARGUMENT;
    case ErrorCode::kInfeasible: return MF_ERR_INFEASIBLE;
    case ErrorCode::kIo: return MF_ERR_IO;
    case ErrorCode::kFormat: return MF_ERR_FORMAT;
    case ErrorCode::kNumeric: return MF_ERR_NUMERIC;
  }
  return MF_ERR_INTERNAL;
}

template <typename F>
mf_status wrap(F&& body) {
  try {
    body();
    g_last_error.clear();
    return MF_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return map_code(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return MF_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return MF_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) fail(ErrorCode::kInvalidArgument, what);
}

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) fail(ErrorCode::kNumeric, "out of memory");
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

ParamVector to_params(const double x[MF_PARAM_COUNT]) {
  ParamVector p;
  std::memcpy(p.data(), x, sizeof(double) * kParamCount);
  return p;
}

// Removes everything it tracked unless commit() ran, so failed commands
// leave no partial outputs behind.
class OutputTracker {
 public:
  ~OutputTracker() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& f : files_) std::filesystem::remove(f, ec);
  }
  void track(const std::filesystem::path& p) { files_.push_back(p); }
  void commit() { committed_ = true; }

 private:
  std::vector<std::filesystem::path> files_;
  bool committed_ = false;
};

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out.good()) fail(ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

FitOptions to_fit_options(const mf_fit_options& o, const Ensemble& ens) {
  require(o.budget >= 1, "fit budget must be at least 1");
  require(o.optimizer != nullptr, "optimizer name is null");
  require(o.spread_tol > 0.0, "spread_tol must be positive");
  require(o.bh_local_evals >= 1, "bh_local_evals must be at least 1");
  require(o.bh_step_scale > 0.0, "bh_step_scale must be positive");
  require(o.candidate >= -1 && o.candidate < static_cast<int>(ens.size()),
          "candidate index out of range");
  FitOptions fo;
  fo.budget = o.budget;
  fo.optimizer = optimizer_from_name(o.optimizer);
  fo.evaluator = o.use_surrogate ? EvaluatorKind::kSurrogate : EvaluatorKind::kTrue;
  if (o.use_surrogate) {
    require(o.decoder != nullptr, "surrogate refinement needs a decoder model");
    fo.decoder = &o.decoder->info.net;
  }
  fo.spread_tol = o.spread_tol;
  fo.bh_local_evals = o.bh_local_evals;
  fo.bh_temperature = o.bh_temperature;
  fo.bh_step_scale = o.bh_step_scale;
  fo.seed = o.seed;
  if (o.target_id) fo.target_id = o.target_id;
  return fo;
}

// --candidate narrows the fit to a single ensemble member.
Ensemble sub_ensemble(const Ensemble& ens, int candidate) {
  Ensemble one;
  one.nets.push_back(ens.nets[candidate]);
  one.labels.push_back(ens.labels[candidate]);
  one.input_side = ens.input_side;
  one.bounds = ens.bounds;
  return one;
}

std::vector<long> parse_long_list(const std::string& text, const char* what) {
  std::istringstream in(text);
  std::vector<long> out;
  long v = 0;
  while (in >> v) {
    if (v <= 0) fail(ErrorCode::kInvalidArgument, std::string(what) + " entries must be positive");
    out.push_back(v);
  }
  if (!in.eof()) fail(ErrorCode::kFormat, std::string(what) + ": expected a list of integers");
  if (out.empty()) fail(ErrorCode::kInvalidArgument, std::string(what) + " is empty");
  return out;
}

}  // namespace

extern "C" {

const char* mf_last_error(void) { return g_last_error.c_str(); }

void mf_string_free(char* s) { std::free(s); }

/* ---- params ---- */

mf_status mf_params_read_text(const char* path, double out[MF_PARAM_COUNT]) {
  return wrap([&] {
    require(path && out, "null argument");
    std::ifstream in(path);
    if (!in) fail(ErrorCode::kIo, std::string("cannot open '") + path + "'");
    ParamVector p = read_params_text(in);
    std::memcpy(out, p.data(), sizeof(double) * kParamCount);
  });
}

mf_status mf_params_write_text(const char* path, const double x[MF_PARAM_COUNT]) {
  return wrap([&] {
    require(path && x, "null argument");
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::kIo, std::string("cannot open '") + path + "' for writing");
    write_params_text(to_params(x), out);
    out.flush();
    if (!out.good()) fail(ErrorCode::kIo, std::string("write failed for '") + path + "'");
  });
}

const char* mf_param_name(int index) {
  if (index < 0 || index >= kParamCount) return nullptr;
  return param_name(index);
}

void mf_default_bounds(double lower[MF_PARAM_COUNT], double upper[MF_PARAM_COUNT]) {
  const Bounds b = default_bounds();
  if (lower) std::memcpy(lower, b.lower.data(), sizeof(double) * kParamCount);
  if (upper) std::memcpy(upper, b.upper.data(), sizeof(double) * kParamCount);
}

/* ---- images ---- */

mf_status mf_image_load_png(const char* path, mf_image** out) {
  return wrap([&] {
    require(path && out, "null argument");
    *out = new mf_image{load_png(path)};
  });
}

mf_status mf_image_save_png(const mf_image* img, const char* path) {
  return wrap([&] {
    require(img && path, "null argument");
    save_png(img->img, path);
  });
}

mf_status mf_image_render(const double x[MF_PARAM_COUNT], int width, int height,
                          double sphere_radius, mf_image** out) {
  return wrap([&] {
    require(x && out, "null argument");
    RenderConfig rc;
    rc.width = width;
    rc.height = height;
    if (sphere_radius > 0.0) rc.sphere_radius = sphere_radius;
    rc.validate();
    *out = new mf_image{render(to_params(x), rc)};
  });
}

mf_status mf_image_apply_edit(const mf_image* img, const char* op, const char* base_dir,
                              mf_image** out) {
  return wrap([&] {
    require(img && op && out, "null argument");
    *out = new mf_image{apply_edit_op(img->img, op, base_dir ? base_dir : ".")};
  });
}

mf_status mf_image_rmse(const mf_image* a, const mf_image* b, double* out) {
  return wrap([&] {
    require(a && b && out, "null argument");
    *out = rmse(a->img, b->img);
  });
}

int mf_image_width(const mf_image* img) { return img ? img->img.width : 0; }
int mf_image_height(const mf_image* img) { return img ? img->img.height : 0; }
void mf_image_free(mf_image* img) { delete img; }

/* ---- config ---- */

mf_status mf_config_load(const char* path, mf_config** out) {
  return wrap([&] {
    require(path && out, "null argument");
    auto* h = new mf_config{RunConfig::load(path), {}, false, {}};
    *out = h;
  });
}

const char* mf_config_get(const mf_config* cfg, const char* key, const char* fallback) {
  if (!cfg || !key) return fallback;
  auto* h = const_cast<mf_config*>(cfg);
  if (!h->cfg.has(key)) return fallback;
  h->scratch = h->cfg.get(key, "");
  return h->scratch.c_str();
}

mf_status mf_config_get_path(const mf_config* cfg, const char* key, char** out) {
  return wrap([&] {
    require(cfg && key && out, "null argument");
    *out = dup_string(cfg->cfg.require_path(key));
  });
}

const char* mf_config_dir(const mf_config* cfg) { return cfg ? cfg->cfg.dir().c_str() : nullptr; }

mf_status mf_config_edit_op(const mf_config* cfg, int index, const char** out) {
  return wrap([&] {
    require(cfg && out, "null argument");
    require(index >= 0, "edit op index must be non-negative");
    auto* h = const_cast<mf_config*>(cfg);
    if (!h->ops_valid) {
      h->ops = h->cfg.edit_ops();
      h->ops_valid = true;
    }
    *out = index < static_cast<int>(h->ops.size()) ? h->ops[index].c_str() : nullptr;
  });
}

void mf_config_set(mf_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) return;
  cfg->cfg.set(key, value);
  cfg->ops_valid = false;
}

mf_status mf_config_echo_alloc(const mf_config* cfg, char** out) {
  return wrap([&] {
    require(cfg && out, "null argument");
    *out = dup_string(cfg->cfg.echo());
  });
}

void mf_config_free(mf_config* cfg) { delete cfg; }

/* ---- models ---- */

mf_status mf_ensemble_load(const char* manifest_path, mf_ensemble** out) {
  return wrap([&] {
    require(manifest_path && out, "null argument");
    *out = new mf_ensemble{load_ensemble(manifest_path, nullptr, &std::cerr)};
  });
}

size_t mf_ensemble_size(const mf_ensemble* ens) { return ens ? ens->ens.size() : 0; }
void mf_ensemble_free(mf_ensemble* ens) { delete ens; }

mf_status mf_model_load(const char* path, mf_model** out) {
  return wrap([&] {
    require(path && out, "null argument");
    *out = new mf_model{nn::load_model(path, nullptr, &std::cerr)};
  });
}

void mf_model_free(mf_model* m) { delete m; }

/* ---- fitting ---- */

void mf_fit_options_init(mf_fit_options* opt) {
  if (!opt) return;
  opt->budget = 1500;
  opt->optimizer = "nm";
  opt->use_surrogate = 0;
  opt->decoder = nullptr;
  opt->seed = 0;
  opt->candidate = -1;
  opt->spread_tol = 1e-6;
  opt->bh_local_evals = 200;
  opt->bh_temperature = 1.0;
  opt->bh_step_scale = 0.1;
  opt->sphere_radius = 0.0;
  opt->target_id = nullptr;
}

mf_status mf_fit(const mf_image* target, const mf_ensemble* ens, const mf_fit_options* opt,
                 mf_report** out) {
  return wrap([&] {
    require(target && ens && opt && out, "null argument");
    FitOptions fo = to_fit_options(*opt, ens->ens);
    RenderConfig rc;
    rc.width = target->img.width;
    rc.height = target->img.height;
    if (opt->sphere_radius > 0.0) rc.sphere_radius = opt->sphere_radius;
    rc.validate();
    const Ensemble& used =
        opt->candidate >= 0 ? sub_ensemble(ens->ens, opt->candidate) : ens->ens;
    *out = new mf_report{hybrid_fit(target->img, used, rc, fo)};
  });
}

mf_status mf_fit_sequence(const mf_image* const* frames, size_t frame_count,
                          const mf_ensemble* ens, const mf_fit_options* opt, int reinit,
                          mf_seq_report** out) {
  return wrap([&] {
    require(frames && ens && opt && out, "null argument");
    require(frame_count >= 1, "need at least one frame");
    std::vector<Image> targets;
    targets.reserve(frame_count);
    for (size_t k = 0; k < frame_count; ++k) {
      require(frames[k] != nullptr, "null frame");
      targets.push_back(frames[k]->img);
    }
    FitOptions fo = to_fit_options(*opt, ens->ens);
    RenderConfig rc;
    rc.width = targets.front().width;
    rc.height = targets.front().height;
    if (opt->sphere_radius > 0.0) rc.sphere_radius = opt->sphere_radius;
    rc.validate();
    const Ensemble& used =
        opt->candidate >= 0 ? sub_ensemble(ens->ens, opt->candidate) : ens->ens;
    SequenceReport rep = fit_sequence(targets, used, rc, fo, reinit != 0);
    auto* h = new mf_seq_report{std::move(rep), {}};
    h->frames.reserve(h->rep.frames.size());
    for (const auto& fr : h->rep.frames) h->frames.push_back(mf_report{fr});
    *out = h;
  });
}

double mf_report_init_rmse(const mf_report* r) { return r ? r->rep.init_rmse : 0.0; }
double mf_report_final_rmse(const mf_report* r) { return r ? r->rep.final_rmse : 0.0; }
long mf_report_evals(const mf_report* r) { return r ? r->rep.evals : 0; }
int mf_report_chosen(const mf_report* r) { return r ? r->rep.chosen : -1; }

size_t mf_report_candidate_count(const mf_report* r) {
  return r ? r->rep.candidate_rmses.size() : 0;
}

void mf_report_final_params(const mf_report* r, double out[MF_PARAM_COUNT]) {
  if (!r || !out) return;
  std::memcpy(out, r->rep.x_final.data(), sizeof(double) * kParamCount);
}

mf_status mf_report_csv_alloc(const mf_report* r, char** out) {
  return wrap([&] {
    require(r && out, "null argument");
    std::ostringstream s;
    write_fit_csv(r->rep, s);
    *out = dup_string(s.str());
  });
}

mf_status mf_report_summary_alloc(const mf_report* r, char** out) {
  return wrap([&] {
    require(r && out, "null argument");
    std::ostringstream s;
    write_fit_summary(r->rep, s);
    *out = dup_string(s.str());
  });
}

void mf_report_free(mf_report* r) { delete r; }

size_t mf_seq_frame_count(const mf_seq_report* r) { return r ? r->frames.size() : 0; }

const mf_report* mf_seq_frame(const mf_seq_report* r, size_t k) {
  if (!r || k >= r->frames.size()) return nullptr;
  return &r->frames[k];
}

double mf_seq_cumulative_rmse(const mf_seq_report* r) { return r ? r->rep.cumulative_rmse : 0.0; }

mf_status mf_seq_csv_alloc(const mf_seq_report* r, char** out) {
  return wrap([&] {
    require(r && out, "null argument");
    std::ostringstream s;
    write_sequence_csv(r->rep, s);
    *out = dup_string(s.str());
  });
}

mf_status mf_seq_summary_alloc(const mf_seq_report* r, char** out) {
  return wrap([&] {
    require(r && out, "null argument");
    std::ostringstream s;
    write_sequence_summary(r->rep, s);
    *out = dup_string(s.str());
  });
}

void mf_seq_report_free(mf_seq_report* r) { delete r; }

/* ---- config-driven commands ---- */

void mf_overrides_init(mf_overrides* ov) {
  if (!ov) return;
  ov->out = nullptr;
  ov->arch = nullptr;
  ov->seed = 0;
  ov->has_seed = 0;
  ov->budget = 0;
}

mf_status mf_cmd_dataset(const char* config_path, const mf_overrides* ov) {
  return wrap([&] {
    require(config_path && ov, "null argument");
    const RunConfig cfg = RunConfig::load(config_path);
    const long count = cfg.get_long("dataset.count", 20000);
    const long val_count = cfg.get_long("dataset.val_count", 0);
    require(count >= 1, "dataset.count must be at least 1");
    require(val_count >= 0, "dataset.val_count must be non-negative");
    const std::uint64_t seed = ov->has_seed ? ov->seed : cfg.get_u64("dataset.seed", 1);
    const long side = cfg.get_long("dataset.net_input_side", 32);
    require(side >= 1, "dataset.net_input_side must be at least 1");
    const std::string out = ov->out ? std::string(ov->out) : cfg.require_path("dataset.out");
    const RenderConfig rc = cfg.render_config();
    const Bounds bounds = cfg.bounds();

    OutputTracker tracker;
    tracker.track(out);
    const nn::Dataset ds = nn::gen_dataset(static_cast<int>(count), seed, bounds, rc,
                                           static_cast<int>(side));
    nn::save_dataset(ds, out);
    std::cout << "wrote " << out << " (" << ds.count() << " samples)\n";
    if (val_count > 0) {
      const std::string val_out = cfg.get_path("dataset.val_out", "");
      require(!val_out.empty(), "dataset.val_out is required when dataset.val_count is set");
      tracker.track(val_out);
      const nn::Dataset val = nn::gen_dataset(static_cast<int>(val_count), seed + 1, bounds, rc,
                                              static_cast<int>(side));
      nn::save_dataset(val, val_out);
      std::cout << "wrote " << val_out << " (" << val.count() << " samples)\n";
    }
    tracker.commit();
  });
}

mf_status mf_cmd_train(const char* config_path, const mf_overrides* ov) {
  return wrap([&] {
    require(config_path && ov, "null argument");
    const RunConfig cfg = RunConfig::load(config_path);
    const std::string arch = ov->arch ? std::string(ov->arch) : cfg.get("train.arch", "");
    require(!arch.empty(), "train.arch (or --arch) is required: 1..9 or 'decoder'");

    const nn::Dataset ds = nn::load_dataset(cfg.require_path("train.dataset"));
    nn::Dataset val;
    const std::string val_path = cfg.get_path("train.val_dataset", "");
    if (!val_path.empty()) val = nn::load_dataset(val_path);

    nn::TrainHyper hp;
    hp.epochs = static_cast<int>(cfg.get_long("train.epochs", 30));
    hp.batch = static_cast<int>(cfg.get_long("train.batch", 64));
    hp.adam.lr = static_cast<float>(cfg.get_double("train.lr", 1e-3));
    hp.seed = ov->has_seed ? ov->seed : cfg.get_u64("train.seed", 1);
    require(hp.epochs >= 1 && hp.batch >= 1, "train.epochs and train.batch must be at least 1");

    nn::ArchDescriptor desc;
    nn::TrainTask task;
    if (arch == "decoder") {
      desc = nn::decoder_arch(kParamCount, ds.input_side);
      task = nn::TrainTask::kDecoder;
    } else {
      char* end = nullptr;
      const long idx = std::strtol(arch.c_str(), &end, 10);
      if (end == nullptr || *end != '\0' || idx < 1 || idx > 9)
        fail(ErrorCode::kInvalidArgument, "train.arch must be 1..9 or 'decoder', got '" + arch + "'");
      desc = nn::encoder_arch(static_cast<int>(idx), ds.input_side);
      task = nn::TrainTask::kEncoder;
    }

    nn::Network<float> net(desc);
    net.init_weights(hp.seed);
    const nn::TrainHistory hist = nn::train(net, ds, val, task, hp, &std::cout);

    nlohmann::json meta;
    meta["arch"] = desc.label;
    meta["task"] = task == nn::TrainTask::kDecoder ? "decoder" : "encoder";
    meta["epochs"] = hp.epochs;
    meta["seed"] = hp.seed;
    meta["dataset_seed"] = ds.seed;
    meta["final_train_loss"] = hist.train_loss.empty() ? 0.0 : hist.train_loss.back();
    if (!val_path.empty() && !hist.val_loss.empty()) meta["final_val_loss"] = hist.val_loss.back();

    const std::string out = ov->out ? std::string(ov->out) : cfg.require_path("train.out");
    OutputTracker tracker;
    tracker.track(out);
    nn::save_model(net, ds.bounds, meta, out);
    tracker.commit();
    std::cout << "wrote " << out << "\n";
  });
}

mf_status mf_cmd_bench(const char* config_path, const mf_overrides* ov) {
  return wrap([&] {
    require(config_path && ov, "null argument");
    RunConfig cfg = RunConfig::load(config_path);
    if (ov->has_seed) cfg.set("bench.seed", std::to_string(ov->seed));
    if (ov->budget > 0) cfg.set("bench.budget", std::to_string(ov->budget));

    const std::string out_dir = ov->out ? std::string(ov->out) : cfg.require_path("bench.out");
    cfg.set("bench.out", out_dir);

    const Bounds cfg_bounds = cfg.bounds();
    const Ensemble ens =
        load_ensemble(cfg.require_path("ensemble.manifest"), &cfg_bounds, &std::cerr);

    BenchConfig bc;
    bc.render = cfg.render_config();
    bc.bounds = ens.bounds;
    bc.seed = cfg.get_u64("bench.seed", 1234);
    bc.materials = static_cast<int>(cfg.get_long("bench.materials", 10));
    bc.budget = cfg.get_long("bench.budget", 1500);
    bc.frames = static_cast<int>(cfg.get_long("bench.frames", 120));
    bc.black_step = cfg.get_double("bench.black_step", 0.75);
    bc.frame_budgets =
        parse_long_list(cfg.get("bench.frame_budgets", "100 300 600"), "bench.frame_budgets");
    bc.c_materials = static_cast<int>(cfg.get_long("bench.c_materials", 2));
    require(bc.materials >= 1 && bc.budget >= 1 && bc.frames >= 1 && bc.c_materials >= 1,
            "bench sizes must be at least 1");
    require(bc.black_step >= 0.0 && bc.black_step * (bc.frames - 1) <= 255.0,
            "bench.black_step ramp must stay on the 0..255 scale");

    std::string suites = cfg.get("bench.suites", "abc");
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path out_path(out_dir);

    OutputTracker tracker;
    auto emit = [&](const char* name, auto&& writer) {
      const std::filesystem::path p = out_path / name;
      tracker.track(p);
      std::ostringstream s;
      writer(s);
      write_text_file(p, s.str());
      std::cout << "wrote " << p.string() << "\n";
    };

    bool any = false;
    for (char c : suites) {
      if (c == ' ' || c == ',') continue;
      any = true;
      switch (c) {
        case 'a': {
          const SuiteA sa = run_suite_a(bc, ens);
          emit("suite_a.csv", [&](std::ostream& s) { write_suite_a_csv(sa, s); });
          break;
        }
        case 'b': {
          const SuiteB sb = run_suite_b(bc, ens);
          emit("suite_b.csv", [&](std::ostream& s) { write_suite_b_csv(sb, s); });
          break;
        }
        case 'c': {
          const SuiteC sc = run_suite_c(bc, ens);
          emit("suite_c.csv", [&](std::ostream& s) { write_suite_c_csv(sc, s); });
          break;
        }
        default:
          fail(ErrorCode::kInvalidArgument,
               std::string("bench.suites: unknown suite '") + c + "'");
      }
    }
    require(any, "bench.suites selects no suite");

    const std::filesystem::path echo_path = out_path / "config_used.txt";
    tracker.track(echo_path);
    write_text_file(echo_path, cfg.echo());
    std::cout << "wrote " << echo_path.string() << "\n";
    tracker.commit();
  });
}

}  // extern "C"
