/* C interface to the material-fitting core. Every entry point returns a
 * status code; on failure mf_last_error() holds a message for the calling
 * thread. Handles are opaque and freed with their matching *_free call.
 * Strings returned through *_alloc calls are released with mf_string_free.
 */
#ifndef MATFIT_H
#define MATFIT_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define MF_PARAM_COUNT 19

typedef enum mf_status {
  MF_OK = 0,
  MF_ERR_INVALID_ARGUMENT = 1,
  MF_ERR_INFEASIBLE = 2,
  MF_ERR_IO = 3,
  MF_ERR_FORMAT = 4,
  MF_ERR_NUMERIC = 5,
  MF_ERR_INTERNAL = 6
} mf_status;

const char* mf_last_error(void);
void mf_string_free(char* s);

typedef struct mf_image mf_image;
typedef struct mf_config mf_config;
typedef struct mf_ensemble mf_ensemble;
typedef struct mf_model mf_model;
typedef struct mf_report mf_report;
typedef struct mf_seq_report mf_seq_report;

/* ---- parameter vectors (19 doubles, see mf_param_name for the layout) */

mf_status mf_params_read_text(const char* path, double out[MF_PARAM_COUNT]);
mf_status mf_params_write_text(const char* path, const double x[MF_PARAM_COUNT]);
const char* mf_param_name(int index); /* NULL when out of range */
void mf_default_bounds(double lower[MF_PARAM_COUNT], double upper[MF_PARAM_COUNT]);

/* ---- images (RGB on a 0..255 scale) */

mf_status mf_image_load_png(const char* path, mf_image** out);
mf_status mf_image_save_png(const mf_image* img, const char* path);
/* Renders the sphere scene at the given resolution; sphere_radius <= 0
 * selects the default. */
mf_status mf_image_render(const double x[MF_PARAM_COUNT], int width, int height,
                          double sphere_radius, mf_image** out);
/* One edit-script line, e.g. "saturate 2.0"; file references inside the op
 * resolve against base_dir (NULL means the current directory). */
mf_status mf_image_apply_edit(const mf_image* img, const char* op, const char* base_dir,
                              mf_image** out);
mf_status mf_image_rmse(const mf_image* a, const mf_image* b, double* out);
int mf_image_width(const mf_image* img);
int mf_image_height(const mf_image* img);
void mf_image_free(mf_image* img);

/* ---- run configuration (sectioned key-value text, keys "section.key") */

mf_status mf_config_load(const char* path, mf_config** out);
/* Returned pointer stays valid until the next call on the same config. */
const char* mf_config_get(const mf_config* cfg, const char* key, const char* fallback);
/* Resolved against the config directory; fails when the key is missing. */
mf_status mf_config_get_path(const mf_config* cfg, const char* key, char** out);
const char* mf_config_dir(const mf_config* cfg);
/* Ordered edit script; *out is NULL one past the last op. */
mf_status mf_config_edit_op(const mf_config* cfg, int index, const char** out);
void mf_config_set(mf_config* cfg, const char* key, const char* value);
mf_status mf_config_echo_alloc(const mf_config* cfg, char** out);
void mf_config_free(mf_config* cfg);

/* ---- models */

mf_status mf_ensemble_load(const char* manifest_path, mf_ensemble** out);
size_t mf_ensemble_size(const mf_ensemble* ens);
void mf_ensemble_free(mf_ensemble* ens);

mf_status mf_model_load(const char* path, mf_model** out);
void mf_model_free(mf_model* m);

/* ---- fitting */

typedef struct mf_fit_options {
  long budget;             /* objective evaluations for the refinement */
  const char* optimizer;   /* "nm" | "cg" | "lbfgs" | "bh" */
  int use_surrogate;       /* nonzero: refine through `decoder` */
  const mf_model* decoder; /* required when use_surrogate is set */
  uint64_t seed;           /* random-arm draws and basin-hopping */
  int candidate;           /* -1: whole ensemble; else a single member index */
  double spread_tol;
  long bh_local_evals;
  double bh_temperature;
  double bh_step_scale;
  double sphere_radius;    /* <= 0 selects the default */
  const char* target_id;   /* label carried into reports, may be NULL */
} mf_fit_options;

void mf_fit_options_init(mf_fit_options* opt);

/* Ensemble-guess-then-refine fit; the render resolution follows the target
 * image. Reported RMSEs are always scored with the true renderer. */
mf_status mf_fit(const mf_image* target, const mf_ensemble* ens, const mf_fit_options* opt,
                 mf_report** out);
/* Ordered frames; nonzero reinit feeds each frame's result to the next. */
mf_status mf_fit_sequence(const mf_image* const* frames, size_t frame_count,
                          const mf_ensemble* ens, const mf_fit_options* opt, int reinit,
                          mf_seq_report** out);

double mf_report_init_rmse(const mf_report* r);
double mf_report_final_rmse(const mf_report* r);
long mf_report_evals(const mf_report* r);
int mf_report_chosen(const mf_report* r);
size_t mf_report_candidate_count(const mf_report* r);
void mf_report_final_params(const mf_report* r, double out[MF_PARAM_COUNT]);
mf_status mf_report_csv_alloc(const mf_report* r, char** out);
mf_status mf_report_summary_alloc(const mf_report* r, char** out);
void mf_report_free(mf_report* r);

size_t mf_seq_frame_count(const mf_seq_report* r);
const mf_report* mf_seq_frame(const mf_seq_report* r, size_t k); /* borrowed */
double mf_seq_cumulative_rmse(const mf_seq_report* r);
mf_status mf_seq_csv_alloc(const mf_seq_report* r, char** out);
mf_status mf_seq_summary_alloc(const mf_seq_report* r, char** out);
void mf_seq_report_free(mf_seq_report* r);

/* ---- config-driven commands (dataset/training/benchmark flows)
 * On failure every file the command created is removed again. */

typedef struct mf_overrides {
  const char* out;  /* output file/directory override, may be NULL */
  const char* arch; /* training architecture: "1".."9" | "decoder" */
  uint64_t seed;
  int has_seed; /* nonzero: `seed` overrides the config */
  long budget;  /* > 0: overrides the config refinement budget */
} mf_overrides;

void mf_overrides_init(mf_overrides* ov);

mf_status mf_cmd_dataset(const char* config_path, const mf_overrides* ov);
mf_status mf_cmd_train(const char* config_path, const mf_overrides* ov);
mf_status mf_cmd_bench(const char* config_path, const mf_overrides* ov);

#ifdef __cplusplus
}
#endif

#endif /* MATFIT_H */
