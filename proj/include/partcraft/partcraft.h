/* Copyright 2026 The PartCraft Authors
 * SPDX-License-Identifier: Apache-2.0 */

#ifndef PARTCRAFT_PARTCRAFT_H_
#define PARTCRAFT_PARTCRAFT_H_

#include <stddef.h>
#include <stdint.h>

#if defined(PARTCRAFT_BUILDING_LIBRARY)
#define PC_API __attribute__((visibility("default")))
#else
#define PC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pc_status {
  PC_OK = 0,
  PC_ERR_INVALID_ARGUMENT = 1,
  PC_ERR_PARSE = 2,
  PC_ERR_VALIDATION = 3,
  PC_ERR_NOT_FOUND = 4,
  PC_ERR_CAPABILITY = 5,
  PC_ERR_CONFIGURATION = 6,
  PC_ERR_BACKEND = 7,
  PC_ERR_IO = 8,
  PC_ERR_STATE = 9,
  PC_ERR_INTERNAL = 10
} pc_status;

typedef struct pc_document pc_document;
typedef struct pc_config pc_config;
typedef struct pc_backend pc_backend;
typedef struct pc_masks pc_masks;
typedef struct pc_image pc_image;
typedef struct pc_service pc_service;

PC_API const char* pc_version(void);
/* Message of the last failed call on this thread; "" after success. Valid
 * until the next call on the same thread. */
PC_API const char* pc_last_error(void);
PC_API const char* pc_status_name(pc_status status);
/* Releases strings returned through char** out-parameters. */
PC_API void pc_string_free(char* s);

/* Rich-text documents. */
PC_API pc_status pc_document_parse(const char* json, pc_document** out);
PC_API pc_status pc_document_serialize(const pc_document* doc, char** out_json);
PC_API size_t pc_document_part_count(const pc_document* doc);
PC_API void pc_document_free(pc_document* doc);

/* Pipeline configuration. An empty or NULL json selects the defaults. */
PC_API pc_status pc_config_parse(const char* json, pc_config** out);
PC_API pc_status pc_config_profile(const char* name, pc_config** out);
PC_API pc_status pc_config_serialize(const pc_config* config, char** out_json);
PC_API void pc_config_free(pc_config* config);

/* ---- Backend plugin ABI ------------------------------------------------ */

#define PC_BACKEND_ABI_VERSION 1

typedef enum pc_attention_kind { PC_ATTENTION_SELF = 0, PC_ATTENTION_CROSS = 1 } pc_attention_kind;

/* One head of one layer. Self: values[q * (h*w) + k]. Cross: values[q * tokens + j]. */
typedef struct pc_attention_capture {
  pc_attention_kind kind;
  int32_t layer;
  int32_t head;
  int32_t height;
  int32_t width;
  int32_t tokens;
  const float* values;
} pc_attention_capture;

typedef struct pc_attention_hooks {
  /* NULL when the caller does not want captures. */
  void (*emit)(void* ctx, const pc_attention_capture* capture);
  void* ctx;
  /* Per-token additive cross-attention logit offsets, NULL = none. */
  const double* token_log_weights;
  int32_t token_log_weight_count;
  /* 1024×1024 row-stochastic self-attention to use instead of the model's
   * own, NULL = none. */
  const double* injected_self;
} pc_attention_hooks;

typedef struct pc_text_conditioning {
  int32_t token_count;
  int32_t dim;
  const char* const* tokens; /* tokens[0] is the start-of-text marker */
  const double* embeddings;  /* token_count × dim */
} pc_text_conditioning;

/* A backend implemented outside the library. Required: encode_text,
 * predict_noise, release_text. Optional entries may be NULL; the matching
 * capability is then reported as unsupported. Return 0 on success; on
 * failure write a message into err (err_size bytes). */
typedef struct pc_backend_callbacks {
  int32_t abi_version;
  void* user_data;
  int32_t latent_channels, latent_height, latent_width;
  int32_t image_channels, image_height, image_width;
  int32_t supports_attention;
  int32_t supports_reweight;
  int32_t supports_injection;

  int (*encode_text)(void* user_data, const char* prompt, pc_text_conditioning* out, char* err, size_t err_size);
  void (*release_text)(void* user_data, pc_text_conditioning* text);
  int (*predict_noise)(void* user_data, const double* x, const pc_text_conditioning* cond, int32_t train_timestep,
                       const pc_attention_hooks* hooks, double* out_eps, char* err, size_t err_size);
  int (*encode_image)(void* user_data, const double* image, double* out_latent, char* err, size_t err_size);
  int (*decode_image)(void* user_data, const double* latent, double* out_image, char* err, size_t err_size);
  int (*decode_vjp)(void* user_data, const double* latent, const double* grad_image, double* out_grad,
                    char* err, size_t err_size);
  /* Gradient of <grad_eps, eps(x, cond, t)> w.r.t. cond->embeddings. */
  int (*predict_noise_vjp_embedding)(void* user_data, const double* x, const pc_text_conditioning* cond,
                                     int32_t train_timestep, const double* grad_eps, double* out_grad,
                                     char* err, size_t err_size);
  void (*destroy)(void* user_data);
} pc_backend_callbacks;

/* Entry point a plugin shared object exports. options_json may be "". */
typedef int (*pc_backend_plugin_init_fn)(const char* options_json, pc_backend_callbacks* out, char* err,
                                         size_t err_size);
#define PC_BACKEND_PLUGIN_INIT_SYMBOL "pc_backend_plugin_init"

/* ---- Backends and pipeline --------------------------------------------- */

/* Backend named by the config ("synthetic" or "diffusion"). doc may be NULL;
 * the synthetic backend then needs an explicit scene in the config. */
PC_API pc_status pc_backend_create(const pc_config* config, const pc_document* doc, pc_backend** out);
/* Takes ownership of callbacks->user_data (destroy is called on free). */
PC_API pc_status pc_backend_create_callbacks(const pc_backend_callbacks* callbacks, pc_backend** out);
PC_API const char* pc_backend_name(const pc_backend* backend);
PC_API void pc_backend_free(pc_backend* backend);

PC_API pc_status pc_localize(const pc_document* doc, const pc_config* config, pc_backend* backend,
                             pc_masks** out);
PC_API pc_status pc_masks_to_json(const pc_masks* masks, char** out_json);
/* Writes <dir>/masks.json plus one PNG per part, object.png and background.png. */
PC_API pc_status pc_masks_save(const pc_masks* masks, const char* dir);
PC_API pc_status pc_masks_load(const char* dir, pc_masks** out);
PC_API size_t pc_masks_part_count(const pc_masks* masks);
/* Copies the part's 32×32 mask (row-major 0/1) into out, which must hold
 * 1024 bytes. */
PC_API pc_status pc_masks_part(const pc_masks* masks, const char* name, uint8_t* out, int* out_localized,
                               double* out_score);
PC_API void pc_masks_free(pc_masks* masks);

/* intermediates_dir may be NULL. */
PC_API pc_status pc_generate(const pc_document* doc, const pc_masks* masks, const pc_config* config,
                             pc_backend* backend, const char* intermediates_dir, pc_image** out);
PC_API pc_status pc_image_dims(const pc_image* image, int* channels, int* height, int* width);
/* CHW doubles, valid while the image lives. */
PC_API const double* pc_image_data(const pc_image* image);
PC_API pc_status pc_image_save_png(const pc_image* image, const char* path);
PC_API void pc_image_free(pc_image* image);

/* ---- Evaluation -------------------------------------------------------- */

/* dataset: "deepfashion", "cub" or "synthetic". grouping_path may be NULL
 * for the built-in grouping of the dataset kind. captioner_json may be NULL;
 * it captions samples without one ({"kind":"http","endpoint":...}). Report
 * JSON: {nmi, ari, fg_nmi, fg_ari, n, failures}. */
PC_API pc_status pc_evaluate(const char* dataset, const char* root, const char* grouping_path,
                             const pc_config* config, const char* captioner_json, char** out_report_json);
PC_API pc_status pc_synthetic_dataset_write(const char* root, int samples, uint64_t seed);

PC_API pc_status pc_nearest_named_color(int r, int g, int b, char** out_name);

/* ---- Service ----------------------------------------------------------- */

/* config_json: {port, host, workers, store, backend_profile, cors_origin};
 * PARTCRAFT_* environment variables override it. */
PC_API pc_status pc_service_create(const char* config_json, pc_service** out);
PC_API pc_status pc_service_start(pc_service* service);
PC_API int pc_service_port(const pc_service* service);
/* Blocks until pc_service_stop is called from another thread or a signal. */
PC_API pc_status pc_service_wait(pc_service* service);
PC_API pc_status pc_service_stop(pc_service* service);
PC_API void pc_service_free(pc_service* service);

#ifdef __cplusplus
}
#endif

#endif /* PARTCRAFT_PARTCRAFT_H_ */
