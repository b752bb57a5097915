// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#include "partcraft/partcraft.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "backends/callback_backend.hpp"
#include "backends/captioner.hpp"
#include "backends/factory.hpp"
#include "core/config.hpp"
#include "core/document.hpp"
#include "core/error.hpp"
#include "core/png_io.hpp"
#include "evaluation/datasets.hpp"
#include "evaluation/evaluate.hpp"
#include "evaluation/grouping.hpp"
#include "generation/generation.hpp"
#include "generation/named_colors.hpp"
#include "localization/localization.hpp"
#include "service/artifacts.hpp"
#include "service/service.hpp"

struct pc_document {
  partcraft::RichPromptDocument doc;
};
struct pc_config {
  partcraft::PipelineConfig config;
};
struct pc_backend {
  std::unique_ptr<partcraft::DenoiserBackend> backend;
  std::string name;
};
struct pc_masks {
  partcraft::PartMaskSet masks;
};
struct pc_image {
  partcraft::Tensor tensor;
};
struct pc_service {
  std::unique_ptr<partcraft::Service> service;
};

namespace {

thread_local std::string g_last_error;

pc_status to_status(partcraft::ErrorCode code) { return static_cast<pc_status>(static_cast<int>(code)); }

template <typename F>
pc_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return PC_OK;
  } catch (const partcraft::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return PC_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PC_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return PC_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) throw partcraft::Error(partcraft::ErrorCode::kInvalidArgument, std::string(what) + " is NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* pc_version(void) { return "0.1.0"; }

const char* pc_last_error(void) { return g_last_error.c_str(); }

const char* pc_status_name(pc_status status) {
  if (status == PC_OK) return "ok";
  if (status < PC_ERR_INVALID_ARGUMENT || status > PC_ERR_INTERNAL) return "unknown";
  return partcraft::error_code_name(static_cast<partcraft::ErrorCode>(status));
}

void pc_string_free(char* s) { std::free(s); }

pc_status pc_document_parse(const char* json, pc_document** out) {
  return guarded([&] {
    require(json, "json");
    require(out, "out");
    *out = nullptr;
    auto d = std::make_unique<pc_document>();
    d->doc = partcraft::parse_rich_document(json);
    *out = d.release();
  });
}

pc_status pc_document_serialize(const pc_document* doc, char** out_json) {
  return guarded([&] {
    require(doc, "doc");
    require(out_json, "out_json");
    *out_json = dup_string(partcraft::serialize_rich_document(doc->doc));
  });
}

size_t pc_document_part_count(const pc_document* doc) { return doc == nullptr ? 0 : doc->doc.parts.size(); }

void pc_document_free(pc_document* doc) { delete doc; }

pc_status pc_config_parse(const char* json, pc_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    auto c = std::make_unique<pc_config>();
    c->config = (json == nullptr || *json == '\0') ? partcraft::config_profile("synthetic")
                                                   : partcraft::parse_pipeline_config(json);
    *out = c.release();
  });
}

pc_status pc_config_profile(const char* name, pc_config** out) {
  return guarded([&] {
    require(name, "name");
    require(out, "out");
    *out = nullptr;
    auto c = std::make_unique<pc_config>();
    c->config = partcraft::config_profile(name);
    *out = c.release();
  });
}

pc_status pc_config_serialize(const pc_config* config, char** out_json) {
  return guarded([&] {
    require(config, "config");
    require(out_json, "out_json");
    *out_json = dup_string(partcraft::serialize_pipeline_config(config->config));
  });
}

void pc_config_free(pc_config* config) { delete config; }

pc_status pc_backend_create(const pc_config* config, const pc_document* doc, pc_backend** out) {
  return guarded([&] {
    require(config, "config");
    require(out, "out");
    *out = nullptr;
    auto b = std::make_unique<pc_backend>();
    b->backend = partcraft::make_backend(config->config, doc != nullptr ? &doc->doc : nullptr);
    b->name = b->backend->name();
    *out = b.release();
  });
}

pc_status pc_backend_create_callbacks(const pc_backend_callbacks* callbacks, pc_backend** out) {
  return guarded([&] {
    require(callbacks, "callbacks");
    require(out, "out");
    *out = nullptr;
    auto b = std::make_unique<pc_backend>();
    b->backend = std::make_unique<partcraft::CallbackBackend>(*callbacks);
    b->name = b->backend->name();
    *out = b.release();
  });
}

const char* pc_backend_name(const pc_backend* backend) { return backend == nullptr ? "" : backend->name.c_str(); }

void pc_backend_free(pc_backend* backend) { delete backend; }

pc_status pc_localize(const pc_document* doc, const pc_config* config, pc_backend* backend, pc_masks** out) {
  return guarded([&] {
    require(doc, "doc");
    require(config, "config");
    require(backend, "backend");
    require(out, "out");
    *out = nullptr;
    auto m = std::make_unique<pc_masks>();
    m->masks = partcraft::localize(doc->doc, config->config, *backend->backend);
    *out = m.release();
  });
}

pc_status pc_masks_to_json(const pc_masks* masks, char** out_json) {
  return guarded([&] {
    require(masks, "masks");
    require(out_json, "out_json");
    *out_json = dup_string(partcraft::masks_to_json(masks->masks));
  });
}

pc_status pc_masks_save(const pc_masks* masks, const char* dir) {
  return guarded([&] {
    require(masks, "masks");
    require(dir, "dir");
    partcraft::save_masks(dir, masks->masks);
  });
}

pc_status pc_masks_load(const char* dir, pc_masks** out) {
  return guarded([&] {
    require(dir, "dir");
    require(out, "out");
    *out = nullptr;
    auto m = std::make_unique<pc_masks>();
    m->masks = partcraft::load_masks(dir);
    *out = m.release();
  });
}

size_t pc_masks_part_count(const pc_masks* masks) { return masks == nullptr ? 0 : masks->masks.parts.size(); }

pc_status pc_masks_part(const pc_masks* masks, const char* name, uint8_t* out, int* out_localized,
                        double* out_score) {
  return guarded([&] {
    require(masks, "masks");
    require(name, "name");
    const partcraft::PartMask* p = masks->masks.find(name);
    if (p == nullptr) throw partcraft::Error(partcraft::ErrorCode::kNotFound, std::string("no part '") + name + "'");
    if (out != nullptr) {
      if (p->mask.height() != partcraft::kMaskSize || p->mask.width() != partcraft::kMaskSize) {
        throw partcraft::Error(partcraft::ErrorCode::kState, "mask is not 32x32");
      }
      for (int i = 0; i < partcraft::kPositions; ++i) out[i] = p->mask[i] ? 1 : 0;
    }
    if (out_localized != nullptr) *out_localized = p->localized ? 1 : 0;
    if (out_score != nullptr) *out_score = p->score;
  });
}

void pc_masks_free(pc_masks* masks) { delete masks; }

pc_status pc_generate(const pc_document* doc, const pc_masks* masks, const pc_config* config, pc_backend* backend,
                      const char* intermediates_dir, pc_image** out) {
  return guarded([&] {
    require(doc, "doc");
    require(masks, "masks");
    require(config, "config");
    require(backend, "backend");
    require(out, "out");
    *out = nullptr;
    partcraft::GenerationOptions options;
    if (intermediates_dir != nullptr) options.intermediates_dir = intermediates_dir;
    auto img = std::make_unique<pc_image>();
    img->tensor = partcraft::generate(doc->doc, masks->masks, config->config, *backend->backend, options).image;
    *out = img.release();
  });
}

pc_status pc_image_dims(const pc_image* image, int* channels, int* height, int* width) {
  return guarded([&] {
    require(image, "image");
    const auto& s = image->tensor.shape();
    if (channels != nullptr) *channels = s.channels;
    if (height != nullptr) *height = s.height;
    if (width != nullptr) *width = s.width;
  });
}

const double* pc_image_data(const pc_image* image) { return image == nullptr ? nullptr : image->tensor.values().data(); }

pc_status pc_image_save_png(const pc_image* image, const char* path) {
  return guarded([&] {
    require(image, "image");
    require(path, "path");
    partcraft::write_png(path, partcraft::tensor_to_image(image->tensor));
  });
}

void pc_image_free(pc_image* image) { delete image; }

pc_status pc_evaluate(const char* dataset, const char* root, const char* grouping_path, const pc_config* config,
                      const char* captioner_json, char** out_report_json) {
  return guarded([&] {
    require(dataset, "dataset");
    require(root, "root");
    require(out_report_json, "out_report_json");
    const partcraft::PipelineConfig cfg =
        config != nullptr ? config->config : partcraft::config_profile("synthetic");
    const partcraft::Dataset data = partcraft::load_dataset(dataset, root);
    const partcraft::ClusterGrouping grouping = grouping_path != nullptr
                                                    ? partcraft::ClusterGrouping::load(grouping_path)
                                                    : partcraft::ClusterGrouping::builtin(dataset);
    std::unique_ptr<partcraft::Captioner> captioner;
    if (captioner_json != nullptr && *captioner_json != '\0') captioner = partcraft::make_captioner(captioner_json);
    std::unique_ptr<partcraft::DenoiserBackend> shared;
    if (cfg.backend.name != "synthetic") shared = partcraft::make_backend(cfg, nullptr);
    partcraft::EvaluationContext ctx;
    ctx.config = &cfg;
    ctx.backend = shared.get();
    ctx.captioner = captioner.get();
    const auto report = partcraft::evaluate_dataset(data, partcraft::default_pipeline(ctx), grouping);
    *out_report_json = dup_string(report.to_json());
  });
}

pc_status pc_synthetic_dataset_write(const char* root, int samples, uint64_t seed) {
  return guarded([&] {
    require(root, "root");
    partcraft::write_synthetic_dataset(root, samples, seed);
  });
}

pc_status pc_nearest_named_color(int r, int g, int b, char** out_name) {
  return guarded([&] {
    require(out_name, "out_name");
    if (r < 0 || r > 255 || g < 0 || g > 255 || b < 0 || b > 255) {
      throw partcraft::Error(partcraft::ErrorCode::kInvalidArgument, "color channels must be in 0..255");
    }
    *out_name = dup_string(partcraft::nearest_named_color(partcraft::Rgb{r, g, b}).name);
  });
}

pc_status pc_service_create(const char* config_json, pc_service** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    partcraft::ServiceOptions options = (config_json == nullptr || *config_json == '\0')
                                            ? partcraft::ServiceOptions{}
                                            : partcraft::parse_service_options(config_json);
    partcraft::apply_environment(options);
    auto s = std::make_unique<pc_service>();
    s->service = std::make_unique<partcraft::Service>(options);
    *out = s.release();
  });
}

pc_status pc_service_start(pc_service* service) {
  return guarded([&] {
    require(service, "service");
    service->service->start();
  });
}

int pc_service_port(const pc_service* service) { return service == nullptr ? 0 : service->service->port(); }

pc_status pc_service_wait(pc_service* service) {
  return guarded([&] {
    require(service, "service");
    service->service->wait();
  });
}

pc_status pc_service_stop(pc_service* service) {
  return guarded([&] {
    require(service, "service");
    service->service->stop();
  });
}

void pc_service_free(pc_service* service) { delete service; }

}  // extern "C"
