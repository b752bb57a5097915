// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#include "backends/factory.hpp"

#include "backends/callback_backend.hpp"
#include "backends/synthetic.hpp"
#include "core/error.hpp"

namespace partcraft {

std::unique_ptr<DenoiserBackend> make_backend(const PipelineConfig& config, const RichPromptDocument* doc) {
  const BackendSpec& spec = config.backend;
  if (spec.name == "synthetic") {
    SyntheticScene scene;
    if (!spec.scene_json.empty()) {
      scene = scene_from_json(spec.scene_json);
    } else if (doc) {
      scene = scene_for_document(*doc, config.seed);
    } else {
      throw Error(ErrorCode::kConfiguration, "synthetic backend needs a scene or a document",
                  {{"synthetic_scene", "required without a document"}});
    }
    return std::make_unique<SyntheticBackend>(std::move(scene), config.noise_schedule);
  }
  if (spec.name == "diffusion") {
    return CallbackBackend::load_plugin(spec.plugin_path, spec.plugin_options_json);
  }
  throw Error(ErrorCode::kConfiguration, "unknown backend '" + spec.name + "'",
              {{"backend", "unknown backend '" + spec.name + "'"}});
}

}  // namespace partcraft
