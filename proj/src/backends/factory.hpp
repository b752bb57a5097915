// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>

#include "backends/backend.hpp"
#include "core/config.hpp"
#include "core/document.hpp"

namespace partcraft {

// Backend selected by config.backend.name. The synthetic backend uses the
// configured scene or, failing that, plants the parts of `doc` (seeded by
// config.seed). `doc` may be null when a scene is configured.
std::unique_ptr<DenoiserBackend> make_backend(const PipelineConfig& config, const RichPromptDocument* doc);

}  // namespace partcraft
