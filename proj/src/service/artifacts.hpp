// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "core/part_masks.hpp"
#include "generation/generation.hpp"
#include "localization/localization.hpp"

namespace partcraft {

// {part: {file, localized, score}} in declaration order.
std::string masks_to_json(const PartMaskSet& masks);

// File name used for a part's mask PNG ("mask_<index>_<slug>.png").
std::string mask_file_name(std::size_t index, const std::string& part);

// Writes masks.json, one PNG per part, object.png and background.png.
// Returns the written artifact names.
std::vector<std::string> save_masks(const std::string& dir, const PartMaskSet& masks);

// Reads a directory produced by save_masks.
PartMaskSet load_masks(const std::string& dir);

// attention/attn_<i>.png and attention/index.json from the localization debug.
std::vector<std::string> save_attention_debug(const std::string& dir, const LocalizationDebug& debug);

// image.png and prompts.json.
std::vector<std::string> save_generation(const std::string& dir, const GenerationResult& result);

std::string content_type_for(const std::string& name);

}  // namespace partcraft
