// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string_view>

namespace partcraft {

// Returns the contents of a data file compiled into the library
// (named_colors.json, grouping_cub.json, grouping_deepfashion.json,
// rich_document.schema.json). Throws kNotFound for unknown names.
std::string_view resource(std::string_view name);

}  // namespace partcraft
