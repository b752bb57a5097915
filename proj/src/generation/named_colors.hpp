// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "core/document.hpp"

namespace partcraft {

struct NamedColor {
  std::string name;
  Rgb rgb;
};

struct NamedColorTable {
  std::string version;
  std::vector<NamedColor> entries;

  // The shipped table (CSS named colors, alphabetical).
  static const NamedColorTable& builtin();
  static NamedColorTable from_json(const std::string& json);
  std::string to_json() const;
};

// Entry with the smallest Euclidean RGB distance; the earlier entry wins ties.
const NamedColor& nearest_named_color(const Rgb& rgb, const NamedColorTable& table = NamedColorTable::builtin());

}  // namespace partcraft
