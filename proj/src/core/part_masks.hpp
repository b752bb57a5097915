// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "core/tensor.hpp"

namespace partcraft {

struct PartMask {
  std::string name;
  Mask2D mask;
  bool localized = false;
  // Spatial max of the part's normalized cross-attention (the localization
  // statistic).
  double score = 0.0;
};

// Localization output. Parts keep declaration order.
struct PartMaskSet {
  Mask2D object_mask;
  std::vector<PartMask> parts;
  Mask2D background_mask;

  const PartMask* find(std::string_view name) const;

  // Disjoint part masks, background completing the partition, and every part
  // mask inside the object mask (or empty). Throws kValidation otherwise.
  void validate() const;
  bool is_partition() const;
};

// Background mask that completes `parts` to a partition of the grid.
Mask2D complement_of_parts(const std::vector<PartMask>& parts, int height, int width);

}  // namespace partcraft
