// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/part_masks.hpp"

#include "core/error.hpp"
#include "core/text.hpp"

namespace partcraft {

const PartMask* PartMaskSet::find(std::string_view name) const {
  const std::string key = normalize_name(name);
  for (const PartMask& p : parts) {
    if (normalize_name(p.name) == key) return &p;
  }
  return nullptr;
}

bool PartMaskSet::is_partition() const {
  const std::size_t n = background_mask.size();
  for (const PartMask& p : parts) {
    if (!p.mask.same_shape(background_mask)) return false;
  }
  for (std::size_t i = 0; i < n; ++i) {
    int owners = background_mask[i] ? 1 : 0;
    for (const PartMask& p : parts) owners += p.mask[i] ? 1 : 0;
    if (owners != 1) return false;
  }
  return true;
}

void PartMaskSet::validate() const {
  if (!is_partition()) {
    throw Error(ErrorCode::kValidation,
                "part and background masks do not partition the grid");
  }
  for (const PartMask& p : parts) {
    if (p.mask.any() && !object_mask.same_shape(p.mask)) {
      throw Error(ErrorCode::kValidation, "part '" + p.name + "' mask shape differs from object mask");
    }
    if (p.mask.any() && (p.mask & ~object_mask).any()) {
      throw Error(ErrorCode::kValidation, "part '" + p.name + "' extends outside the object mask");
    }
  }
}

Mask2D complement_of_parts(const std::vector<PartMask>& parts, int height, int width) {
  Mask2D covered(height, width);
  for (const PartMask& p : parts) covered = covered | p.mask;
  return ~covered;
}

}  // namespace partcraft
