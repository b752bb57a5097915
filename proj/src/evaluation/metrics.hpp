// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace partcraft {

// Mutual information over the arithmetic mean of the two entropies; 0 when
// either labeling has zero entropy.
double nmi(const std::vector<int>& a, const std::vector<int>& b);

// Adjusted Rand index from the contingency table; 1 when the chance-corrected
// denominator vanishes (e.g. both labelings constant).
double ari(const std::vector<int>& a, const std::vector<int>& b);

// Keeps positions where foreground is nonzero. Throws on an empty foreground.
std::pair<std::vector<int>, std::vector<int>> fg_restrict(const std::vector<int>& pred, const std::vector<int>& gt,
                                                          const std::vector<std::uint8_t>& foreground);

}  // namespace partcraft
