// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "core/tensor.hpp"

namespace partcraft {

// Cluster labels over the 32×32 grid. Labels are numbered by first
// occurrence in row-major order, so every label < k is used.
struct SegmentMap {
  int height = kMaskSize;
  int width = kMaskSize;
  int k = 0;
  std::vector<int> labels;

  int label_count() const;
  Mask2D segment(int label) const;
  bool operator==(const SegmentMap&) const = default;
};

// Seeded k-means++ with `restarts` independent initializations; the lowest
// inertia wins (earliest on ties). Points are row-major n × dim.
std::vector<int> kmeans(const std::vector<double>& points, int n, int dim, int k, std::uint64_t seed,
                        int restarts = 10);

// Spectral embedding: k eigenvectors of the symmetric normalized Laplacian
// with the smallest eigenvalues, rows normalized to unit length.
std::vector<double> spectral_embedding(const std::vector<double>& affinity, int n, int k);

// Symmetrizes `affinity` (n × n, n = height*width), embeds and clusters.
SegmentMap cluster_attention(const std::vector<double>& affinity, int k, std::uint64_t seed, int restarts = 10,
                             int height = kMaskSize, int width = kMaskSize);

// Relabels so labels appear in increasing order of first occurrence.
std::vector<int> canonical_labels(const std::vector<int>& labels);

}  // namespace partcraft
