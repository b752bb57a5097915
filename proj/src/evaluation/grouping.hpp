// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <vector>

#include "core/part_masks.hpp"

namespace partcraft {

inline constexpr int kMaxCluster = 4;

// Part name -> cluster id in 0..4, 0 being background.
struct ClusterGrouping {
  std::string dataset;
  std::map<std::string, int> clusters;  // keys normalized

  // "cub" or "deepfashion" (the synthetic dataset uses "cub").
  static ClusterGrouping builtin(const std::string& dataset);
  static ClusterGrouping from_json(const std::string& json);
  static ClusterGrouping load(const std::string& path);
  std::string to_json() const;

  // Throws kNotFound naming the part when unmapped.
  int cluster_of(const std::string& part) const;
  // Names with a nonzero cluster, in key order.
  std::vector<std::string> part_names() const;
};

// Label grid (row-major) of cluster ids; background and empty masks give 0.
std::vector<int> group_parts(const PartMaskSet& masks, const ClusterGrouping& grouping);

}  // namespace partcraft
