// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#include "evaluation/grouping.hpp"

#include <json.hpp>

#include "core/error.hpp"
#include "core/png_io.hpp"
#include "core/resources.hpp"
#include "core/text.hpp"

namespace partcraft {

ClusterGrouping ClusterGrouping::builtin(const std::string& dataset) {
  if (dataset == "cub" || dataset == "synthetic") return from_json(std::string(resource("grouping_cub.json")));
  if (dataset == "deepfashion") return from_json(std::string(resource("grouping_deepfashion.json")));
  throw Error(ErrorCode::kNotFound, "no built-in grouping for dataset '" + dataset + "'");
}

ClusterGrouping ClusterGrouping::from_json(const std::string& text) {
  ClusterGrouping g;
  try {
    const auto j = nlohmann::json::parse(text);
    g.dataset = j.value("dataset", std::string());
    for (const auto& [name, id] : j.at("clusters").items()) {
      const int cluster = id.get<int>();
      if (cluster < 0 || cluster > kMaxCluster) {
        throw Error(ErrorCode::kValidation, "cluster id for '" + name + "' outside 0..4");
      }
      g.clusters[normalize_name(name)] = cluster;
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kValidation, std::string("invalid grouping: ") + e.what());
  }
  return g;
}

ClusterGrouping ClusterGrouping::load(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  return from_json(std::string(bytes.begin(), bytes.end()));
}

std::string ClusterGrouping::to_json() const {
  return nlohmann::json{{"dataset", dataset}, {"clusters", clusters}}.dump(2);
}

int ClusterGrouping::cluster_of(const std::string& part) const {
  const auto it = clusters.find(normalize_name(part));
  if (it == clusters.end()) throw Error(ErrorCode::kNotFound, "part '" + part + "' has no cluster in the grouping");
  return it->second;
}

std::vector<std::string> ClusterGrouping::part_names() const {
  std::vector<std::string> out;
  for (const auto& [name, id] : clusters) {
    if (id != 0) out.push_back(name);
  }
  return out;
}

std::vector<int> group_parts(const PartMaskSet& masks, const ClusterGrouping& grouping) {
  const int h = masks.background_mask.height() > 0 ? masks.background_mask.height() : kMaskSize;
  const int w = masks.background_mask.width() > 0 ? masks.background_mask.width() : kMaskSize;
  std::vector<int> labels(static_cast<std::size_t>(h) * w, 0);
  for (const auto& part : masks.parts) {
    const int cluster = grouping.cluster_of(part.name);
    if (!part.mask.any()) continue;
    if (part.mask.height() != h || part.mask.width() != w) {
      throw Error(ErrorCode::kValidation, "part '" + part.name + "' mask has a different shape");
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (part.mask[i]) labels[i] = cluster;
    }
  }
  return labels;
}

}  // namespace partcraft
