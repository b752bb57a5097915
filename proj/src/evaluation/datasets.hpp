// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/tensor.hpp"

namespace partcraft {

struct Keypoint {
  std::string name;
  double x = 0.0;
  double y = 0.0;
  bool visible = true;
};

enum class GroundTruthKind { kLabelMask, kKeypoints };

struct EvalSample {
  std::string id;
  std::string image_path;
  std::optional<std::string> caption;
  GroundTruthKind kind = GroundTruthKind::kLabelMask;
  int height = 0;  // ground-truth resolution
  int width = 0;
  // kLabelMask: per-pixel category name index (into Dataset::categories).
  std::vector<int> labels;
  // kKeypoints: annotated keypoints in image pixel coordinates.
  std::vector<Keypoint> keypoints;
  std::vector<std::uint8_t> foreground;  // height × width, nonzero = fg
  std::vector<std::string> parts;        // optional per-sample part list
  std::string scene_json;                // synthetic samples only
  std::string load_error;                // set when the sample files failed to load
};

struct Dataset {
  std::string kind;  // deepfashion | cub | synthetic
  std::string object;
  std::vector<std::string> categories;
  std::vector<EvalSample> samples;
};

// Reads <root>/index.json and the files it references. Missing per-sample
// files make that sample fail later rather than aborting the load.
Dataset load_dataset(const std::string& kind, const std::string& root);

// Tab-separated "name x y visible" lines.
std::vector<Keypoint> parse_keypoints(const std::string& text);

// Writes a synthetic dataset whose samples are planted scenes with CUB part
// names from distinct clusters.
void write_synthetic_dataset(const std::string& root, int samples, std::uint64_t seed);

Tensor load_image(const std::string& path);

}  // namespace partcraft
