// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace partcraft {

// Part-branch strength as a function of the remaining step count.
struct AlphaSchedule {
  enum class Kind { kLinear, kConstant };
  Kind kind = Kind::kLinear;
  double start = 0.0;  // value at the first denoising step
  double end = 0.5;    // value at the last denoising step

  static AlphaSchedule constant(double v) { return {Kind::kConstant, v, v}; }

  // `step` counts remaining steps: num_steps for the first update, 1 for the last.
  double at(int step, int num_steps) const;
  bool operator==(const AlphaSchedule&) const = default;
};

enum class SelfAttentionSource { kBoth, kBase, kPart };

struct NoiseSchedule {
  double beta_start = 0.00085;
  double beta_end = 0.012;
  int train_steps = 1000;
  bool operator==(const NoiseSchedule&) const = default;
};

struct BackendSpec {
  std::string name = "synthetic";   // "synthetic" or "diffusion"
  std::string scene_json;           // synthetic: explicit scene, empty = plant from document
  std::string plugin_path;          // diffusion: shared object exporting the backend entry point
  std::string plugin_options_json;  // passed verbatim to the plugin
  bool operator==(const BackendSpec&) const = default;
};

struct PipelineConfig {
  std::string profile = "synthetic";
  int num_steps = 50;
  // Part denoising runs for steps t <= t_threshold (t counts remaining steps).
  int t_threshold = 25;
  AlphaSchedule alpha;
  double delta = 0.3;
  double epsilon_assign = 0.5;
  // 0 selects max(parts + 1, 4).
  int k_clusters = 0;
  double blend_fraction = 0.2;
  double guidance_scale = 1.0;
  std::uint64_t seed = 0;

  double color_guidance_weight = 0.5;
  bool color_guidance_after_cfg = true;
  double injection_fraction = 0.3;
  SelfAttentionSource self_attention_source = SelfAttentionSource::kBoth;
  // 0 selects the midpoint of the base run.
  int object_mask_step = 0;
  int kmeans_restarts = 10;

  double inversion_guidance_scale = 1.0;
  int inversion_fixed_point_iterations = 10;
  double eta = 0.0;
  NoiseSchedule noise_schedule;
  BackendSpec backend;

  int resolved_k(std::size_t part_count) const;
  int resolved_object_mask_step() const;
  // Number of final latents (x_{n-1} .. x_0) that receive the background blend.
  int blend_steps() const;

  bool operator==(const PipelineConfig&) const = default;
};

// Built-in operating points: "synthetic", "sd21-eval", "sd15-gen".
PipelineConfig config_profile(std::string_view name);

// Starts from `profile` (default "synthetic") and applies overrides. Unknown
// keys, out-of-range values and unknown backend names raise kConfiguration
// with field errors.
PipelineConfig parse_pipeline_config(std::string_view json);
std::string serialize_pipeline_config(const PipelineConfig& config);
void validate_config(const PipelineConfig& config);

}  // namespace partcraft
