// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "backends/backend.hpp"
#include "core/document.hpp"

namespace partcraft {

// Half-open rectangle [y0, y1) × [x0, x1) on the 32×32 grid.
struct Rect {
  int y0 = 0;
  int x0 = 0;
  int y1 = 0;
  int x1 = 0;
  int height() const { return y1 - y0; }
  int width() const { return x1 - x0; }
  int area() const { return height() * width(); }
  bool contains(int y, int x) const { return y >= y0 && y < y1 && x >= x0 && x < x1; }
  bool operator==(const Rect&) const = default;
};

using Color3 = std::array<double, 3>;

struct PlantedPart {
  std::string name;
  Rect region;
  Color3 color{};
  bool operator==(const PlantedPart&) const = default;
};

struct SyntheticScene {
  std::string object = "object";
  std::string base_prompt;  // empty = "a photo of a <object>"
  Rect object_region{8, 8, 24, 24};
  Color3 background{0.2, 0.4, 0.7};
  Color3 object_color{0.6, 0.5, 0.3};  // object pixels not covered by a part
  std::vector<PlantedPart> parts;

  double attention_noise = 0.01;  // cross-attention, per head
  double self_noise = 0.01;       // self-attention affinity, per head
  double hotspot = 1.0;
  double floor = 0.2;             // present-part score outside its hotspot
  double object_affinity = 0.2;   // between different regions of the object
  double prior_sigma = 0.1;
  double texture = 0.15;
  std::uint64_t seed = 0;

  std::string effective_base_prompt() const;
  Mask2D object_mask() const;
  // Empty mask when `name` is not planted.
  Mask2D part_mask(const std::string& name) const;
  const PlantedPart* find(const std::string& name) const;
  // Region id per position: 0 background, 1..n parts, n+1 uncovered object.
  std::vector<int> region_ids() const;
  void validate() const;
  bool operator==(const SyntheticScene&) const = default;
};

std::string scene_to_json(const SyntheticScene& scene);
SyntheticScene scene_from_json(const std::string& json);

// Object block guillotine-split into one rectangle per name (the parts tile
// the object). Names are assigned to rectangles in random order.
SyntheticScene random_scene(std::uint64_t seed, const std::vector<std::string>& part_names,
                            const std::string& object = "object");
// Plants every part declared in `doc`.
SyntheticScene scene_for_document(const RichPromptDocument& doc, std::uint64_t seed);

// Pixel-space backend whose noise prediction is the posterior-mean denoiser of
// a per-pixel Gaussian prior centred on a prompt-dependent colour field,
// smoothed by its self-attention. Attention maps are planted by the scene.
class SyntheticBackend : public DenoiserBackend {
 public:
  SyntheticBackend(SyntheticScene scene, NoiseSchedule schedule = {});

  const SyntheticScene& scene() const { return scene_; }

  std::string name() const override { return "synthetic"; }
  BackendCapabilities capabilities() const override;
  Shape latent_shape() const override { return {3, kMaskSize, kMaskSize}; }
  Shape image_shape() const override { return latent_shape(); }

  TextConditioning encode_text(const std::string& prompt) override;
  Tensor predict_noise(const Tensor& x, const TextConditioning& cond, int train_timestep,
                       const AttentionControl& control) override;

  Tensor encode_image(const Tensor& image) override;
  Tensor decode_image(const Tensor& latent) override;
  Tensor decode_vjp(const Tensor& latent, const Tensor& grad_image) override;

  // Raw (pre-softmax-normalization) cross-attention score per token,
  // before head noise and reweighting.
  std::vector<Map2D> planted_scores(const TextConditioning& cond) const;
  // Colour field the prompt pulls towards, before self-attention smoothing.
  Tensor target_field(const TextConditioning& cond);

  static constexpr int kHeads = 2;
  static constexpr int kEmbeddingDim = 16;
  static constexpr double kCrossBudget = 8.0;

 private:
  struct SelfAttentionSet {
    std::vector<std::vector<float>> heads;
    SelfAttentionRef mean;
  };

  bool is_base_prompt(const TextConditioning& cond) const;
  const SelfAttentionSet& self_attention_for(const TextConditioning& cond) const;
  const Tensor& smoothed_mean(const TextConditioning& cond, const SelfAttentionRef& p);
  void emit_cross(const TextConditioning& cond, const AttentionControl& control) const;
  std::string cond_key(const TextConditioning& cond) const;

  SyntheticScene scene_;
  std::vector<double> cumprod_;
  Tensor base_field_;
  SelfAttentionSet structured_;
  SelfAttentionSet diffuse_;
  std::map<std::string, Tensor> field_cache_;
  std::map<std::pair<std::string, const SelfAttentionMap*>, std::pair<SelfAttentionRef, Tensor>> mean_cache_;
};

}  // namespace partcraft
