// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "backends/backend.hpp"
#include "backends/scheduler.hpp"
#include "core/config.hpp"
#include "core/document.hpp"
#include "core/part_masks.hpp"
#include "generation/named_colors.hpp"

namespace partcraft {

// Name, replaced by the footnote when present, then " in style of <style>",
// then prefixed by the nearest named color.
std::string build_region_prompt(const PartSpec& part, const NamedColorTable& table = NamedColorTable::builtin());

struct RegionProcess {
  std::string name;  // "" for the background process
  Mask2D mask;
  std::string prompt;
  TextConditioning conditioning;
  double size_weight = 1.0;
  std::optional<Rgb> color_target;
  bool inject_self = false;
};

// Per-position selection of the owning process's prediction (the masks
// partition the grid, so the masked sum reduces to a lookup). Throws
// kValidation when the masks do not partition the grid.
Tensor fuse_region_noise(const std::vector<RegionProcess>& processes, const RegionProcess& background,
                         const std::vector<Tensor>& predictions, const Tensor& background_prediction);

// Gradient added to a region's noise prediction so that the estimated clean
// image moves towards the target color inside the region:
//   weight * sqrt(a)/sqrt(1-a) * J_decode^T [2 M (decode(x0_hat) - c)].
// Throws kCapability "color guidance unavailable" without decoder gradients.
Tensor color_guidance_gradient(const Tensor& x_t, const Tensor& eps, int step, const DdimScheduler& scheduler,
                               const RegionProcess& process, DenoiserBackend& backend, double weight);

// Adds ln(size_weight) to the logits at `positions`, which multiplies their
// post-softmax weight by size_weight before renormalization.
std::vector<double> apply_size_weight(const std::vector<double>& logits, const std::vector<int>& positions,
                                      double size_weight);
std::vector<double> softmax(const std::vector<double>& logits);
// Per-token logit offsets for a region's conditioning (empty when weight is 1).
std::vector<double> size_weight_offsets(const TextConditioning& cond, const std::string& part_name,
                                        double size_weight);

// x <- M_b ⊙ x_base + (1 - M_b) ⊙ x when step <= blend_start; blend_start < 0
// disables blending.
Tensor background_blend(const Tensor& x, const Tensor& x_base, const Mask2D& background_mask, int step,
                        int blend_start);

// Base-run self-attention kept for injection, keyed by step.
struct SelfInjectionRecord {
  int first_step = 0;  // injection covers first_step .. num_steps
  std::map<int, SelfAttentionRef> maps;
  bool covers(int step) const { return step >= first_step && maps.count(step) > 0; }
  SelfAttentionRef at(int step) const;
};

struct GenerationResult {
  Tensor image;
  Tensor latent;
  std::vector<RegionProcess> regions;  // background last
  std::vector<Tensor> base_trajectory;  // x_s at index s
};

struct GenerationOptions {
  std::string intermediates_dir;  // empty = none
  const Tensor* initial = nullptr;
};

GenerationResult generate(const RichPromptDocument& doc, const PartMaskSet& masks, const PipelineConfig& config,
                          DenoiserBackend& backend, const GenerationOptions& options = {});

}  // namespace partcraft
