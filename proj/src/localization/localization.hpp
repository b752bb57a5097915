// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "attention/attention.hpp"
#include "backends/backend.hpp"
#include "core/config.hpp"
#include "core/document.hpp"
#include "core/part_masks.hpp"
#include "localization/spectral.hpp"

namespace partcraft {

// Per-part token vectors, each taken from its own template sentence.
struct PartEmbeddingSet {
  std::vector<std::string> names;
  std::vector<std::vector<std::string>> tokens;
  std::vector<std::vector<double>> embeddings;  // tokens[i].size() × dim each
  int dim = 0;
};

std::string part_template(const std::string& part, const std::string& object);
PartEmbeddingSet embed_parts_independently(const RichPromptDocument& doc, DenoiserBackend& backend);
// Part-branch conditioning: <sot> followed by every part's vectors in
// declaration order.
TextConditioning assemble_part_conditioning(const PartEmbeddingSet& parts, DenoiserBackend& backend);

// Token indices per part inside assembled part conditioning.
std::vector<PartTokens> part_token_indices(const TextConditioning& part_cond);
// Indices of the object's tokens inside `cond` (<sot> offset included).
std::vector<int> object_token_indices(const TextConditioning& cond, const std::string& object);

// Expands a 32×32 mask to a latent-shaped tensor of 0/1 (nearest neighbour).
Tensor mask_to_latent(const Mask2D& mask, const Shape& shape);

// alpha * M ⊙ part + (1 - alpha * M) ⊙ base.
Tensor blended_noise(const Tensor& base_pred, const Tensor& part_pred, const Tensor& latent_mask, double alpha);
Tensor blended_noise(const Tensor& base_pred, const Tensor& part_pred, const Mask2D& object_mask, double alpha);

// Union of segments whose mean object attention reaches the global mean.
Mask2D extract_object_mask(const AttentionBundle& base_attention, const std::vector<int>& object_tokens, int k,
                           std::uint64_t seed, int restarts = 10);

struct PartDiffusionResult {
  Tensor final_latent;
  Mask2D object_mask;
  int object_mask_step = 0;
  AttentionBundle base_attention;  // base branch, steps above the part threshold
  AttentionBundle part_attention;  // part branch, steps <= t_threshold
  std::optional<AttentionBundle> base_part_steps;  // base branch, steps <= t_threshold
  TextConditioning part_conditioning;
};

// Base-only denoising; `trajectory`, when given, receives x_s at index s.
Tensor denoise_base(const RichPromptDocument& doc, const PipelineConfig& config, DenoiserBackend& backend,
                    const Tensor* initial = nullptr, std::vector<Tensor>* trajectory = nullptr);

PartDiffusionResult run_part_diffusion(const RichPromptDocument& doc, const PipelineConfig& config,
                                       DenoiserBackend& backend, const Tensor* initial = nullptr);

bool localization_test(const Map2D& normalized, int k, double delta);
Map2D conditional_normalize(const Map2D& normalized, bool localized);

// Dot product of every segment indicator with every part map; a segment goes
// to the best-scoring part when that score reaches epsilon. With an object
// mask, segments lying mostly outside it go to the background and part masks
// are clipped to it.
PartMaskSet assign_segments(const SegmentMap& segments, const std::vector<Map2D>& part_maps,
                            const std::vector<std::string>& part_names, double epsilon,
                            const Mask2D* object_mask = nullptr);

struct LocalizationDebug {
  std::vector<std::string> part_names;
  std::vector<Map2D> normalized;        // Eq.-3 maps
  std::vector<Map2D> assignment_maps;   // after conditional normalization
  std::vector<double> scores;
  std::vector<bool> localized;
  SegmentMap segments;
  Mask2D object_mask;
};

PartMaskSet localize(const RichPromptDocument& doc, const PipelineConfig& config, DenoiserBackend& backend,
                     const Tensor* initial = nullptr, LocalizationDebug* debug = nullptr);

}  // namespace partcraft
