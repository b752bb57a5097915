// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "backends/backend.hpp"
#include "core/config.hpp"

namespace partcraft {

struct InversionOptions {
  int steps = 50;
  double guidance = 1.0;
  // Refinements of each inverted latent so that re-denoising evaluates the
  // model at the same point the inversion did.
  int fixed_point_iterations = 10;
  double eta = 0.0;
  NoiseSchedule schedule;
};

InversionOptions inversion_options(const PipelineConfig& config);

struct InversionResult {
  // trajectory[s] = x_s for s = 0 .. steps; trajectory[0] is the encoded image.
  std::vector<Tensor> trajectory;
  const Tensor& noise() const { return trajectory.back(); }
};

InversionResult ddim_invert(DenoiserBackend& backend, const Tensor& image, const std::string& prompt,
                            const InversionOptions& options);

// Deterministic denoising from x_steps to x_0 (latent space).
Tensor ddim_denoise(DenoiserBackend& backend, const Tensor& x_t, const std::string& prompt,
                    const InversionOptions& options);

struct NullTextOptions {
  InversionOptions inversion;  // inversion itself runs at guidance 1
  double guidance = 7.5;       // guidance the reconstruction will use
  int iterations = 10;
  double learning_rate = 0.5;
};

struct NullTextResult {
  Tensor noise;
  // uncond[s - 1]: unconditional conditioning used at step s.
  std::vector<TextConditioning> uncond;
};

// Requires optimizable embeddings; otherwise throws kCapability
// "null-text requires optimizable embeddings".
NullTextResult null_text_optimize(DenoiserBackend& backend, const Tensor& image, const std::string& prompt,
                                  const NullTextOptions& options);
Tensor null_text_denoise(DenoiserBackend& backend, const NullTextResult& result, const std::string& prompt,
                         const NullTextOptions& options);

}  // namespace partcraft
