// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "attention/attention.hpp"
#include "core/config.hpp"
#include "core/tensor.hpp"

namespace partcraft {

struct TextConditioning {
  std::string prompt;
  std::vector<std::string> tokens;  // tokens[0] is the start-of-text marker
  std::vector<double> embeddings;   // tokens.size() × dim, row-major
  int dim = 0;
  // Set on part-branch conditioning assembled from per-part embeddings.
  bool assembled = false;
  // Assembled conditioning only: owning part name per token ("" for <sot>).
  std::vector<std::string> token_owner;

  std::size_t size() const { return tokens.size(); }
  bool operator==(const TextConditioning&) const = default;
};

struct BackendCapabilities {
  bool attention_capture = false;
  bool attention_reweight = false;
  bool self_injection = false;
  bool image_codec = false;
  bool decode_vjp = false;
  bool optimizable_embeddings = false;
};

// Per-call hooks. Everything is optional; an empty control means a plain
// prediction.
struct AttentionControl {
  AttentionSink* sink = nullptr;
  int step = 0;  // remaining-step index, stamped on emitted captures
  // Added to the cross-attention logits per token before the softmax
  // (ln of the size weight). Empty or shorter than the token count = 0.
  std::vector<double> token_log_weights;
  // Replaces the backend's own self-attention when set.
  SelfAttentionRef injected_self;
  // Receives the self-attention the backend actually used at this call.
  std::function<void(SelfAttentionRef)> record_self;
};

class DenoiserBackend {
 public:
  virtual ~DenoiserBackend() = default;

  virtual std::string name() const = 0;
  virtual BackendCapabilities capabilities() const = 0;
  virtual Shape latent_shape() const = 0;
  virtual Shape image_shape() const = 0;

  virtual TextConditioning encode_text(const std::string& prompt) = 0;
  virtual Tensor predict_noise(const Tensor& x, const TextConditioning& cond, int train_timestep,
                               const AttentionControl& control) = 0;

  virtual Tensor encode_image(const Tensor& image);
  virtual Tensor decode_image(const Tensor& latent);
  // Vector-Jacobian product of decode_image at `latent`.
  virtual Tensor decode_vjp(const Tensor& latent, const Tensor& grad_image);
  // Gradient of <grad_eps, predict_noise(x, cond, t)> with respect to
  // cond.embeddings.
  virtual std::vector<double> predict_noise_vjp_embedding(const Tensor& x, const TextConditioning& cond,
                                                          int train_timestep, const Tensor& grad_eps);

  // Standard-normal latent from a seeded mt19937_64.
  virtual Tensor initial_noise(std::uint64_t seed) const;
};

[[noreturn]] void throw_capability(const std::string& backend, const std::string& what);

// Classifier-free guidance: eps_u + g (eps_c - eps_u). With g == 1 only the
// conditional branch runs. Hooks attach to the conditional pass only.
Tensor guided_noise(DenoiserBackend& backend, const Tensor& x, const TextConditioning& cond,
                    const TextConditioning& uncond, int train_timestep, double guidance,
                    const AttentionControl& control);

}  // namespace partcraft
