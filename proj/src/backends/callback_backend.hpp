// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>

#include "backends/backend.hpp"
#include "partcraft/partcraft.h"

namespace partcraft {

// Adapts an externally implemented model (C callback table) to the backend
// contract. Owns callbacks.user_data and, when loaded from a plugin, the
// shared-object handle.
class CallbackBackend : public DenoiserBackend {
 public:
  CallbackBackend(const pc_backend_callbacks& callbacks, std::string name = "diffusion");
  ~CallbackBackend() override;
  CallbackBackend(const CallbackBackend&) = delete;
  CallbackBackend& operator=(const CallbackBackend&) = delete;

  static std::unique_ptr<CallbackBackend> load_plugin(const std::string& path, const std::string& options_json);

  std::string name() const override { return name_; }
  BackendCapabilities capabilities() const override;
  Shape latent_shape() const override;
  Shape image_shape() const override;

  TextConditioning encode_text(const std::string& prompt) override;
  Tensor predict_noise(const Tensor& x, const TextConditioning& cond, int train_timestep,
                       const AttentionControl& control) override;
  Tensor encode_image(const Tensor& image) override;
  Tensor decode_image(const Tensor& latent) override;
  Tensor decode_vjp(const Tensor& latent, const Tensor& grad_image) override;
  std::vector<double> predict_noise_vjp_embedding(const Tensor& x, const TextConditioning& cond,
                                                  int train_timestep, const Tensor& grad_eps) override;

 private:
  pc_backend_callbacks cb_;
  std::string name_;
  void* library_ = nullptr;
};

}  // namespace partcraft
