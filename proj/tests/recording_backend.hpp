// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "backends/backend.hpp"

namespace testing {

// Forwards to another backend and remembers every noise-prediction call.
class RecordingBackend : public partcraft::DenoiserBackend {
 public:
  struct Call {
    int step = 0;
    int train_timestep = 0;
    std::string prompt;
    partcraft::Tensor x;
    partcraft::SelfAttentionRef injected;
    partcraft::SelfAttentionRef used;
  };

  explicit RecordingBackend(partcraft::DenoiserBackend& inner) : inner_(inner) {}

  std::vector<Call> calls;

  std::string name() const override { return inner_.name(); }
  partcraft::BackendCapabilities capabilities() const override { return inner_.capabilities(); }
  partcraft::Shape latent_shape() const override { return inner_.latent_shape(); }
  partcraft::Shape image_shape() const override { return inner_.image_shape(); }
  partcraft::TextConditioning encode_text(const std::string& prompt) override { return inner_.encode_text(prompt); }

  partcraft::Tensor predict_noise(const partcraft::Tensor& x, const partcraft::TextConditioning& cond, int t,
                                  const partcraft::AttentionControl& control) override {
    Call call{control.step, t, cond.prompt, x, control.injected_self, nullptr};
    partcraft::AttentionControl forwarded = control;
    forwarded.record_self = [&call, &control](partcraft::SelfAttentionRef ref) {
      call.used = ref;
      if (control.record_self) control.record_self(ref);
    };
    partcraft::Tensor eps = inner_.predict_noise(x, cond, t, forwarded);
    calls.push_back(std::move(call));
    return eps;
  }

  partcraft::Tensor encode_image(const partcraft::Tensor& image) override { return inner_.encode_image(image); }
  partcraft::Tensor decode_image(const partcraft::Tensor& latent) override { return inner_.decode_image(latent); }
  partcraft::Tensor decode_vjp(const partcraft::Tensor& latent, const partcraft::Tensor& grad) override {
    return inner_.decode_vjp(latent, grad);
  }
  partcraft::Tensor initial_noise(std::uint64_t seed) const override { return inner_.initial_noise(seed); }

 private:
  partcraft::DenoiserBackend& inner_;
};

}  // namespace testing
