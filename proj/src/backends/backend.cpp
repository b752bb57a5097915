// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#include "backends/backend.hpp"

#include <random>

#include "core/error.hpp"

namespace partcraft {

void throw_capability(const std::string& backend, const std::string& what) {
  throw Error(ErrorCode::kCapability, backend + " backend does not support " + what);
}

Tensor DenoiserBackend::encode_image(const Tensor&) { throw_capability(name(), "image encoding"); }
Tensor DenoiserBackend::decode_image(const Tensor&) { throw_capability(name(), "image decoding"); }
Tensor DenoiserBackend::decode_vjp(const Tensor&, const Tensor&) {
  throw_capability(name(), "decoder gradients");
}
std::vector<double> DenoiserBackend::predict_noise_vjp_embedding(const Tensor&, const TextConditioning&,
                                                                 int, const Tensor&) {
  throw Error(ErrorCode::kCapability, "null-text requires optimizable embeddings");
}

Tensor DenoiserBackend::initial_noise(std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Tensor t(latent_shape());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = normal(rng);
  return t;
}

Tensor guided_noise(DenoiserBackend& backend, const Tensor& x, const TextConditioning& cond,
                    const TextConditioning& uncond, int train_timestep, double guidance,
                    const AttentionControl& control) {
  Tensor eps_c = backend.predict_noise(x, cond, train_timestep, control);
  if (guidance == 1.0) return eps_c;
  AttentionControl plain;
  plain.injected_self = control.injected_self;
  const Tensor eps_u = backend.predict_noise(x, uncond, train_timestep, plain);
  for (std::size_t i = 0; i < eps_c.size(); ++i) {
    eps_c[i] = eps_u[i] + guidance * (eps_c[i] - eps_u[i]);
  }
  return eps_c;
}

}  // namespace partcraft
