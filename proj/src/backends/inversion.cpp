// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#include "backends/inversion.hpp"

#include <cmath>

#include "backends/scheduler.hpp"
#include "core/error.hpp"

namespace partcraft {

InversionOptions inversion_options(const PipelineConfig& config) {
  InversionOptions o;
  o.steps = config.num_steps;
  o.guidance = config.inversion_guidance_scale;
  o.fixed_point_iterations = config.inversion_fixed_point_iterations;
  o.eta = config.eta;
  o.schedule = config.noise_schedule;
  return o;
}

InversionResult ddim_invert(DenoiserBackend& backend, const Tensor& image, const std::string& prompt,
                            const InversionOptions& options) {
  const DdimScheduler scheduler(options.schedule, options.steps, options.eta);
  if (!scheduler.deterministic()) {
    throw Error(ErrorCode::kConfiguration, "inversion requires a deterministic scheduler (eta = 0)");
  }
  InversionResult result;
  result.trajectory.push_back(backend.encode_image(image));
  if (options.steps == 0) return result;
  const TextConditioning cond = backend.encode_text(prompt);
  const TextConditioning uncond = backend.encode_text("");
  for (int s = 1; s <= options.steps; ++s) {
    const Tensor& prev = result.trajectory.back();
    const int t = scheduler.train_timestep(s);
    Tensor eps = guided_noise(backend, prev, cond, uncond, t, options.guidance, {});
    Tensor next = scheduler.invert_step(prev, eps, s);
    for (int it = 0; it < options.fixed_point_iterations; ++it) {
      eps = guided_noise(backend, next, cond, uncond, t, options.guidance, {});
      next = scheduler.invert_step(prev, eps, s);
    }
    result.trajectory.push_back(std::move(next));
  }
  return result;
}

Tensor ddim_denoise(DenoiserBackend& backend, const Tensor& x_t, const std::string& prompt,
                    const InversionOptions& options) {
  const DdimScheduler scheduler(options.schedule, options.steps, 0.0);
  const TextConditioning cond = backend.encode_text(prompt);
  const TextConditioning uncond = backend.encode_text("");
  Tensor x = x_t;
  for (int s = options.steps; s >= 1; --s) {
    const Tensor eps = guided_noise(backend, x, cond, uncond, scheduler.train_timestep(s), options.guidance, {});
    x = scheduler.step(x, eps, s);
  }
  return x;
}

NullTextResult null_text_optimize(DenoiserBackend& backend, const Tensor& image, const std::string& prompt,
                                  const NullTextOptions& options) {
  if (!backend.capabilities().optimizable_embeddings) {
    throw Error(ErrorCode::kCapability, "null-text requires optimizable embeddings");
  }
  InversionOptions plain = options.inversion;
  plain.guidance = 1.0;
  const InversionResult inverted = ddim_invert(backend, image, prompt, plain);
  const DdimScheduler scheduler(plain.schedule, plain.steps, 0.0);
  const TextConditioning cond = backend.encode_text(prompt);
  TextConditioning uncond = backend.encode_text("");
  const double g = options.guidance;

  NullTextResult result;
  result.noise = inverted.noise();
  result.uncond.resize(plain.steps);
  Tensor x = inverted.noise();
  for (int s = plain.steps; s >= 1; --s) {
    const int t = scheduler.train_timestep(s);
    const Tensor& target = inverted.trajectory[s - 1];
    const double a = scheduler.alpha_bar(s);
    const double a_prev = scheduler.alpha_bar(s - 1);
    // d x_{s-1} / d eps for the deterministic step.
    const double slope = std::sqrt(1.0 - a_prev) - std::sqrt(a_prev) * std::sqrt(1.0 - a) / std::sqrt(a);
    const Tensor eps_c = backend.predict_noise(x, cond, t, {});
    auto guided = [&](const TextConditioning& u) {
      Tensor eps = backend.predict_noise(x, u, t, {});
      for (std::size_t i = 0; i < eps.size(); ++i) eps[i] += g * (eps_c[i] - eps[i]);
      return eps;
    };
    for (int it = 0; it < options.iterations; ++it) {
      const Tensor next = scheduler.step(x, guided(uncond), s);
      Tensor grad_eps(next.shape());
      double loss = 0.0;
      for (std::size_t i = 0; i < next.size(); ++i) {
        const double r = next[i] - target[i];
        loss += r * r;
        grad_eps[i] = 2.0 * slope * r * (1.0 - g);
      }
      if (loss < 1e-14) break;
      const auto grad = backend.predict_noise_vjp_embedding(x, uncond, t, grad_eps);
      if (grad.size() != uncond.embeddings.size()) {
        throw Error(ErrorCode::kBackend, "embedding gradient has the wrong size");
      }
      for (std::size_t i = 0; i < grad.size(); ++i) uncond.embeddings[i] -= options.learning_rate * grad[i];
    }
    result.uncond[s - 1] = uncond;
    x = scheduler.step(x, guided(uncond), s);
  }
  return result;
}

Tensor null_text_denoise(DenoiserBackend& backend, const NullTextResult& result, const std::string& prompt,
                         const NullTextOptions& options) {
  const DdimScheduler scheduler(options.inversion.schedule, options.inversion.steps, 0.0);
  const TextConditioning cond = backend.encode_text(prompt);
  Tensor x = result.noise;
  for (int s = options.inversion.steps; s >= 1; --s) {
    const Tensor eps = guided_noise(backend, x, cond, result.uncond[s - 1], scheduler.train_timestep(s),
                                    options.guidance, {});
    x = scheduler.step(x, eps, s);
  }
  return x;
}

}  // namespace partcraft
