// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#include "generation/generation.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include <json.hpp>

#include "core/error.hpp"
#include "core/png_io.hpp"
#include "core/text.hpp"

namespace partcraft {

std::string build_region_prompt(const PartSpec& part, const NamedColorTable& table) {
  std::string text = part.name;
  if (part.footnote && !part.footnote->empty()) text = *part.footnote;
  if (part.style && !part.style->empty()) text += " in style of " + *part.style;
  if (part.color) text = nearest_named_color(*part.color, table).name + " " + text;
  return text;
}

Tensor fuse_region_noise(const std::vector<RegionProcess>& processes, const RegionProcess& background,
                         const std::vector<Tensor>& predictions, const Tensor& background_prediction) {
  if (predictions.size() != processes.size()) {
    throw Error(ErrorCode::kInvalidArgument, "one prediction per region process required");
  }
  const Shape shape = background_prediction.shape();
  for (const auto& p : predictions) {
    if (p.shape() != shape) throw Error(ErrorCode::kInvalidArgument, "region predictions differ in shape");
  }
  const Mask2D& bg = background.mask;
  for (std::size_t i = 0; i < bg.size(); ++i) {
    int owners = bg[i] ? 1 : 0;
    for (const auto& p : processes) {
      if (!p.mask.same_shape(bg)) throw Error(ErrorCode::kValidation, "region masks differ in shape");
      owners += p.mask[i] ? 1 : 0;
    }
    if (owners != 1) throw Error(ErrorCode::kValidation, "region masks do not partition the grid");
  }
  // Owner per latent position: -1 = background.
  std::vector<int> owner(static_cast<std::size_t>(shape.height) * shape.width, -1);
  for (std::size_t r = 0; r < processes.size(); ++r) {
    const Mask2D m = processes[r].mask.resized(shape.height, shape.width);
    for (std::size_t i = 0; i < owner.size(); ++i) {
      if (m[i]) owner[i] = static_cast<int>(r);
    }
  }
  Tensor out = background_prediction;
  const std::size_t plane = owner.size();
  for (int c = 0; c < shape.channels; ++c) {
    for (std::size_t i = 0; i < plane; ++i) {
      if (owner[i] >= 0) out[c * plane + i] = predictions[owner[i]][c * plane + i];
    }
  }
  return out;
}

Tensor color_guidance_gradient(const Tensor& x_t, const Tensor& eps, int step, const DdimScheduler& scheduler,
                               const RegionProcess& process, DenoiserBackend& backend, double weight) {
  if (!process.color_target) return Tensor(x_t.shape(), 0.0);
  const BackendCapabilities caps = backend.capabilities();
  if (!caps.image_codec || !caps.decode_vjp) {
    throw Error(ErrorCode::kCapability, "color guidance unavailable");
  }
  const Tensor x0 = scheduler.predict_x0(x_t, eps, step);
  const Tensor image = backend.decode_image(x0);
  const Shape s = image.shape();
  if (s.channels != 3) throw Error(ErrorCode::kCapability, "color guidance unavailable");
  const Mask2D mask = process.mask.resized(s.height, s.width);
  const double target[3] = {process.color_target->r / 255.0, process.color_target->g / 255.0,
                            process.color_target->b / 255.0};
  Tensor grad_image(s, 0.0);
  const std::size_t plane = static_cast<std::size_t>(s.height) * s.width;
  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < plane; ++i) {
      if (mask[i]) grad_image[c * plane + i] = 2.0 * (image[c * plane + i] - target[c]);
    }
  }
  Tensor grad = backend.decode_vjp(x0, grad_image);
  const double a = scheduler.alpha_bar(step);
  const double scale = weight * std::sqrt(a) / std::sqrt(1.0 - a);
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] *= scale;
  return grad;
}

std::vector<double> softmax(const std::vector<double>& logits) {
  if (logits.empty()) return {};
  double hi = logits[0];
  for (double v : logits) hi = std::max(hi, v);
  std::vector<double> out(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - hi);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

std::vector<double> apply_size_weight(const std::vector<double>& logits, const std::vector<int>& positions,
                                      double size_weight) {
  if (!(size_weight > 0.0)) throw Error(ErrorCode::kInvalidArgument, "size weight must be positive");
  std::vector<double> out = logits;
  if (size_weight == 1.0) return out;
  const double offset = std::log(size_weight);
  for (int p : positions) {
    if (p < 0 || p >= static_cast<int>(out.size())) throw Error(ErrorCode::kInvalidArgument, "token position out of range");
    out[p] += offset;
  }
  return out;
}

std::vector<double> size_weight_offsets(const TextConditioning& cond, const std::string& part_name,
                                        double size_weight) {
  if (size_weight == 1.0) return {};
  std::vector<double> logits(cond.tokens.size(), 0.0);
  std::vector<int> positions;
  if (auto span = find_span(cond.tokens, tokenize(part_name), 1)) {
    for (int j = span->begin; j < span->end; ++j) positions.push_back(j);
  } else {
    for (int j = 1; j < static_cast<int>(cond.tokens.size()); ++j) positions.push_back(j);
  }
  return apply_size_weight(logits, positions, size_weight);
}

Tensor background_blend(const Tensor& x, const Tensor& x_base, const Mask2D& background_mask, int step,
                        int blend_start) {
  if (x.shape() != x_base.shape()) throw Error(ErrorCode::kInvalidArgument, "background blend: shape mismatch");
  if (blend_start < 0 || step > blend_start) return x;
  const Shape s = x.shape();
  const Mask2D m = background_mask.resized(s.height, s.width);
  const std::size_t plane = static_cast<std::size_t>(s.height) * s.width;
  Tensor out = x;
  for (int c = 0; c < s.channels; ++c) {
    for (std::size_t i = 0; i < plane; ++i) {
      if (m[i]) out[c * plane + i] = x_base[c * plane + i];
    }
  }
  return out;
}

SelfAttentionRef SelfInjectionRecord::at(int step) const {
  const auto it = maps.find(step);
  if (it == maps.end()) {
    throw Error(ErrorCode::kState, "no recorded self-attention for step " + std::to_string(step));
  }
  return it->second;
}

namespace {

void check_mask_names(const RichPromptDocument& doc, const PartMaskSet& masks) {
  std::vector<std::string> unmatched;
  for (const auto& part : doc.parts) {
    if (!masks.find(part.name)) unmatched.push_back(part.name);
  }
  for (const auto& pm : masks.parts) {
    bool found = false;
    for (const auto& part : doc.parts) found = found || normalize_name(part.name) == normalize_name(pm.name);
    if (!found) unmatched.push_back(pm.name);
  }
  if (!unmatched.empty()) {
    throw Error(ErrorCode::kValidation, "masks do not match document parts: " + join(unmatched, ", "),
                {{"masks", "unmatched parts: " + join(unmatched, ", ")}});
  }
  if (!masks.is_partition()) {
    throw Error(ErrorCode::kValidation, "part and background masks do not partition the grid",
                {{"masks", "not a partition"}});
  }
}

std::string step_file(int step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "step_%03d.png", step);
  return buf;
}

}  // namespace

GenerationResult generate(const RichPromptDocument& doc, const PartMaskSet& masks, const PipelineConfig& config,
                          DenoiserBackend& backend, const GenerationOptions& options) {
  validate_config(config);
  validate_document(doc);
  check_mask_names(doc, masks);

  const int n = config.num_steps;
  const DdimScheduler scheduler(config.noise_schedule, n, config.eta);
  const TextConditioning base = backend.encode_text(doc.base_prompt);
  const TextConditioning uncond = backend.encode_text("");
  const Tensor start = options.initial ? *options.initial : backend.initial_noise(config.seed);
  if (start.shape() != backend.latent_shape()) throw Error(ErrorCode::kInvalidArgument, "initial latent shape mismatch");
  const std::uint64_t rng_seed = config.seed ^ 0x6a09e667f3bcc909ull;

  const int inject_steps = static_cast<int>(std::lround(config.injection_fraction * n));
  SelfInjectionRecord record;
  record.first_step = n - inject_steps + 1;
  const int blend_start = config.blend_steps() - 1;

  GenerationResult result;
  result.base_trajectory.assign(n + 1, Tensor());
  {
    std::mt19937_64 rng(rng_seed);
    Tensor x = start;
    result.base_trajectory[n] = x;
    for (int s = n; s >= 1; --s) {
      try {
        AttentionControl control;
        control.step = s;
        if (s >= record.first_step) {
          control.record_self = [&record, s](SelfAttentionRef ref) { record.maps[s] = std::move(ref); };
        }
        const Tensor eps =
            guided_noise(backend, x, base, uncond, scheduler.train_timestep(s), config.guidance_scale, control);
        x = scheduler.step(x, eps, s, scheduler.deterministic() ? nullptr : &rng);
      } catch (...) {
        rethrow_with_context("generate: base run, step " + std::to_string(s));
      }
      result.base_trajectory[s - 1] = x;
    }
  }

  std::vector<RegionProcess> regions;
  for (const auto& part : doc.parts) {
    const PartMask* pm = masks.find(part.name);
    if (!pm->mask.any()) continue;
    RegionProcess p;
    p.name = part.name;
    p.mask = pm->mask;
    p.prompt = build_region_prompt(part);
    p.conditioning = backend.encode_text(p.prompt);
    p.size_weight = part.size;
    p.color_target = part.color;
    p.inject_self = true;
    regions.push_back(std::move(p));
  }
  RegionProcess background;
  background.mask = masks.background_mask;
  background.prompt = doc.base_prompt;
  background.conditioning = base;

  if (!options.intermediates_dir.empty()) {
    std::filesystem::create_directories(options.intermediates_dir);
    nlohmann::json prompts = nlohmann::json::array();
    for (const auto& r : regions) {
      nlohmann::json e = {{"part", r.name}, {"prompt", r.prompt}, {"size", r.size_weight}};
      if (r.color_target) e["color"] = {r.color_target->r, r.color_target->g, r.color_target->b};
      prompts.push_back(e);
    }
    prompts.push_back({{"part", nullptr}, {"prompt", background.prompt}, {"size", 1.0}});
    write_file_bytes((std::filesystem::path(options.intermediates_dir) / "prompts.json").string(),
                     nlohmann::json{{"regions", prompts}}.dump(2));
  }

  std::vector<std::vector<double>> offsets;
  for (const auto& r : regions) offsets.push_back(size_weight_offsets(r.conditioning, r.name, r.size_weight));

  std::mt19937_64 rng(rng_seed);
  Tensor x = start;
  const double g = config.guidance_scale;
  for (int s = n; s >= 1; --s) {
    try {
      const int t = scheduler.train_timestep(s);
      std::vector<Tensor> predictions;
      for (std::size_t r = 0; r < regions.size(); ++r) {
        const RegionProcess& p = regions[r];
        AttentionControl control;
        control.step = s;
        control.token_log_weights = offsets[r];
        if (p.inject_self && record.covers(s)) control.injected_self = record.at(s);
        const bool colored = p.color_target && s <= config.t_threshold && config.color_guidance_weight > 0.0;
        Tensor eps;
        if (colored && !config.color_guidance_after_cfg) {
          eps = backend.predict_noise(x, p.conditioning, t, control);
          const Tensor grad = color_guidance_gradient(x, eps, s, scheduler, p, backend, config.color_guidance_weight);
          for (std::size_t i = 0; i < eps.size(); ++i) eps[i] += grad[i];
          if (g != 1.0) {
            AttentionControl plain;
            plain.injected_self = control.injected_self;
            const Tensor eps_u = backend.predict_noise(x, uncond, t, plain);
            for (std::size_t i = 0; i < eps.size(); ++i) eps[i] = eps_u[i] + g * (eps[i] - eps_u[i]);
          }
        } else {
          eps = guided_noise(backend, x, p.conditioning, uncond, t, g, control);
          if (colored) {
            const Tensor grad =
                color_guidance_gradient(x, eps, s, scheduler, p, backend, config.color_guidance_weight);
            for (std::size_t i = 0; i < eps.size(); ++i) eps[i] += grad[i];
          }
        }
        predictions.push_back(std::move(eps));
      }
      AttentionControl bg_control;
      bg_control.step = s;
      const Tensor bg_eps = guided_noise(backend, x, background.conditioning, uncond, t, g, bg_control);
      const Tensor eps = fuse_region_noise(regions, background, predictions, bg_eps);
      x = scheduler.step(x, eps, s, scheduler.deterministic() ? nullptr : &rng);
      x = background_blend(x, result.base_trajectory[s - 1], background.mask, s - 1, blend_start);
      if (!options.intermediates_dir.empty()) {
        write_png((std::filesystem::path(options.intermediates_dir) / step_file(s - 1)).string(),
                  tensor_to_image(backend.capabilities().image_codec ? backend.decode_image(x) : x));
      }
    } catch (...) {
      rethrow_with_context("generate: step " + std::to_string(s));
    }
  }
  result.latent = x;
  result.image = backend.capabilities().image_codec ? backend.decode_image(x) : x;
  regions.push_back(std::move(background));
  result.regions = std::move(regions);
  return result;
}

}  // namespace partcraft
