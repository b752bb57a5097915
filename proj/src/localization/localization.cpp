// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#include "localization/localization.hpp"

#include <algorithm>
#include <random>

#include "backends/scheduler.hpp"
#include "core/error.hpp"
#include "core/text.hpp"

namespace partcraft {

std::string part_template(const std::string& part, const std::string& object) {
  return "A photo of " + part + " of a " + object;
}

PartEmbeddingSet embed_parts_independently(const RichPromptDocument& doc, DenoiserBackend& backend) {
  PartEmbeddingSet set;
  for (const auto& part : doc.parts) {
    const TextConditioning cond = backend.encode_text(part_template(part.name, doc.object));
    const auto span = find_span(cond.tokens, tokenize(part.name), 1);
    if (!span || span->size() == 0) {
      throw Error(ErrorCode::kValidation, "part '" + part.name + "' not found in its template tokenization",
                  {{"parts", "part '" + part.name + "' has no tokens"}});
    }
    if (set.dim == 0) set.dim = cond.dim;
    set.names.push_back(part.name);
    set.tokens.emplace_back(cond.tokens.begin() + span->begin, cond.tokens.begin() + span->end);
    set.embeddings.emplace_back(cond.embeddings.begin() + static_cast<std::ptrdiff_t>(span->begin) * cond.dim,
                                cond.embeddings.begin() + static_cast<std::ptrdiff_t>(span->end) * cond.dim);
  }
  return set;
}

TextConditioning assemble_part_conditioning(const PartEmbeddingSet& parts, DenoiserBackend& backend) {
  const TextConditioning empty = backend.encode_text("");
  TextConditioning c;
  c.assembled = true;
  c.prompt = join(parts.names, " ");
  c.dim = empty.dim;
  c.tokens.push_back(empty.tokens.at(0));
  c.token_owner.push_back("");
  c.embeddings.assign(empty.embeddings.begin(), empty.embeddings.begin() + empty.dim);
  for (std::size_t i = 0; i < parts.names.size(); ++i) {
    if (parts.dim != c.dim) throw Error(ErrorCode::kBackend, "embedding width changed between encodings");
    for (const auto& t : parts.tokens[i]) {
      c.tokens.push_back(t);
      c.token_owner.push_back(parts.names[i]);
    }
    c.embeddings.insert(c.embeddings.end(), parts.embeddings[i].begin(), parts.embeddings[i].end());
  }
  return c;
}

std::vector<PartTokens> part_token_indices(const TextConditioning& cond) {
  std::vector<PartTokens> out;
  for (std::size_t j = 1; j < cond.token_owner.size(); ++j) {
    const std::string& owner = cond.token_owner[j];
    if (out.empty() || out.back().name != owner) out.push_back({owner, {}});
    out.back().token_indices.push_back(static_cast<int>(j));
  }
  return out;
}

std::vector<int> object_token_indices(const TextConditioning& cond, const std::string& object) {
  const auto span = find_span(cond.tokens, tokenize(object), 1);
  if (!span || span->size() == 0) {
    throw Error(ErrorCode::kValidation, "object '" + object + "' not found in the base prompt tokens",
                {{"object", "not in base prompt"}});
  }
  std::vector<int> out;
  for (int j = span->begin; j < span->end; ++j) out.push_back(j);
  return out;
}

Tensor mask_to_latent(const Mask2D& mask, const Shape& shape) {
  const Mask2D m = mask.resized(shape.height, shape.width);
  Tensor out(shape);
  const std::size_t plane = static_cast<std::size_t>(shape.height) * shape.width;
  for (int c = 0; c < shape.channels; ++c) {
    for (std::size_t p = 0; p < plane; ++p) out[c * plane + p] = m[p] ? 1.0 : 0.0;
  }
  return out;
}

Tensor blended_noise(const Tensor& base, const Tensor& part, const Tensor& mask, double alpha) {
  if (base.shape() != part.shape() || base.shape() != mask.shape()) {
    throw Error(ErrorCode::kInvalidArgument, "blended_noise: shape mismatch");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "alpha must lie in [0,1]");
  Tensor out(base.shape());
  for (std::size_t i = 0; i < base.size(); ++i) {
    const double w = alpha * mask[i];
    out[i] = w * part[i] + (1.0 - w) * base[i];
  }
  return out;
}

Tensor blended_noise(const Tensor& base, const Tensor& part, const Mask2D& object_mask, double alpha) {
  return blended_noise(base, part, mask_to_latent(object_mask, base.shape()), alpha);
}

Mask2D extract_object_mask(const AttentionBundle& bundle, const std::vector<int>& object_tokens, int k,
                           std::uint64_t seed, int restarts) {
  if (!bundle.has_self()) throw Error(ErrorCode::kInvalidArgument, "base attention has no self-attention");
  if (object_tokens.empty()) throw Error(ErrorCode::kInvalidArgument, "no object tokens");
  Map2D object(kMaskSize, kMaskSize);
  for (int j : object_tokens) {
    if (j < 0 || j >= static_cast<int>(bundle.cross_attn.size())) {
      throw Error(ErrorCode::kInvalidArgument, "object token index out of range");
    }
    for (int p = 0; p < kPositions; ++p) object.values[p] += bundle.cross_attn[j].values[p];
  }
  double total = 0.0;
  for (double v : object.values) total += v;
  if (!(total > 0.0)) throw Error(ErrorCode::kValidation, "object not localizable");
  const double global = total / kPositions;

  const SegmentMap seg = cluster_attention(bundle.self_attn, k, seed, restarts);
  std::vector<double> sum(seg.label_count(), 0.0);
  std::vector<int> count(seg.label_count(), 0);
  for (int p = 0; p < kPositions; ++p) {
    sum[seg.labels[p]] += object.values[p];
    ++count[seg.labels[p]];
  }
  const double tolerance = 1e-9 * global;
  Mask2D mask(kMaskSize, kMaskSize);
  for (int p = 0; p < kPositions; ++p) {
    const int l = seg.labels[p];
    mask.set(p, sum[l] / count[l] >= global - tolerance);
  }
  return mask;
}

namespace {

struct RunSetup {
  DdimScheduler scheduler;
  TextConditioning base;
  TextConditioning uncond;
  Tensor x;
  std::mt19937_64 rng;
};

RunSetup setup_run(const RichPromptDocument& doc, const PipelineConfig& config, DenoiserBackend& backend,
                   const Tensor* initial) {
  RunSetup s{DdimScheduler(config.noise_schedule, config.num_steps, config.eta), backend.encode_text(doc.base_prompt),
             backend.encode_text(""), initial ? *initial : backend.initial_noise(config.seed),
             std::mt19937_64(config.seed ^ 0x6a09e667f3bcc909ull)};
  if (s.x.shape() != backend.latent_shape()) throw Error(ErrorCode::kInvalidArgument, "initial latent shape mismatch");
  return s;
}

std::mt19937_64* rng_if_needed(RunSetup& s) { return s.scheduler.deterministic() ? nullptr : &s.rng; }

}  // namespace

Tensor denoise_base(const RichPromptDocument& doc, const PipelineConfig& config, DenoiserBackend& backend,
                    const Tensor* initial, std::vector<Tensor>* trajectory) {
  RunSetup run = setup_run(doc, config, backend, initial);
  const int n = config.num_steps;
  if (trajectory) {
    trajectory->assign(n + 1, Tensor());
    (*trajectory)[n] = run.x;
  }
  for (int s = n; s >= 1; --s) {
    try {
      const int t = run.scheduler.train_timestep(s);
      const Tensor eps = guided_noise(backend, run.x, run.base, run.uncond, t, config.guidance_scale, {});
      run.x = run.scheduler.step(run.x, eps, s, rng_if_needed(run));
    } catch (...) {
      rethrow_with_context("step " + std::to_string(s));
    }
    if (trajectory) (*trajectory)[s - 1] = run.x;
  }
  return run.x;
}

PartDiffusionResult run_part_diffusion(const RichPromptDocument& doc, const PipelineConfig& config,
                                       DenoiserBackend& backend, const Tensor* initial) {
  validate_config(config);
  if (doc.parts.empty()) throw Error(ErrorCode::kValidation, "localization requires at least one part");
  RunSetup run = setup_run(doc, config, backend, initial);
  const int n = config.num_steps;
  const int threshold = config.t_threshold;
  const int mask_step = std::min(n, std::max(config.resolved_object_mask_step(), threshold + 1));

  PartDiffusionResult result;
  result.part_conditioning = assemble_part_conditioning(embed_parts_independently(doc, backend), backend);
  const std::vector<int> object_tokens = object_token_indices(run.base, doc.object);
  const Tensor* latent_mask = nullptr;
  Tensor latent_mask_storage;

  AttentionAccumulator base_acc(run.base.tokens);
  AttentionAccumulator base_part_acc(run.base.tokens);
  AttentionAccumulator part_acc(result.part_conditioning.tokens);
  AccumulatingSink base_sink(base_acc);
  AccumulatingSink base_part_sink(base_part_acc);
  AccumulatingSink part_sink(part_acc);
  const bool want_base_self = config.self_attention_source != SelfAttentionSource::kPart;

  for (int s = n; s >= 1; --s) {
    try {
      const int t = run.scheduler.train_timestep(s);
      Tensor eps;
      if (s > threshold) {
        AttentionControl control;
        control.step = s;
        if (s >= mask_step) control.sink = &base_sink;
        eps = guided_noise(backend, run.x, run.base, run.uncond, t, config.guidance_scale, control);
      } else {
        if (!latent_mask) {
          result.base_attention = base_acc.finish();
          result.object_mask_step = mask_step;
          result.object_mask = extract_object_mask(result.base_attention, object_tokens,
                                                   config.resolved_k(doc.parts.size()), config.seed,
                                                   config.kmeans_restarts);
          latent_mask_storage = mask_to_latent(result.object_mask, backend.latent_shape());
          latent_mask = &latent_mask_storage;
        }
        AttentionControl base_control;
        base_control.step = s;
        if (want_base_self) base_control.sink = &base_part_sink;
        AttentionControl part_control;
        part_control.step = s;
        part_control.sink = &part_sink;
        const Tensor base_eps =
            guided_noise(backend, run.x, run.base, run.uncond, t, config.guidance_scale, base_control);
        const Tensor part_eps = guided_noise(backend, run.x, result.part_conditioning, run.uncond, t,
                                             config.guidance_scale, part_control);
        eps = blended_noise(base_eps, part_eps, *latent_mask, config.alpha.at(s, n));
      }
      run.x = run.scheduler.step(run.x, eps, s, rng_if_needed(run));
    } catch (...) {
      rethrow_with_context("step " + std::to_string(s));
    }
  }
  result.final_latent = run.x;
  result.part_attention = part_acc.finish();
  if (want_base_self) result.base_part_steps = base_part_acc.finish();
  return result;
}

bool localization_test(const Map2D& normalized, int k, double delta) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "localization test needs K >= 1");
  return normalized.max() >= (1.0 - delta) / k;
}

Map2D conditional_normalize(const Map2D& m, bool localized) {
  if (!localized) return m;
  const double lo = m.min();
  const double hi = m.max();
  Map2D out(m.height, m.width, 0.0);
  if (!(hi > lo)) return out;
  for (std::size_t i = 0; i < m.size(); ++i) out.values[i] = (m.values[i] - lo) / (hi - lo);
  return out;
}

PartMaskSet assign_segments(const SegmentMap& segments, const std::vector<Map2D>& maps,
                            const std::vector<std::string>& names, double epsilon, const Mask2D* object_mask) {
  if (maps.size() != names.size()) throw Error(ErrorCode::kInvalidArgument, "one map per part name required");
  const std::size_t cells = segments.labels.size();
  for (const auto& m : maps) {
    if (m.size() != cells) throw Error(ErrorCode::kInvalidArgument, "part map and segment grid differ in size");
  }
  if (object_mask && object_mask->size() != cells) {
    throw Error(ErrorCode::kInvalidArgument, "object mask and segment grid differ in size");
  }
  const int labels = segments.label_count();
  std::vector<std::vector<double>> score(labels, std::vector<double>(maps.size(), 0.0));
  std::vector<int> inside(labels, 0);
  std::vector<int> size(labels, 0);
  for (std::size_t p = 0; p < cells; ++p) {
    const int l = segments.labels[p];
    ++size[l];
    if (object_mask && (*object_mask)[p]) ++inside[l];
    for (std::size_t i = 0; i < maps.size(); ++i) score[l][i] += maps[i].values[p];
  }
  std::vector<int> owner(labels, -1);
  for (int l = 0; l < labels; ++l) {
    if (object_mask && 2 * inside[l] < size[l]) continue;
    int best = -1;
    for (std::size_t i = 0; i < maps.size(); ++i) {
      if (best < 0 || score[l][i] > score[l][best]) best = static_cast<int>(i);
    }
    if (best >= 0 && score[l][best] >= epsilon) owner[l] = best;
  }

  PartMaskSet set;
  set.object_mask = object_mask ? *object_mask : Mask2D::full(segments.height, segments.width);
  for (std::size_t i = 0; i < maps.size(); ++i) {
    PartMask pm;
    pm.name = names[i];
    pm.mask = Mask2D(segments.height, segments.width);
    for (std::size_t p = 0; p < cells; ++p) {
      if (owner[segments.labels[p]] == static_cast<int>(i) && set.object_mask[p]) pm.mask.set(p, true);
    }
    pm.localized = pm.mask.any();
    pm.score = maps[i].max();
    set.parts.push_back(std::move(pm));
  }
  set.background_mask = complement_of_parts(set.parts, segments.height, segments.width);
  return set;
}

PartMaskSet localize(const RichPromptDocument& doc, const PipelineConfig& config, DenoiserBackend& backend,
                     const Tensor* initial, LocalizationDebug* debug) {
  try {
    validate_document(doc);
  } catch (...) {
    rethrow_with_context("localize: document");
  }
  if (doc.parts.empty()) {
    throw Error(ErrorCode::kValidation, "localize: localization requires at least one part",
                {{"parts", "at least one part is required"}});
  }
  PartDiffusionResult run;
  try {
    run = run_part_diffusion(doc, config, backend, initial);
  } catch (...) {
    rethrow_with_context("localize: part diffusion");
  }

  std::vector<Map2D> normalized;
  std::vector<std::string> names;
  try {
    const auto tokens = part_token_indices(run.part_conditioning);
    for (const auto& t : tokens) names.push_back(t.name);
    normalized = normalize_cross_attention(run.part_attention, tokens);
  } catch (...) {
    rethrow_with_context("localize: normalization");
  }

  const int k_parts = static_cast<int>(normalized.size());
  std::vector<bool> localized;
  std::vector<double> scores;
  std::vector<Map2D> assignment_maps;
  for (const auto& m : normalized) {
    const bool ok = localization_test(m, k_parts, config.delta);
    localized.push_back(ok);
    scores.push_back(m.max());
    assignment_maps.push_back(conditional_normalize(m, ok));
  }

  SegmentMap segments;
  try {
    const AttentionBundle* source = &run.part_attention;
    AttentionBundle merged;
    if (config.self_attention_source == SelfAttentionSource::kBoth) {
      merged = merge_self_attention(*run.base_part_steps, run.part_attention);
      source = &merged;
    } else if (config.self_attention_source == SelfAttentionSource::kBase) {
      source = &*run.base_part_steps;
    }
    segments = cluster_attention(source->self_attn, config.resolved_k(doc.parts.size()), config.seed,
                                 config.kmeans_restarts);
  } catch (...) {
    rethrow_with_context("localize: clustering");
  }

  PartMaskSet masks;
  try {
    masks = assign_segments(segments, assignment_maps, names, config.epsilon_assign, &run.object_mask);
    for (std::size_t i = 0; i < masks.parts.size(); ++i) {
      if (!localized[i]) masks.parts[i].mask = Mask2D(kMaskSize, kMaskSize);
      masks.parts[i].localized = localized[i];
      masks.parts[i].score = scores[i];
    }
    masks.background_mask = complement_of_parts(masks.parts, kMaskSize, kMaskSize);
    masks.validate();
  } catch (...) {
    rethrow_with_context("localize: assignment");
  }

  if (debug) {
    debug->part_names = names;
    debug->normalized = normalized;
    debug->assignment_maps = assignment_maps;
    debug->scores = scores;
    debug->localized = localized;
    debug->segments = segments;
    debug->object_mask = run.object_mask;
  }
  return masks;
}

}  // namespace partcraft
