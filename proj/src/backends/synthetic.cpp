// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#include "backends/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <json.hpp>

#include "backends/scheduler.hpp"
#include "core/error.hpp"
#include "core/text.hpp"

namespace partcraft {

using json = nlohmann::json;

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

double unit_hash(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d = 0) {
  const std::uint64_t h = mix(mix(mix(mix(a) ^ b) ^ c) ^ d);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

json rect_json(const Rect& r) { return json::array({r.y0, r.x0, r.y1, r.x1}); }

Rect rect_from(const json& j) {
  if (!j.is_array() || j.size() != 4) {
    throw Error(ErrorCode::kValidation, "rect must be [y0, x0, y1, x1]");
  }
  return {j[0].get<int>(), j[1].get<int>(), j[2].get<int>(), j[3].get<int>()};
}

Color3 color_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::kValidation, "color must be [r, g, b]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

bool same_tokens(const std::string& a, const std::string& b) { return tokenize(a) == tokenize(b); }

}  // namespace

std::string SyntheticScene::effective_base_prompt() const {
  return base_prompt.empty() ? "a photo of a " + object : base_prompt;
}

Mask2D SyntheticScene::object_mask() const {
  Mask2D m(kMaskSize, kMaskSize);
  for (int y = 0; y < kMaskSize; ++y) {
    for (int x = 0; x < kMaskSize; ++x) m.set(y, x, object_region.contains(y, x));
  }
  return m;
}

const PlantedPart* SyntheticScene::find(const std::string& name) const {
  const std::string key = normalize_name(name);
  for (const auto& p : parts) {
    if (normalize_name(p.name) == key) return &p;
  }
  return nullptr;
}

Mask2D SyntheticScene::part_mask(const std::string& name) const {
  Mask2D m(kMaskSize, kMaskSize);
  if (const PlantedPart* p = find(name)) {
    for (int y = 0; y < kMaskSize; ++y) {
      for (int x = 0; x < kMaskSize; ++x) m.set(y, x, p->region.contains(y, x));
    }
  }
  return m;
}

std::vector<int> SyntheticScene::region_ids() const {
  std::vector<int> ids(kPositions, 0);
  const int remainder = static_cast<int>(parts.size()) + 1;
  for (int y = 0; y < kMaskSize; ++y) {
    for (int x = 0; x < kMaskSize; ++x) {
      if (!object_region.contains(y, x)) continue;
      int id = remainder;
      for (std::size_t i = 0; i < parts.size(); ++i) {
        if (parts[i].region.contains(y, x)) {
          id = static_cast<int>(i) + 1;
          break;
        }
      }
      ids[y * kMaskSize + x] = id;
    }
  }
  return ids;
}

void SyntheticScene::validate() const {
  auto in_grid = [](const Rect& r) {
    return r.y0 >= 0 && r.x0 >= 0 && r.y1 <= kMaskSize && r.x1 <= kMaskSize && r.y0 < r.y1 && r.x0 < r.x1;
  };
  if (object.empty() || tokenize(object).empty()) throw Error(ErrorCode::kValidation, "scene object name is empty");
  if (!in_grid(object_region)) throw Error(ErrorCode::kValidation, "object region outside the grid");
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const Rect& r = parts[i].region;
    if (!in_grid(r) || r.y0 < object_region.y0 || r.x0 < object_region.x0 || r.y1 > object_region.y1 ||
        r.x1 > object_region.x1) {
      throw Error(ErrorCode::kValidation, "part '" + parts[i].name + "' is not inside the object");
    }
    if (tokenize(parts[i].name).empty()) throw Error(ErrorCode::kValidation, "part name is empty");
    for (std::size_t j = 0; j < i; ++j) {
      const Rect& o = parts[j].region;
      if (r.y0 < o.y1 && o.y0 < r.y1 && r.x0 < o.x1 && o.x0 < r.x1) {
        throw Error(ErrorCode::kValidation, "parts '" + parts[j].name + "' and '" + parts[i].name + "' overlap");
      }
      if (normalize_name(parts[j].name) == normalize_name(parts[i].name)) {
        throw Error(ErrorCode::kValidation, "duplicate part '" + parts[i].name + "'");
      }
    }
  }
  for (double v : {attention_noise, self_noise, hotspot, floor, object_affinity, prior_sigma, texture}) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw Error(ErrorCode::kValidation, "scene parameters must be finite and >= 0");
  }
  if (prior_sigma <= 0.0) throw Error(ErrorCode::kValidation, "prior_sigma must be positive");
}

std::string scene_to_json(const SyntheticScene& s) {
  json parts = json::array();
  for (const auto& p : s.parts) {
    parts.push_back({{"name", p.name}, {"rect", rect_json(p.region)}, {"color", p.color}});
  }
  json j = {{"object", s.object},
            {"object_rect", rect_json(s.object_region)},
            {"background", s.background},
            {"object_color", s.object_color},
            {"parts", parts},
            {"attention_noise", s.attention_noise},
            {"self_noise", s.self_noise},
            {"hotspot", s.hotspot},
            {"floor", s.floor},
            {"object_affinity", s.object_affinity},
            {"prior_sigma", s.prior_sigma},
            {"texture", s.texture},
            {"seed", s.seed}};
  if (!s.base_prompt.empty()) j["base_prompt"] = s.base_prompt;
  return j.dump();
}

SyntheticScene scene_from_json(const std::string& text) {
  SyntheticScene s;
  try {
    const json j = json::parse(text);
    s.object = j.value("object", s.object);
    s.base_prompt = j.value("base_prompt", std::string());
    if (j.contains("object_rect")) s.object_region = rect_from(j["object_rect"]);
    if (j.contains("background")) s.background = color_from(j["background"]);
    if (j.contains("object_color")) s.object_color = color_from(j["object_color"]);
    for (const auto& p : j.value("parts", json::array())) {
      PlantedPart part;
      part.name = p.at("name").get<std::string>();
      part.region = rect_from(p.at("rect"));
      part.color = p.contains("color") ? color_from(p["color"]) : s.object_color;
      s.parts.push_back(part);
    }
    s.attention_noise = j.value("attention_noise", s.attention_noise);
    s.self_noise = j.value("self_noise", s.self_noise);
    s.hotspot = j.value("hotspot", s.hotspot);
    s.floor = j.value("floor", s.floor);
    s.object_affinity = j.value("object_affinity", s.object_affinity);
    s.prior_sigma = j.value("prior_sigma", s.prior_sigma);
    s.texture = j.value("texture", s.texture);
    s.seed = j.value("seed", s.seed);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kValidation, std::string("invalid synthetic scene: ") + e.what());
  }
  s.validate();
  return s;
}

SyntheticScene random_scene(std::uint64_t seed, const std::vector<std::string>& part_names,
                            const std::string& object) {
  std::mt19937_64 rng(seed);
  auto uniform_int = [&rng](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto color = [&rng]() {
    std::uniform_real_distribution<double> u(0.1, 0.9);
    return Color3{u(rng), u(rng), u(rng)};
  };
  SyntheticScene s;
  s.object = object;
  s.seed = seed;
  const int h = uniform_int(16, 26);
  const int w = uniform_int(16, 26);
  const int y0 = uniform_int(2, kMaskSize - 2 - h);
  const int x0 = uniform_int(2, kMaskSize - 2 - w);
  s.object_region = {y0, x0, y0 + h, x0 + w};
  s.background = color();
  s.object_color = color();

  std::vector<Rect> rects;
  if (!part_names.empty()) rects.push_back(s.object_region);
  constexpr int kMinSide = 3;
  while (rects.size() < part_names.size()) {
    int pick = -1;
    for (std::size_t i = 0; i < rects.size(); ++i) {
      const int longest = std::max(rects[i].height(), rects[i].width());
      if (longest < 2 * kMinSide) continue;
      if (pick < 0 || rects[i].area() > rects[pick].area()) pick = static_cast<int>(i);
    }
    if (pick < 0) throw Error(ErrorCode::kInvalidArgument, "too many parts for the object block");
    const Rect r = rects[pick];
    Rect a = r;
    Rect b = r;
    if (r.height() >= r.width()) {
      const int cut = r.y0 + uniform_int(kMinSide, r.height() - kMinSide);
      a.y1 = cut;
      b.y0 = cut;
    } else {
      const int cut = r.x0 + uniform_int(kMinSide, r.width() - kMinSide);
      a.x1 = cut;
      b.x0 = cut;
    }
    rects[pick] = a;
    rects.push_back(b);
  }
  std::shuffle(rects.begin(), rects.end(), rng);
  for (std::size_t i = 0; i < part_names.size(); ++i) {
    s.parts.push_back({part_names[i], rects[i], color()});
  }
  s.validate();
  return s;
}

SyntheticScene scene_for_document(const RichPromptDocument& doc, std::uint64_t seed) {
  std::vector<std::string> names;
  for (const auto& p : doc.parts) names.push_back(p.name);
  SyntheticScene s = random_scene(seed, names, doc.object);
  s.base_prompt = doc.base_prompt;
  return s;
}

SyntheticBackend::SyntheticBackend(SyntheticScene scene, NoiseSchedule schedule)
    : scene_(std::move(scene)), cumprod_(alphas_cumprod(schedule)) {
  scene_.validate();
  const std::vector<int> ids = scene_.region_ids();
  const int remainder = static_cast<int>(scene_.parts.size()) + 1;

  base_field_ = Tensor(latent_shape());
  for (int p = 0; p < kPositions; ++p) {
    const int id = ids[p];
    const Color3& c = id == 0 ? scene_.background
                      : id == remainder ? scene_.object_color
                                        : scene_.parts[id - 1].color;
    for (int ch = 0; ch < 3; ++ch) base_field_[static_cast<std::size_t>(ch) * kPositions + p] = c[ch];
  }

  // Structured affinity: 1 within a region, object_affinity across object
  // regions, 0 between object and background, plus symmetric per-head noise.
  auto build = [](const std::vector<std::vector<double>>& raw) {
    SelfAttentionSet set;
    auto mean = std::make_shared<SelfAttentionMap>();
    mean->values.assign(static_cast<std::size_t>(kPositions) * kPositions, 0.0);
    for (const auto& head : raw) {
      std::vector<float> probs(head.size());
      for (int q = 0; q < kPositions; ++q) {
        const double* row = head.data() + static_cast<std::size_t>(q) * kPositions;
        double total = 0.0;
        for (int k = 0; k < kPositions; ++k) total += row[k];
        for (int k = 0; k < kPositions; ++k) {
          const std::size_t i = static_cast<std::size_t>(q) * kPositions + k;
          const double v = row[k] / total;
          probs[i] = static_cast<float>(v);
          mean->values[i] += v / static_cast<double>(raw.size());
        }
      }
      set.heads.push_back(std::move(probs));
    }
    set.mean = std::move(mean);
    return set;
  };

  std::vector<std::vector<double>> structured(kHeads, std::vector<double>(static_cast<std::size_t>(kPositions) * kPositions));
  for (int h = 0; h < kHeads; ++h) {
    for (int q = 0; q < kPositions; ++q) {
      for (int k = q; k < kPositions; ++k) {
        double v = 0.0;
        if (ids[q] == ids[k]) v = 1.0;
        else if (ids[q] != 0 && ids[k] != 0) v = scene_.object_affinity;
        v += scene_.self_noise * unit_hash(scene_.seed, 0x5e1f + h, q, k);
        structured[h][static_cast<std::size_t>(q) * kPositions + k] = v;
        structured[h][static_cast<std::size_t>(k) * kPositions + q] = v;
      }
    }
  }
  structured_ = build(structured);

  // Prompts without a scene structure attend to a plain spatial neighbourhood.
  std::vector<double> kernel(static_cast<std::size_t>(kPositions) * kPositions);
  constexpr double kSigma = 3.0;
  for (int q = 0; q < kPositions; ++q) {
    for (int k = 0; k < kPositions; ++k) {
      const double dy = q / kMaskSize - k / kMaskSize;
      const double dx = q % kMaskSize - k % kMaskSize;
      kernel[static_cast<std::size_t>(q) * kPositions + k] = std::exp(-(dy * dy + dx * dx) / (2 * kSigma * kSigma));
    }
  }
  diffuse_ = build(std::vector<std::vector<double>>(kHeads, kernel));
}

BackendCapabilities SyntheticBackend::capabilities() const {
  BackendCapabilities c;
  c.attention_capture = true;
  c.attention_reweight = true;
  c.self_injection = true;
  c.image_codec = true;
  c.decode_vjp = true;
  c.optimizable_embeddings = false;
  return c;
}

TextConditioning SyntheticBackend::encode_text(const std::string& prompt) {
  TextConditioning c;
  c.prompt = prompt;
  c.tokens.push_back(std::string(kStartOfText));
  for (auto& t : tokenize(prompt)) c.tokens.push_back(std::move(t));
  c.dim = kEmbeddingDim;
  c.embeddings.assign(c.tokens.size() * kEmbeddingDim, 0.0);
  std::vector<double> context(kEmbeddingDim, 0.0);
  for (std::size_t i = 0; i < c.tokens.size(); ++i) {
    std::mt19937_64 rng(fnv1a(c.tokens[i]));
    std::normal_distribution<double> normal(0.0, 0.25);
    for (int d = 0; d < kEmbeddingDim; ++d) {
      const double v = normal(rng);
      c.embeddings[i * kEmbeddingDim + d] = v;
      context[d] += v / static_cast<double>(c.tokens.size());
    }
  }
  // Light contextual mixing, so a token's vector depends on its sentence.
  for (std::size_t i = 0; i < c.tokens.size(); ++i) {
    for (int d = 0; d < kEmbeddingDim; ++d) c.embeddings[i * kEmbeddingDim + d] += 0.05 * context[d];
  }
  return c;
}

bool SyntheticBackend::is_base_prompt(const TextConditioning& cond) const {
  return !cond.assembled && same_tokens(cond.prompt, scene_.effective_base_prompt());
}

std::string SyntheticBackend::cond_key(const TextConditioning& cond) const {
  if (!cond.assembled) return "p:" + join(tokenize(cond.prompt), " ");
  return "a:" + join(cond.token_owner, "|");
}

const SyntheticBackend::SelfAttentionSet& SyntheticBackend::self_attention_for(const TextConditioning& cond) const {
  if (cond.assembled || is_base_prompt(cond) || tokenize(cond.prompt).empty()) return structured_;
  return diffuse_;
}

Tensor SyntheticBackend::target_field(const TextConditioning& cond) {
  const std::string key = cond_key(cond);
  if (auto it = field_cache_.find(key); it != field_cache_.end()) return it->second;
  Tensor field;
  const auto words = tokenize(cond.prompt);
  if (!cond.assembled && words.empty()) {
    field = Tensor(latent_shape(), 0.5);
  } else if (is_base_prompt(cond)) {
    field = base_field_;
  } else {
    field = base_field_;
    Mask2D region = scene_.object_mask();
    if (!cond.assembled) {
      std::size_t best = words.size();
      for (const auto& part : scene_.parts) {
        if (auto span = find_span(words, tokenize(part.name))) {
          if (static_cast<std::size_t>(span->begin) < best) {
            best = span->begin;
            region = scene_.part_mask(part.name);
          }
        }
      }
    }
    const std::uint64_t h = fnv1a(key, scene_.seed);
    for (int ch = 0; ch < 3; ++ch) {
      for (int p = 0; p < kPositions; ++p) {
        if (!region[p]) continue;
        field[static_cast<std::size_t>(ch) * kPositions + p] +=
            scene_.texture * (2.0 * unit_hash(h, ch, p) - 1.0);
      }
    }
  }
  field_cache_.emplace(key, field);
  return field;
}

const Tensor& SyntheticBackend::smoothed_mean(const TextConditioning& cond, const SelfAttentionRef& p) {
  const auto key = std::make_pair(cond_key(cond), p.get());
  if (auto it = mean_cache_.find(key); it != mean_cache_.end()) return it->second.second;
  const Tensor field = target_field(cond);
  Tensor mean(latent_shape());
  for (int q = 0; q < kPositions; ++q) {
    const double* row = p->values.data() + static_cast<std::size_t>(q) * kPositions;
    for (int ch = 0; ch < 3; ++ch) {
      const double* f = field.values().data() + static_cast<std::size_t>(ch) * kPositions;
      double acc = 0.0;
      for (int k = 0; k < kPositions; ++k) acc += row[k] * f[k];
      mean[static_cast<std::size_t>(ch) * kPositions + q] = acc;
    }
  }
  return mean_cache_.emplace(key, std::make_pair(p, std::move(mean))).first->second.second;
}

std::vector<Map2D> SyntheticBackend::planted_scores(const TextConditioning& cond) const {
  const Mask2D object = scene_.object_mask();
  const auto object_words = tokenize(scene_.object);
  std::vector<Map2D> scores;
  for (std::size_t j = 0; j < cond.tokens.size(); ++j) {
    Map2D m(kMaskSize, kMaskSize, 0.0);
    if (j == 0) {
      scores.push_back(std::move(m));
      continue;
    }
    if (cond.assembled) {
      const std::string owner = j < cond.token_owner.size() ? cond.token_owner[j] : "";
      if (const PlantedPart* part = scene_.find(owner)) {
        for (int y = 0; y < kMaskSize; ++y) {
          for (int x = 0; x < kMaskSize; ++x) {
            m.at(y, x) = scene_.floor + (part->region.contains(y, x) ? scene_.hotspot : 0.0);
          }
        }
      }
    } else if (std::find(object_words.begin(), object_words.end(), cond.tokens[j]) != object_words.end()) {
      for (int p = 0; p < kPositions; ++p) m.values[p] = 0.05 + (object[p] ? 1.0 : 0.0);
    } else {
      for (double& v : m.values) v = 0.05;
    }
    scores.push_back(std::move(m));
  }
  return scores;
}

void SyntheticBackend::emit_cross(const TextConditioning& cond, const AttentionControl& control) const {
  const auto scores = planted_scores(cond);
  const int tokens = static_cast<int>(scores.size());
  const std::uint64_t h = fnv1a(cond_key(cond), scene_.seed);
  for (int head = 0; head < kHeads; ++head) {
    AttentionCapture cap;
    cap.kind = AttentionKind::kCross;
    cap.step = control.step;
    cap.head = head;
    cap.height = kMaskSize;
    cap.width = kMaskSize;
    cap.tokens = tokens;
    cap.values.resize(static_cast<std::size_t>(kPositions) * tokens);
    for (int p = 0; p < kPositions; ++p) {
      double used = 0.0;
      for (int j = 1; j < tokens; ++j) {
        double v = scores[j].values[p];
        if (scene_.attention_noise > 0.0) v += scene_.attention_noise * unit_hash(h, head, j, p);
        if (static_cast<std::size_t>(j) < control.token_log_weights.size()) {
          v *= std::exp(control.token_log_weights[j]);
        }
        cap.values[static_cast<std::size_t>(p) * tokens + j] = static_cast<float>(v / kCrossBudget);
        used += v;
      }
      // The start-of-text token absorbs the remaining mass.
      cap.values[static_cast<std::size_t>(p) * tokens] = static_cast<float>(std::max(kCrossBudget - used, 0.5) / kCrossBudget);
    }
    control.sink->on_attention(cap);
  }
}

Tensor SyntheticBackend::predict_noise(const Tensor& x, const TextConditioning& cond, int train_timestep,
                                       const AttentionControl& control) {
  if (x.shape() != latent_shape()) {
    throw Error(ErrorCode::kInvalidArgument, "latent shape " + to_string(x.shape()) + " does not match " +
                                                 to_string(latent_shape()));
  }
  if (train_timestep < 0 || train_timestep >= static_cast<int>(cumprod_.size())) {
    throw Error(ErrorCode::kInvalidArgument, "training timestep out of range");
  }
  const SelfAttentionSet& own = self_attention_for(cond);
  const SelfAttentionRef used = control.injected_self ? control.injected_self : own.mean;
  if (used->values.size() != static_cast<std::size_t>(kPositions) * kPositions) {
    throw Error(ErrorCode::kInvalidArgument, "injected self-attention has the wrong size");
  }
  if (control.sink) {
    if (control.injected_self) {
      AttentionCapture cap{AttentionKind::kSelf, control.step, 0, 0, kMaskSize, kMaskSize, 0, {}};
      cap.values.assign(used->values.begin(), used->values.end());
      control.sink->on_attention(cap);
    } else {
      for (int head = 0; head < kHeads; ++head) {
        AttentionCapture cap{AttentionKind::kSelf, control.step, 0, head, kMaskSize, kMaskSize, 0, own.heads[head]};
        control.sink->on_attention(cap);
      }
    }
    emit_cross(cond, control);
  }
  if (control.record_self) control.record_self(used);

  const Tensor& mu = smoothed_mean(cond, used);
  const double a = cumprod_[train_timestep];
  const double sa = std::sqrt(a);
  const double sb = std::sqrt(1.0 - a);
  const double var = scene_.prior_sigma * scene_.prior_sigma;
  const double gain = sa * var / (a * var + 1.0 - a);
  Tensor eps(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double x0 = mu[i] + gain * (x[i] - sa * mu[i]);
    eps[i] = (x[i] - sa * x0) / sb;
  }
  return eps;
}

Tensor SyntheticBackend::encode_image(const Tensor& image) {
  if (image.shape() != image_shape()) throw Error(ErrorCode::kInvalidArgument, "image must be 3×32×32");
  return image;
}

Tensor SyntheticBackend::decode_image(const Tensor& latent) {
  if (latent.shape() != latent_shape()) throw Error(ErrorCode::kInvalidArgument, "latent must be 3×32×32");
  return latent;
}

Tensor SyntheticBackend::decode_vjp(const Tensor& latent, const Tensor& grad_image) {
  if (latent.shape() != grad_image.shape()) throw Error(ErrorCode::kInvalidArgument, "gradient shape mismatch");
  return grad_image;
}

}  // namespace partcraft
