// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "core/error.hpp"

namespace partcraft {

using json = nlohmann::json;

double AlphaSchedule::at(int step, int num_steps) const {
  if (kind == Kind::kConstant || num_steps <= 1) return start;
  const double progress = static_cast<double>(num_steps - step) / (num_steps - 1);
  return start + (end - start) * std::clamp(progress, 0.0, 1.0);
}

int PipelineConfig::resolved_k(std::size_t part_count) const {
  if (k_clusters > 0) return k_clusters;
  return std::max(static_cast<int>(part_count) + 1, 4);
}

int PipelineConfig::resolved_object_mask_step() const {
  if (object_mask_step > 0) return object_mask_step;
  return std::max(1, (num_steps + 1) / 2);
}

int PipelineConfig::blend_steps() const {
  return static_cast<int>(std::lround(blend_fraction * num_steps));
}

PipelineConfig config_profile(std::string_view name) {
  PipelineConfig c;
  c.profile = std::string(name);
  if (name == "synthetic") {
    return c;
  }
  if (name == "sd21-eval") {
    c.num_steps = 50;
    c.t_threshold = 25;
    c.epsilon_assign = 0.05;
    c.k_clusters = 9;
    c.guidance_scale = 0.05;
    c.inversion_guidance_scale = 0.05;
    c.backend.name = "diffusion";
    return c;
  }
  if (name == "sd15-gen") {
    c.num_steps = 41;
    c.t_threshold = 24;
    c.epsilon_assign = 0.5;
    c.delta = 0.3;
    c.guidance_scale = 8.5;
    c.blend_fraction = 0.2;
    c.backend.name = "diffusion";
    return c;
  }
  throw Error(ErrorCode::kConfiguration, "unknown profile '" + std::string(name) + "'",
              {{"profile", "unknown profile"}});
}

void validate_config(const PipelineConfig& c) {
  std::vector<FieldError> errors;
  if (c.num_steps < 1) errors.push_back({"num_steps", "must be positive"});
  if (c.t_threshold < 0 || c.t_threshold >= c.num_steps) {
    errors.push_back({"t_threshold", "must satisfy 0 <= t_threshold < num_steps"});
  }
  for (double a : {c.alpha.start, c.alpha.end}) {
    if (!(a >= 0.0 && a <= 1.0)) {
      errors.push_back({"alpha", "schedule values must lie in [0,1]"});
      break;
    }
  }
  if (!(c.delta >= 0.0 && c.delta <= 1.0)) errors.push_back({"delta", "must lie in [0,1]"});
  if (!(c.epsilon_assign >= 0.0)) errors.push_back({"epsilon_assign", "must be >= 0"});
  if (c.k_clusters < 0 || c.k_clusters == 1) errors.push_back({"k_clusters", "must be 0 (auto) or >= 2"});
  if (!(c.blend_fraction >= 0.0 && c.blend_fraction <= 1.0)) {
    errors.push_back({"blend_fraction", "must lie in [0,1]"});
  }
  if (!std::isfinite(c.guidance_scale)) errors.push_back({"guidance_scale", "must be finite"});
  if (!(c.injection_fraction >= 0.0 && c.injection_fraction <= 1.0)) {
    errors.push_back({"injection_fraction", "must lie in [0,1]"});
  }
  if (c.object_mask_step < 0 || c.object_mask_step > c.num_steps) {
    errors.push_back({"object_mask_step", "must lie in [0, num_steps]"});
  }
  if (c.kmeans_restarts < 1) errors.push_back({"kmeans_restarts", "must be >= 1"});
  if (c.inversion_fixed_point_iterations < 0) {
    errors.push_back({"inversion_fixed_point_iterations", "must be >= 0"});
  }
  if (!(c.eta >= 0.0)) errors.push_back({"eta", "must be >= 0"});
  if (c.backend.name != "synthetic" && c.backend.name != "diffusion") {
    errors.push_back({"backend", "unknown backend '" + c.backend.name + "'"});
  }
  if (!errors.empty()) {
    std::string message = "invalid config:";
    for (const auto& e : errors) message += " " + e.field + ": " + e.message + ";";
    throw Error(ErrorCode::kConfiguration, message, errors);
  }
}

namespace {

template <typename T>
void read(const json& j, const char* key, T& out, std::vector<FieldError>& errors) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    errors.push_back({key, "wrong type"});
  }
}

const std::set<std::string> kKeys = {
    "profile", "num_steps", "t_threshold", "alpha", "delta", "epsilon_assign",
    "k_clusters", "blend_fraction", "guidance_scale", "seed",
    "color_guidance_weight", "color_guidance_after_cfg", "injection_fraction",
    "self_attention_source", "object_mask_step", "kmeans_restarts",
    "inversion_guidance_scale", "inversion_fixed_point_iterations", "eta",
    "noise_schedule", "backend", "synthetic_scene", "plugin", "plugin_options"};

}  // namespace

PipelineConfig parse_pipeline_config(std::string_view text) {
  json j;
  try {
    j = text.empty() ? json::object() : json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, "malformed config JSON at byte " + std::to_string(e.byte));
  }
  if (!j.is_object()) throw Error(ErrorCode::kConfiguration, "config must be a JSON object");

  std::vector<FieldError> errors;
  for (const auto& [key, value] : j.items()) {
    if (!kKeys.count(key)) errors.push_back({key, "unknown config key"});
  }

  std::string profile = "synthetic";
  read(j, "profile", profile, errors);
  PipelineConfig c;
  try {
    c = config_profile(profile);
  } catch (const Error& e) {
    errors.insert(errors.end(), e.fields().begin(), e.fields().end());
  }
  // A profile's default step threshold tracks num_steps unless set explicitly.
  const int profile_steps = c.num_steps;
  read(j, "num_steps", c.num_steps, errors);
  if (!j.contains("t_threshold") && c.num_steps != profile_steps) c.t_threshold = c.num_steps / 2;
  read(j, "t_threshold", c.t_threshold, errors);
  read(j, "delta", c.delta, errors);
  read(j, "epsilon_assign", c.epsilon_assign, errors);
  read(j, "k_clusters", c.k_clusters, errors);
  read(j, "blend_fraction", c.blend_fraction, errors);
  read(j, "guidance_scale", c.guidance_scale, errors);
  read(j, "seed", c.seed, errors);
  read(j, "color_guidance_weight", c.color_guidance_weight, errors);
  read(j, "color_guidance_after_cfg", c.color_guidance_after_cfg, errors);
  read(j, "injection_fraction", c.injection_fraction, errors);
  read(j, "object_mask_step", c.object_mask_step, errors);
  read(j, "kmeans_restarts", c.kmeans_restarts, errors);
  read(j, "inversion_guidance_scale", c.inversion_guidance_scale, errors);
  read(j, "inversion_fixed_point_iterations", c.inversion_fixed_point_iterations, errors);
  read(j, "eta", c.eta, errors);

  if (j.contains("alpha")) {
    const json& a = j["alpha"];
    if (a.is_number()) {
      c.alpha = AlphaSchedule::constant(a.get<double>());
    } else if (a.is_object()) {
      const std::string kind = a.value("kind", std::string("linear"));
      if (kind == "linear") {
        c.alpha.kind = AlphaSchedule::Kind::kLinear;
        c.alpha.start = a.value("start", 0.0);
        c.alpha.end = a.value("end", 0.5);
      } else if (kind == "constant") {
        c.alpha = AlphaSchedule::constant(a.value("value", 0.0));
      } else {
        errors.push_back({"alpha", "kind must be 'linear' or 'constant'"});
      }
    } else {
      errors.push_back({"alpha", "must be a number or a schedule object"});
    }
  }
  if (j.contains("self_attention_source")) {
    const json& s = j["self_attention_source"];
    const std::string v = s.is_string() ? s.get<std::string>() : "";
    if (v == "both") c.self_attention_source = SelfAttentionSource::kBoth;
    else if (v == "base") c.self_attention_source = SelfAttentionSource::kBase;
    else if (v == "part") c.self_attention_source = SelfAttentionSource::kPart;
    else errors.push_back({"self_attention_source", "must be 'both', 'base' or 'part'"});
  }
  if (j.contains("noise_schedule")) {
    const json& n = j["noise_schedule"];
    if (!n.is_object()) {
      errors.push_back({"noise_schedule", "must be an object"});
    } else {
      read(n, "beta_start", c.noise_schedule.beta_start, errors);
      read(n, "beta_end", c.noise_schedule.beta_end, errors);
      read(n, "train_steps", c.noise_schedule.train_steps, errors);
    }
  }
  read(j, "backend", c.backend.name, errors);
  if (j.contains("synthetic_scene")) c.backend.scene_json = j["synthetic_scene"].dump();
  read(j, "plugin", c.backend.plugin_path, errors);
  if (j.contains("plugin_options")) c.backend.plugin_options_json = j["plugin_options"].dump();

  if (!errors.empty()) {
    std::string message = "invalid config:";
    for (const auto& e : errors) message += " " + e.field + ": " + e.message + ";";
    throw Error(ErrorCode::kConfiguration, message, errors);
  }
  validate_config(c);
  return c;
}

std::string serialize_pipeline_config(const PipelineConfig& c) {
  json alpha;
  if (c.alpha.kind == AlphaSchedule::Kind::kConstant) {
    alpha = {{"kind", "constant"}, {"value", c.alpha.start}};
  } else {
    alpha = {{"kind", "linear"}, {"start", c.alpha.start}, {"end", c.alpha.end}};
  }
  const char* source = c.self_attention_source == SelfAttentionSource::kBoth   ? "both"
                       : c.self_attention_source == SelfAttentionSource::kBase ? "base"
                                                                              : "part";
  json j = {
      {"profile", c.profile},
      {"num_steps", c.num_steps},
      {"t_threshold", c.t_threshold},
      {"alpha", alpha},
      {"delta", c.delta},
      {"epsilon_assign", c.epsilon_assign},
      {"k_clusters", c.k_clusters},
      {"blend_fraction", c.blend_fraction},
      {"guidance_scale", c.guidance_scale},
      {"seed", c.seed},
      {"color_guidance_weight", c.color_guidance_weight},
      {"color_guidance_after_cfg", c.color_guidance_after_cfg},
      {"injection_fraction", c.injection_fraction},
      {"self_attention_source", source},
      {"object_mask_step", c.object_mask_step},
      {"kmeans_restarts", c.kmeans_restarts},
      {"inversion_guidance_scale", c.inversion_guidance_scale},
      {"inversion_fixed_point_iterations", c.inversion_fixed_point_iterations},
      {"eta", c.eta},
      {"noise_schedule",
       {{"beta_start", c.noise_schedule.beta_start},
        {"beta_end", c.noise_schedule.beta_end},
        {"train_steps", c.noise_schedule.train_steps}}},
      {"backend", c.backend.name},
  };
  if (!c.backend.scene_json.empty()) j["synthetic_scene"] = json::parse(c.backend.scene_json);
  if (!c.backend.plugin_path.empty()) j["plugin"] = c.backend.plugin_path;
  if (!c.backend.plugin_options_json.empty()) {
    j["plugin_options"] = json::parse(c.backend.plugin_options_json);
  }
  return j.dump();
}

}  // namespace partcraft
