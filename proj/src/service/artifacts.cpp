// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#include "service/artifacts.hpp"

#include <cctype>
#include <filesystem>

#include <json.hpp>

#include "attention/attention.hpp"
#include "core/error.hpp"
#include "core/png_io.hpp"

namespace partcraft {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string mask_file_name(std::size_t index, const std::string& part) {
  std::string slug;
  for (char c : part) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      slug += static_cast<char>(std::tolower(u));
    } else if (!slug.empty() && slug.back() != '_') {
      slug += '_';
    }
  }
  while (!slug.empty() && slug.back() == '_') slug.pop_back();
  if (slug.empty()) slug = "part";
  return "mask_" + std::to_string(index) + "_" + slug + ".png";
}

std::string masks_to_json(const PartMaskSet& masks) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < masks.parts.size(); ++i) {
    const auto& p = masks.parts[i];
    j[p.name] = {{"file", mask_file_name(i, p.name)}, {"localized", p.localized}, {"score", p.score}};
  }
  return j.dump(2);
}

std::vector<std::string> save_masks(const std::string& dir, const PartMaskSet& masks) {
  fs::create_directories(dir);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < masks.parts.size(); ++i) {
    const std::string file = mask_file_name(i, masks.parts[i].name);
    write_png((fs::path(dir) / file).string(), mask_to_image(masks.parts[i].mask));
    names.push_back(file);
  }
  write_png((fs::path(dir) / "object.png").string(), mask_to_image(masks.object_mask));
  write_png((fs::path(dir) / "background.png").string(), mask_to_image(masks.background_mask));
  write_file_bytes((fs::path(dir) / "masks.json").string(), masks_to_json(masks));
  names.insert(names.begin(), {"masks.json", "object.png", "background.png"});
  return names;
}

PartMaskSet load_masks(const std::string& dir) {
  const auto bytes = read_file_bytes((fs::path(dir) / "masks.json").string());
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, "masks.json: malformed JSON at byte " + std::to_string(e.byte));
  }
  try {
    PartMaskSet set;
    if (!j.is_object()) throw Error(ErrorCode::kValidation, "masks.json: expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& name = it.key();
      const auto& p = it.value();
      PartMask m;
      m.name = name;
      m.localized = p.value("localized", false);
      m.score = p.value("score", 0.0);
      m.mask = image_to_mask(read_png((fs::path(dir) / p.at("file").get<std::string>()).string(), 1));
      set.parts.push_back(std::move(m));
    }
    const int h = set.parts.empty() ? kMaskSize : set.parts.front().mask.height();
    const int w = set.parts.empty() ? kMaskSize : set.parts.front().mask.width();
    const std::string object_file = "object.png";
    if (fs::exists(fs::path(dir) / object_file)) {
      set.object_mask = image_to_mask(read_png((fs::path(dir) / object_file).string(), 1));
    } else {
      Mask2D u = Mask2D::empty(h, w);
      for (const auto& p : set.parts) u = u | p.mask;
      set.object_mask = u;
    }
    set.background_mask = complement_of_parts(set.parts, h, w);
    set.validate();
    return set;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kValidation, std::string("masks.json: ") + e.what());
  }
}

std::vector<std::string> save_attention_debug(const std::string& dir, const LocalizationDebug& debug) {
  const fs::path sub = fs::path(dir) / "attention";
  dump_attention_maps(sub.string(), debug.part_names, debug.normalized);
  std::vector<std::string> names = {"attention/index.json"};
  for (std::size_t i = 0; i < debug.normalized.size(); ++i) {
    names.push_back("attention/attn_" + std::to_string(i) + ".png");
  }
  return names;
}

std::vector<std::string> save_generation(const std::string& dir, const GenerationResult& result) {
  fs::create_directories(dir);
  write_png((fs::path(dir) / "image.png").string(), tensor_to_image(result.image));
  json prompts = json::array();
  for (const auto& r : result.regions) prompts.push_back({{"region", r.name}, {"prompt", r.prompt}});
  write_file_bytes((fs::path(dir) / "prompts.json").string(), prompts.dump(2));
  return {"image.png", "prompts.json"};
}

std::string content_type_for(const std::string& name) {
  const auto ends = [&](const std::string& s) {
    return name.size() >= s.size() && name.compare(name.size() - s.size(), s.size(), s) == 0;
  };
  if (ends(".png")) return "image/png";
  if (ends(".json")) return "application/json";
  return "application/octet-stream";
}

}  // namespace partcraft
