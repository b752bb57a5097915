// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/document.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <json.hpp>

#include "core/error.hpp"

namespace partcraft {

using json = nlohmann::json;

namespace {

const std::set<std::string> kTopLevelKeys = {"base", "object", "parts"};
const std::set<std::string> kPartKeys = {"name", "footnote", "color", "style", "size"};

std::string part_field(std::size_t i, const std::string& key) {
  return "parts[" + std::to_string(i) + "]." + key;
}

}  // namespace

TokenSpan RichPromptDocument::object_span() const {
  const auto base_tokens = tokenize(base_prompt);
  const auto object_tokens = tokenize(object);
  auto span = find_span(base_tokens, object_tokens);
  if (!span) {
    throw Error(ErrorCode::kValidation,
                "object '" + object + "' does not occur in the base prompt",
                {{"object", "not found in base prompt"}});
  }
  return *span;
}

void validate_document(const RichPromptDocument& doc) {
  std::vector<FieldError> errors;
  if (tokenize(doc.base_prompt).empty()) errors.push_back({"base", "base prompt is empty"});
  if (tokenize(doc.object).empty()) {
    errors.push_back({"object", "object token is missing or empty"});
  } else if (!find_span(tokenize(doc.base_prompt), tokenize(doc.object))) {
    errors.push_back({"object", "object '" + doc.object + "' not found in base prompt"});
  }

  std::map<std::string, int> seen;
  std::vector<std::string> duplicates;
  for (std::size_t i = 0; i < doc.parts.size(); ++i) {
    const PartSpec& part = doc.parts[i];
    const std::string key = normalize_name(part.name);
    if (key.empty()) errors.push_back({part_field(i, "name"), "part name is empty"});
    if (!key.empty() && seen[key]++ == 1) duplicates.push_back(key);
    if (part.color) {
      for (int v : {part.color->r, part.color->g, part.color->b}) {
        if (v < 0 || v > 255) {
          errors.push_back({part_field(i, "color"), "color components must lie in [0,255]"});
          break;
        }
      }
    }
    if (!(part.size > 0.0) || !std::isfinite(part.size)) {
      errors.push_back({part_field(i, "size"), "size must be a positive number"});
    }
  }
  if (!duplicates.empty()) {
    std::string names = join(duplicates, ", ");
    errors.push_back({"parts", "duplicate part names: " + names});
  }
  if (!errors.empty()) {
    std::string message = "invalid document:";
    for (const auto& e : errors) message += " " + e.field + ": " + e.message + ";";
    throw Error(ErrorCode::kValidation, message, errors);
  }
}

RichPromptDocument parse_rich_document(std::string_view serialized) {
  json j;
  try {
    j = json::parse(serialized.begin(), serialized.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, "malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }

  std::vector<FieldError> errors;
  RichPromptDocument doc;
  if (!j.is_object()) {
    throw Error(ErrorCode::kValidation, "document must be a JSON object", {{"", "not an object"}});
  }
  for (const auto& [key, value] : j.items()) {
    if (!kTopLevelKeys.count(key)) errors.push_back({key, "unknown attribute"});
  }

  if (!j.contains("base") || !j["base"].is_string()) {
    errors.push_back({"base", "base prompt is required and must be a string"});
  } else {
    doc.base_prompt = j["base"].get<std::string>();
  }
  if (!j.contains("object") || !j["object"].is_string()) {
    errors.push_back({"object", "object token is required and must be a string"});
  } else {
    doc.object = j["object"].get<std::string>();
  }

  if (!j.contains("parts")) {
    errors.push_back({"parts", "parts is required (use [] for none)"});
  } else {
    if (!j["parts"].is_array()) {
      errors.push_back({"parts", "parts must be an array"});
    } else {
      std::size_t i = 0;
      for (const auto& p : j["parts"]) {
        PartSpec part;
        if (!p.is_object()) {
          errors.push_back({"parts[" + std::to_string(i) + "]", "part must be an object"});
          ++i;
          continue;
        }
        for (const auto& [key, value] : p.items()) {
          if (!kPartKeys.count(key)) errors.push_back({part_field(i, key), "unknown attribute"});
        }
        if (!p.contains("name") || !p["name"].is_string()) {
          errors.push_back({part_field(i, "name"), "name is required and must be a string"});
        } else {
          part.name = p["name"].get<std::string>();
        }
        if (p.contains("footnote")) {
          if (p["footnote"].is_string()) part.footnote = p["footnote"].get<std::string>();
          else errors.push_back({part_field(i, "footnote"), "footnote must be a string"});
        }
        if (p.contains("style")) {
          if (p["style"].is_string()) part.style = p["style"].get<std::string>();
          else errors.push_back({part_field(i, "style"), "style must be a string"});
        }
        if (p.contains("color")) {
          const auto& c = p["color"];
          if (c.is_array() && c.size() == 3 &&
              std::all_of(c.begin(), c.end(), [](const json& v) { return v.is_number_integer(); })) {
            part.color = Rgb{c[0].get<int>(), c[1].get<int>(), c[2].get<int>()};
          } else {
            errors.push_back({part_field(i, "color"), "color must be an array of three integers"});
          }
        }
        if (p.contains("size")) {
          if (p["size"].is_number()) part.size = p["size"].get<double>();
          else errors.push_back({part_field(i, "size"), "size must be a number"});
        }
        doc.parts.push_back(std::move(part));
        ++i;
      }
    }
  }

  if (!errors.empty()) {
    std::string message = "invalid document:";
    for (const auto& e : errors) message += " " + e.field + ": " + e.message + ";";
    throw Error(ErrorCode::kValidation, message, errors);
  }
  validate_document(doc);
  return doc;
}

std::string serialize_rich_document(const RichPromptDocument& doc) {
  json parts = json::array();
  for (const PartSpec& part : doc.parts) {
    json p = {{"name", part.name}};
    if (part.footnote) p["footnote"] = *part.footnote;
    if (part.color) p["color"] = {part.color->r, part.color->g, part.color->b};
    if (part.style) p["style"] = *part.style;
    if (part.size != 1.0) p["size"] = part.size;
    parts.push_back(std::move(p));
  }
  json j = {{"base", doc.base_prompt}, {"object", doc.object}, {"parts", std::move(parts)}};
  return j.dump();
}

std::vector<std::string> build_part_prompt(const RichPromptDocument& doc) {
  if (doc.parts.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "part prompt requires at least one part");
  }
  std::vector<std::string> names;
  names.reserve(doc.parts.size());
  for (const PartSpec& part : doc.parts) names.push_back(part.name);
  return names;
}

}  // namespace partcraft
