// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#include "generation/named_colors.hpp"

#include <set>

#include <json.hpp>

#include "core/error.hpp"
#include "core/resources.hpp"

namespace partcraft {

const NamedColorTable& NamedColorTable::builtin() {
  static const NamedColorTable table = from_json(std::string(resource("named_colors.json")));
  return table;
}

NamedColorTable NamedColorTable::from_json(const std::string& text) {
  NamedColorTable t;
  try {
    const auto j = nlohmann::json::parse(text);
    t.version = j.value("version", std::string());
    std::set<std::string> names;
    for (const auto& e : j.at("colors")) {
      NamedColor c;
      c.name = e.at("name").get<std::string>();
      const auto& rgb = e.at("rgb");
      c.rgb = {rgb.at(0).get<int>(), rgb.at(1).get<int>(), rgb.at(2).get<int>()};
      if (!names.insert(c.name).second) throw Error(ErrorCode::kValidation, "duplicate color name '" + c.name + "'");
      t.entries.push_back(std::move(c));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kValidation, std::string("invalid color table: ") + e.what());
  }
  if (t.entries.empty()) throw Error(ErrorCode::kValidation, "color table is empty");
  return t;
}

std::string NamedColorTable::to_json() const {
  nlohmann::json colors = nlohmann::json::array();
  for (const auto& c : entries) colors.push_back({{"name", c.name}, {"rgb", {c.rgb.r, c.rgb.g, c.rgb.b}}});
  return nlohmann::json{{"version", version}, {"colors", colors}}.dump();
}

const NamedColor& nearest_named_color(const Rgb& rgb, const NamedColorTable& table) {
  if (table.entries.empty()) throw Error(ErrorCode::kInvalidArgument, "color table is empty");
  const NamedColor* best = nullptr;
  long best_d = 0;
  for (const auto& c : table.entries) {
    const long dr = c.rgb.r - rgb.r;
    const long dg = c.rgb.g - rgb.g;
    const long db = c.rgb.b - rgb.b;
    const long d = dr * dr + dg * dg + db * db;
    if (!best || d < best_d) {
      best = &c;
      best_d = d;
    }
  }
  return *best;
}

}  // namespace partcraft
