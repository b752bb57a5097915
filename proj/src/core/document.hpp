// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "core/text.hpp"

namespace partcraft {

struct Rgb {
  int r = 0;
  int g = 0;
  int b = 0;
  bool operator==(const Rgb&) const = default;
};

// One user-declared part plus its appearance attributes.
struct PartSpec {
  std::string name;
  std::optional<std::string> footnote;
  std::optional<Rgb> color;
  std::optional<std::string> style;
  double size = 1.0;

  bool operator==(const PartSpec&) const = default;
};

// Base prompt, the object to edit, and the attributed parts of that object.
struct RichPromptDocument {
  std::string base_prompt;
  std::string object;
  std::vector<PartSpec> parts;

  // Token span of `object` inside tokenize(base_prompt). Throws kValidation
  // when the object does not occur in the base prompt.
  TokenSpan object_span() const;

  bool operator==(const RichPromptDocument&) const = default;
};

// Parses the rich-text JSON document. Errors: kParse (with byte offset) for
// malformed JSON, kValidation (with field errors) for schema violations.
RichPromptDocument parse_rich_document(std::string_view serialized);

// Canonical serialization. `size` is omitted when it equals the default 1.0.
std::string serialize_rich_document(const RichPromptDocument& doc);

// Throws kValidation listing every problem found.
void validate_document(const RichPromptDocument& doc);

// Part names in declaration order, one span per part ("beak crown wings").
std::vector<std::string> build_part_prompt(const RichPromptDocument& doc);

}  // namespace partcraft
