// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace partcraft {

inline constexpr std::string_view kStartOfText = "<sot>";

// Half-open token range [begin, end).
struct TokenSpan {
  int begin = 0;
  int end = 0;
  int size() const { return end - begin; }
  bool operator==(const TokenSpan&) const = default;
};

// Lowercases and splits on anything that is not alphanumeric or an apostrophe.
std::vector<std::string> tokenize(std::string_view text);

// Lowercase + trim of surrounding whitespace; the key used for part-name
// uniqueness and lookups.
std::string normalize_name(std::string_view name);

std::string join(const std::vector<std::string>& items, std::string_view sep);

// First occurrence of `needle` as a contiguous run inside `haystack`.
std::optional<TokenSpan> find_span(const std::vector<std::string>& haystack,
                                   const std::vector<std::string>& needle,
                                   int from = 0);

// 64-bit FNV-1a, used for deterministic per-token seeds.
std::uint64_t fnv1a(std::string_view text, std::uint64_t seed = 0xcbf29ce484222325ull);

}  // namespace partcraft
