// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#include "attention/attention.hpp"

#include <algorithm>
#include <filesystem>

#include <json.hpp>

#include "core/error.hpp"
#include "core/png_io.hpp"
#include "core/text.hpp"

namespace partcraft {

namespace {

// weights[i * n + j]: share of target cell i covered by source cell j.
std::vector<double> area_weights(int n, int m) {
  std::vector<double> w(static_cast<std::size_t>(m) * n, 0.0);
  const double scale = static_cast<double>(n) / m;
  for (int i = 0; i < m; ++i) {
    const double lo = i * scale;
    const double hi = (i + 1) * scale;
    for (int j = static_cast<int>(lo); j < n && j < hi; ++j) {
      const double overlap = std::min(hi, j + 1.0) - std::max(lo, static_cast<double>(j));
      if (overlap > 0) w[static_cast<std::size_t>(i) * n + j] = overlap / scale;
    }
  }
  return w;
}

}  // namespace

std::vector<double> area_resample(const std::vector<double>& grid, int h, int w, int out_h,
                                  int out_w) {
  if (grid.size() != static_cast<std::size_t>(h) * w) {
    throw Error(ErrorCode::kInvalidArgument, "grid size does not match its dimensions");
  }
  if (h == out_h && w == out_w) return grid;
  const auto wy = area_weights(h, out_h);
  const auto wx = area_weights(w, out_w);
  std::vector<double> rows(static_cast<std::size_t>(h) * out_w, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int ox = 0; ox < out_w; ++ox) {
      double acc = 0.0;
      for (int x = 0; x < w; ++x) acc += wx[static_cast<std::size_t>(ox) * w + x] * grid[y * w + x];
      rows[static_cast<std::size_t>(y) * out_w + ox] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(out_h) * out_w, 0.0);
  for (int oy = 0; oy < out_h; ++oy) {
    for (int y = 0; y < h; ++y) {
      const double wgt = wy[static_cast<std::size_t>(oy) * h + y];
      if (wgt == 0.0) continue;
      for (int ox = 0; ox < out_w; ++ox) {
        out[static_cast<std::size_t>(oy) * out_w + ox] += wgt * rows[static_cast<std::size_t>(y) * out_w + ox];
      }
    }
  }
  return out;
}

int AttentionBundle::token_index(const std::string& label) const {
  const auto it = std::find(token_labels.begin(), token_labels.end(), label);
  return it == token_labels.end() ? -1 : static_cast<int>(it - token_labels.begin());
}

AttentionAccumulator::AttentionAccumulator(std::vector<std::string> token_labels)
    : labels_(std::move(token_labels)) {
  if (!labels_.empty()) tokens_ = static_cast<int>(labels_.size());
}

void AttentionAccumulator::note_step(int step) {
  if (!any_step_) {
    step_start_ = step_end_ = step;
    any_step_ = true;
    return;
  }
  step_start_ = std::max(step_start_, step);
  step_end_ = std::min(step_end_, step);
}

void AttentionAccumulator::add(const AttentionCapture& c) {
  const std::size_t cells = static_cast<std::size_t>(c.height) * c.width;
  if (cells == 0) throw Error(ErrorCode::kInvalidArgument, "attention capture has no positions");
  if (c.kind == AttentionKind::kCross) {
    if (c.values.size() != cells * c.tokens) {
      throw Error(ErrorCode::kInvalidArgument, "cross-attention capture has wrong size");
    }
    if (tokens_ >= 0 && c.tokens != tokens_) {
      throw Error(ErrorCode::kInvalidArgument,
                  "token count mismatch across captures: " + std::to_string(c.tokens) + " vs " +
                      std::to_string(tokens_));
    }
    tokens_ = c.tokens;
    if (cross_sum_.empty()) cross_sum_.assign(static_cast<std::size_t>(tokens_) * kPositions, 0.0);
    std::vector<double> grid(cells);
    for (int j = 0; j < c.tokens; ++j) {
      for (std::size_t q = 0; q < cells; ++q) grid[q] = c.values[q * c.tokens + j];
      const auto resized = area_resample(grid, c.height, c.width, kMaskSize, kMaskSize);
      double* dst = cross_sum_.data() + static_cast<std::size_t>(j) * kPositions;
      for (int p = 0; p < kPositions; ++p) dst[p] += resized[p];
    }
    ++cross_count_;
  } else {
    if (c.values.size() != cells * cells) {
      throw Error(ErrorCode::kInvalidArgument, "self-attention capture has wrong size");
    }
    if (self_sum_.empty()) self_sum_.assign(static_cast<std::size_t>(kPositions) * kPositions, 0.0);
    if (c.height == kMaskSize && c.width == kMaskSize) {
      for (std::size_t i = 0; i < c.values.size(); ++i) self_sum_[i] += c.values[i];
    } else {
      // Keys first (per query row), then queries (per output key column).
      std::vector<double> by_key(cells * kPositions);
      std::vector<double> grid(cells);
      for (std::size_t q = 0; q < cells; ++q) {
        for (std::size_t k = 0; k < cells; ++k) grid[k] = c.values[q * cells + k];
        const auto r = area_resample(grid, c.height, c.width, kMaskSize, kMaskSize);
        std::copy(r.begin(), r.end(), by_key.begin() + q * kPositions);
      }
      for (int k = 0; k < kPositions; ++k) {
        for (std::size_t q = 0; q < cells; ++q) grid[q] = by_key[q * kPositions + k];
        const auto r = area_resample(grid, c.height, c.width, kMaskSize, kMaskSize);
        for (int q = 0; q < kPositions; ++q) self_sum_[static_cast<std::size_t>(q) * kPositions + k] += r[q];
      }
    }
    ++self_count_;
  }
  note_step(c.step);
}

void AttentionAccumulator::merge(const AttentionBundle& b) {
  if (b.cross_count > 0) {
    const int tokens = static_cast<int>(b.cross_attn.size());
    if (tokens_ >= 0 && tokens != tokens_) {
      throw Error(ErrorCode::kInvalidArgument, "token count mismatch when merging bundles");
    }
    tokens_ = tokens;
    if (labels_.empty()) labels_ = b.token_labels;
    if (cross_sum_.empty()) cross_sum_.assign(static_cast<std::size_t>(tokens_) * kPositions, 0.0);
    for (int j = 0; j < tokens; ++j) {
      for (int p = 0; p < kPositions; ++p) {
        cross_sum_[static_cast<std::size_t>(j) * kPositions + p] += b.cross_attn[j].values[p] * b.cross_count;
      }
    }
    cross_count_ += b.cross_count;
  }
  if (b.self_count > 0) {
    if (self_sum_.empty()) self_sum_.assign(static_cast<std::size_t>(kPositions) * kPositions, 0.0);
    for (std::size_t i = 0; i < self_sum_.size(); ++i) self_sum_[i] += b.self_attn[i] * b.self_count;
    self_count_ += b.self_count;
  }
  if (b.self_count + b.cross_count > 0) {
    note_step(b.step_start);
    note_step(b.step_end);
  }
}

AttentionBundle AttentionAccumulator::finish() const {
  if (empty()) throw Error(ErrorCode::kInvalidArgument, "no attention captures to accumulate");
  AttentionBundle b;
  b.step_start = step_start_;
  b.step_end = step_end_;
  b.self_count = self_count_;
  b.cross_count = cross_count_;
  if (self_count_ > 0) {
    b.self_attn.resize(self_sum_.size());
    const double inv = 1.0 / static_cast<double>(self_count_);
    for (std::size_t i = 0; i < self_sum_.size(); ++i) b.self_attn[i] = self_sum_[i] * inv;
  }
  if (cross_count_ > 0) {
    const double inv = 1.0 / static_cast<double>(cross_count_);
    for (int j = 0; j < tokens_; ++j) {
      Map2D m(kMaskSize, kMaskSize);
      for (int p = 0; p < kPositions; ++p) {
        m.values[p] = cross_sum_[static_cast<std::size_t>(j) * kPositions + p] * inv;
      }
      b.cross_attn.push_back(std::move(m));
    }
    b.token_labels = labels_;
    if (b.token_labels.empty()) {
      for (int j = 0; j < tokens_; ++j) b.token_labels.push_back(j == 0 ? std::string(kStartOfText) : "t" + std::to_string(j));
    }
    if (static_cast<int>(b.token_labels.size()) != tokens_) {
      throw Error(ErrorCode::kInvalidArgument, "token labels do not match captured token count");
    }
  }
  return b;
}

AttentionBundle accumulate(const std::vector<AttentionCapture>& records,
                           std::vector<std::string> token_labels) {
  if (records.empty()) throw Error(ErrorCode::kInvalidArgument, "no attention captures to accumulate");
  AttentionAccumulator acc(std::move(token_labels));
  for (const auto& r : records) acc.add(r);
  return acc.finish();
}

AttentionBundle merge_self_attention(const AttentionBundle& a, const AttentionBundle& b) {
  if (!a.has_self() || !b.has_self()) {
    throw Error(ErrorCode::kInvalidArgument, "both bundles need self-attention to merge");
  }
  AttentionBundle out = a;
  for (std::size_t i = 0; i < out.self_attn.size(); ++i) {
    out.self_attn[i] = 0.5 * (a.self_attn[i] + b.self_attn[i]);
  }
  out.self_count = a.self_count + b.self_count;
  out.step_start = std::max(a.step_start, b.step_start);
  out.step_end = std::min(a.step_end, b.step_end);
  return out;
}

std::vector<Map2D> normalize_cross_attention(const AttentionBundle& bundle,
                                             const std::vector<PartTokens>& parts) {
  if (bundle.token_index(std::string(kStartOfText)) < 0) {
    throw Error(ErrorCode::kInvalidArgument, "bundle has no start-of-text token");
  }
  const int tokens = static_cast<int>(bundle.cross_attn.size());
  std::vector<Map2D> raw;
  for (const auto& part : parts) {
    if (part.token_indices.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "part '" + part.name + "' has no tokens");
    }
    Map2D m(kMaskSize, kMaskSize);
    for (int idx : part.token_indices) {
      if (idx < 0 || idx >= tokens) {
        throw Error(ErrorCode::kInvalidArgument, "token index " + std::to_string(idx) + " out of range");
      }
      if (bundle.token_labels[idx] == kStartOfText) {
        throw Error(ErrorCode::kInvalidArgument, "the start-of-text token is not a part token");
      }
      for (int p = 0; p < kPositions; ++p) m.values[p] += bundle.cross_attn[idx].values[p];
    }
    const double inv = 1.0 / static_cast<double>(part.token_indices.size());
    for (double& v : m.values) v *= inv;
    raw.push_back(std::move(m));
  }
  const double uniform = parts.empty() ? 0.0 : 1.0 / static_cast<double>(parts.size());
  std::vector<Map2D> out(parts.size(), Map2D(kMaskSize, kMaskSize));
  for (int p = 0; p < kPositions; ++p) {
    double total = 0.0;
    for (const auto& m : raw) total += m.values[p];
    for (std::size_t i = 0; i < raw.size(); ++i) {
      out[i].values[p] = total > 0.0 ? raw[i].values[p] / total : uniform;
    }
  }
  return out;
}

Map2D normalize_cross_attention(const AttentionBundle& bundle, int token) {
  const int tokens = static_cast<int>(bundle.cross_attn.size());
  if (token < 0 || token >= tokens) {
    throw Error(ErrorCode::kInvalidArgument, "token index " + std::to_string(token) + " out of range");
  }
  std::vector<PartTokens> parts;
  int target = -1;
  for (int j = 0; j < tokens; ++j) {
    if (bundle.token_labels[j] == kStartOfText) continue;
    if (j == token) target = static_cast<int>(parts.size());
    parts.push_back({bundle.token_labels[j], {j}});
  }
  if (target < 0) throw Error(ErrorCode::kInvalidArgument, "the start-of-text token is not a part token");
  return normalize_cross_attention(bundle, parts)[target];
}

void dump_attention_maps(const std::string& dir, const std::vector<std::string>& names,
                         const std::vector<Map2D>& maps) {
  std::filesystem::create_directories(dir);
  nlohmann::json index = nlohmann::json::array();
  for (std::size_t i = 0; i < maps.size(); ++i) {
    const std::string file = "attn_" + std::to_string(i) + ".png";
    write_png((std::filesystem::path(dir) / file).string(), map_to_image(maps[i]));
    index.push_back({{"name", i < names.size() ? names[i] : ""},
                     {"file", file},
                     {"min", maps[i].min()},
                     {"max", maps[i].max()}});
  }
  write_file_bytes((std::filesystem::path(dir) / "index.json").string(), index.dump(2));
}

}  // namespace partcraft
