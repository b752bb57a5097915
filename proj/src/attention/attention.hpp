// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "core/tensor.hpp"

namespace partcraft {

inline constexpr int kPositions = kMaskSize * kMaskSize;

enum class AttentionKind { kSelf, kCross };

// One head of one layer at one denoising step.
// Self:  values[q * (h*w) + k], queries and keys over the h×w grid.
// Cross: values[q * tokens + j], queries over the h×w grid.
struct AttentionCapture {
  AttentionKind kind = AttentionKind::kCross;
  int step = 0;
  int layer = 0;
  int head = 0;
  int height = 0;
  int width = 0;
  int tokens = 0;
  std::vector<float> values;
};

class AttentionSink {
 public:
  virtual ~AttentionSink() = default;
  virtual void on_attention(const AttentionCapture& capture) = 0;
};

// Row-stochastic self-attention over the 32×32 grid, as used by a backend at
// one step. Shared read-only between the recording run and injected runs.
struct SelfAttentionMap {
  std::vector<double> values;  // kPositions × kPositions
};
using SelfAttentionRef = std::shared_ptr<const SelfAttentionMap>;

struct AttentionBundle {
  // kPositions × kPositions, empty when no self-attention was captured.
  std::vector<double> self_attn;
  // One 32×32 map per token.
  std::vector<Map2D> cross_attn;
  std::vector<std::string> token_labels;
  int step_start = 0;  // first (largest) remaining-step index folded in
  int step_end = 0;    // last (smallest)
  std::size_t self_count = 0;
  std::size_t cross_count = 0;

  bool has_self() const { return !self_attn.empty(); }
  // Index of `label` in token_labels, -1 if absent.
  int token_index(const std::string& label) const;
};

// Area-weighted resampling of a single-channel h×w grid to out_h×out_w.
std::vector<double> area_resample(const std::vector<double>& grid, int h, int w, int out_h, int out_w);

// Folds captures into running means. Feed from one thread.
class AttentionAccumulator {
 public:
  explicit AttentionAccumulator(std::vector<std::string> token_labels = {});

  void add(const AttentionCapture& capture);
  // Weighted merge (weights = capture counts).
  void merge(const AttentionBundle& bundle);
  bool empty() const { return self_count_ == 0 && cross_count_ == 0; }
  AttentionBundle finish() const;

 private:
  void note_step(int step);

  std::vector<std::string> labels_;
  std::vector<double> self_sum_;
  std::vector<double> cross_sum_;  // tokens × kPositions
  int tokens_ = -1;
  std::size_t self_count_ = 0;
  std::size_t cross_count_ = 0;
  int step_start_ = 0;
  int step_end_ = 0;
  bool any_step_ = false;
};

// Sink adapter that folds everything it receives.
class AccumulatingSink : public AttentionSink {
 public:
  explicit AccumulatingSink(AttentionAccumulator& acc) : acc_(acc) {}
  void on_attention(const AttentionCapture& capture) override { acc_.add(capture); }

 private:
  AttentionAccumulator& acc_;
};

AttentionBundle accumulate(const std::vector<AttentionCapture>& records,
                           std::vector<std::string> token_labels = {});

// Elementwise mean of two bundles' self-attention (cross maps from `a`).
AttentionBundle merge_self_attention(const AttentionBundle& a, const AttentionBundle& b);

// A part's raw score map: the mean over its token span. The span is given as
// token indices into the bundle.
struct PartTokens {
  std::string name;
  std::vector<int> token_indices;
};

// Ratio normalization over the part tokens at every position after the
// start-of-text token has been dropped. All-zero positions get 1/K.
// Returns one map per entry of `parts`.
std::vector<Map2D> normalize_cross_attention(const AttentionBundle& bundle,
                                             const std::vector<PartTokens>& parts);
// Single-token form: every non-<sot> token is a part token.
Map2D normalize_cross_attention(const AttentionBundle& bundle, int token);

// Debug dump: one grayscale PNG per map plus index.json.
void dump_attention_maps(const std::string& dir, const std::vector<std::string>& names,
                         const std::vector<Map2D>& maps);

}  // namespace partcraft
