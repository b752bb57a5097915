// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "backends/backend.hpp"
#include "backends/captioner.hpp"
#include "core/config.hpp"
#include "core/part_masks.hpp"
#include "evaluation/datasets.hpp"
#include "evaluation/grouping.hpp"

namespace partcraft {

struct SampleMetrics {
  double nmi = 0.0;
  double ari = 0.0;
  double fg_nmi = 0.0;
  double fg_ari = 0.0;
};

struct SampleFailure {
  std::string id;
  std::string message;
};

struct MetricsReport {
  double nmi = 0.0;
  double ari = 0.0;
  double fg_nmi = 0.0;
  double fg_ari = 0.0;
  int n = 0;
  std::vector<SampleFailure> failures;

  std::string to_json() const;
};

// Ground-truth cluster label of a dataset category or keypoint name.
// "background" and "bg" map to 0.
int ground_truth_cluster(const std::string& name, const ClusterGrouping& grouping);

// Compares a predicted 32×32 cluster grid with the sample's ground truth.
SampleMetrics score_sample(const std::vector<int>& predicted, const EvalSample& sample, const Dataset& dataset,
                           const ClusterGrouping& grouping);

// Mask prediction for one sample; the default runs inversion then localization.
using SamplePipeline = std::function<PartMaskSet(const EvalSample&, const Dataset&, const ClusterGrouping&)>;

struct EvaluationContext {
  const PipelineConfig* config = nullptr;
  DenoiserBackend* backend = nullptr;  // reused across samples; null = one per sample
  Captioner* captioner = nullptr;
};

SamplePipeline default_pipeline(const EvaluationContext& context);

// Per-sample failures are recorded and excluded; zero successes is an error.
MetricsReport evaluate_dataset(const Dataset& dataset, const SamplePipeline& pipeline,
                               const ClusterGrouping& grouping);

}  // namespace partcraft
