// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#include "evaluation/evaluate.hpp"

#include <cmath>
#include <memory>

#include <json.hpp>

#include "backends/factory.hpp"
#include "backends/inversion.hpp"
#include "backends/synthetic.hpp"
#include "core/error.hpp"
#include "core/text.hpp"
#include "evaluation/metrics.hpp"
#include "localization/localization.hpp"

namespace partcraft {

using json = nlohmann::json;

std::string MetricsReport::to_json() const {
  json f = json::array();
  for (const auto& x : failures) f.push_back({{"id", x.id}, {"message", x.message}});
  const json j = {{"nmi", nmi}, {"ari", ari}, {"fg_nmi", fg_nmi}, {"fg_ari", fg_ari},
                  {"n", n}, {"failures", static_cast<int>(failures.size())}, {"failed_samples", f}};
  return j.dump(2);
}

int ground_truth_cluster(const std::string& name, const ClusterGrouping& grouping) {
  const std::string key = normalize_name(name);
  if (key == "background" || key == "bg") return 0;
  return grouping.cluster_of(name);
}

namespace {

int upsampled(const std::vector<int>& grid, int y, int x, int height, int width) {
  const int gy = static_cast<int>(static_cast<long long>(y) * kMaskSize / height);
  const int gx = static_cast<int>(static_cast<long long>(x) * kMaskSize / width);
  return grid[static_cast<std::size_t>(gy) * kMaskSize + gx];
}

}  // namespace

SampleMetrics score_sample(const std::vector<int>& predicted, const EvalSample& sample, const Dataset& dataset,
                           const ClusterGrouping& grouping) {
  if (predicted.size() != static_cast<std::size_t>(kPositions)) {
    throw Error(ErrorCode::kInvalidArgument, "predicted grid must be 32x32");
  }
  const int h = sample.height;
  const int w = sample.width;
  if (h <= 0 || w <= 0) throw Error(ErrorCode::kValidation, "sample has no ground truth");
  std::vector<int> pred;
  std::vector<int> gt;
  std::vector<std::uint8_t> fg;
  const bool has_fg = sample.foreground.size() == static_cast<std::size_t>(h) * w;
  if (sample.kind == GroundTruthKind::kLabelMask) {
    std::vector<int> category_cluster;
    for (const auto& c : dataset.categories) category_cluster.push_back(ground_truth_cluster(c, grouping));
    pred.reserve(sample.labels.size());
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const int label = sample.labels[static_cast<std::size_t>(y) * w + x];
        if (label < 0 || label >= static_cast<int>(category_cluster.size())) {
          throw Error(ErrorCode::kValidation, "label " + std::to_string(label) + " has no category");
        }
        pred.push_back(upsampled(predicted, y, x, h, w));
        gt.push_back(category_cluster[label]);
        fg.push_back(has_fg ? sample.foreground[static_cast<std::size_t>(y) * w + x] : 1);
      }
    }
  } else {
    for (const auto& k : sample.keypoints) {
      if (!k.visible) continue;
      const int x = static_cast<int>(k.x);
      const int y = static_cast<int>(k.y);
      pred.push_back(upsampled(predicted, y, x, h, w));
      gt.push_back(ground_truth_cluster(k.name, grouping));
      fg.push_back(has_fg ? sample.foreground[static_cast<std::size_t>(y) * w + x] : 1);
    }
    if (pred.empty()) throw Error(ErrorCode::kValidation, "no visible keypoints");
  }
  SampleMetrics m;
  m.nmi = nmi(pred, gt);
  m.ari = ari(pred, gt);
  const auto [fp, fgt] = fg_restrict(pred, gt, fg);
  m.fg_nmi = nmi(fp, fgt);
  m.fg_ari = ari(fp, fgt);
  return m;
}

SamplePipeline default_pipeline(const EvaluationContext& context) {
  if (context.config == nullptr) throw Error(ErrorCode::kInvalidArgument, "evaluation needs a config");
  return [context](const EvalSample& sample, const Dataset& dataset, const ClusterGrouping& grouping) {
    const PipelineConfig& config = *context.config;
    const Tensor image = load_image(sample.image_path);
    const std::string fallback = "a photo of a " + dataset.object;
    std::string caption;
    if (sample.caption) {
      caption = *sample.caption;
    } else if (context.captioner != nullptr) {
      caption = context.captioner->caption(image);
    }
    if (caption.empty() || !find_span(tokenize(caption), tokenize(dataset.object))) caption = fallback;

    RichPromptDocument doc;
    doc.base_prompt = caption;
    doc.object = dataset.object;
    for (const auto& name : sample.parts.empty() ? grouping.part_names() : sample.parts) {
      PartSpec p;
      p.name = name;
      doc.parts.push_back(p);
    }
    validate_document(doc);

    std::unique_ptr<DenoiserBackend> owned;
    DenoiserBackend* backend = context.backend;
    if (backend == nullptr) {
      if (!sample.scene_json.empty() && config.backend.name == "synthetic") {
        SyntheticScene scene = scene_from_json(sample.scene_json);
        owned = std::make_unique<SyntheticBackend>(scene, config.noise_schedule);
      } else {
        owned = make_backend(config, &doc);
      }
      backend = owned.get();
    }
    const InversionResult inv = ddim_invert(*backend, image, caption, inversion_options(config));
    return localize(doc, config, *backend, &inv.noise());
  };
}

MetricsReport evaluate_dataset(const Dataset& dataset, const SamplePipeline& pipeline,
                               const ClusterGrouping& grouping) {
  MetricsReport report;
  for (const auto& sample : dataset.samples) {
    try {
      if (!sample.load_error.empty()) throw Error(ErrorCode::kIo, sample.load_error);
      const PartMaskSet masks = pipeline(sample, dataset, grouping);
      const SampleMetrics m = score_sample(group_parts(masks, grouping), sample, dataset, grouping);
      if (!std::isfinite(m.nmi) || !std::isfinite(m.ari) || !std::isfinite(m.fg_nmi) || !std::isfinite(m.fg_ari)) {
        throw Error(ErrorCode::kInternal, "non-finite metric");
      }
      report.nmi += m.nmi;
      report.ari += m.ari;
      report.fg_nmi += m.fg_nmi;
      report.fg_ari += m.fg_ari;
      ++report.n;
    } catch (const std::exception& e) {
      report.failures.push_back({sample.id, e.what()});
    }
  }
  if (report.n == 0) {
    std::string msg = "no sample evaluated successfully";
    if (!report.failures.empty()) msg += " (first failure: " + report.failures.front().message + ")";
    throw Error(ErrorCode::kState, msg);
  }
  report.nmi /= report.n;
  report.ari /= report.n;
  report.fg_nmi /= report.n;
  report.fg_ari /= report.n;
  return report;
}

}  // namespace partcraft
