// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#include "evaluation/datasets.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>

#include <json.hpp>

#include "backends/synthetic.hpp"
#include "core/error.hpp"
#include "core/png_io.hpp"
#include "evaluation/grouping.hpp"

namespace partcraft {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::vector<Keypoint> parse_keypoints(const std::string& text) {
  std::vector<Keypoint> out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ls(line);
    std::string f;
    while (std::getline(ls, f, '\t')) fields.push_back(f);
    if (fields.size() != 4) {
      throw Error(ErrorCode::kParse, "keypoint line " + std::to_string(line_no) + ": expected 4 tab-separated fields");
    }
    try {
      out.push_back({fields[0], std::stod(fields[1]), std::stod(fields[2]), std::stoi(fields[3]) != 0});
    } catch (const std::exception&) {
      throw Error(ErrorCode::kParse, "keypoint line " + std::to_string(line_no) + ": malformed number");
    }
  }
  return out;
}

Tensor load_image(const std::string& path) { return image_to_tensor(read_png(path, 3)); }

namespace {

void load_label_mask(EvalSample& s, const fs::path& root, const json& j) {
  const Image8 labels = read_png((root / j.at("labels").get<std::string>()).string(), 1);
  s.height = labels.height;
  s.width = labels.width;
  s.labels.assign(labels.pixels.begin(), labels.pixels.end());
}

void load_foreground(EvalSample& s, const fs::path& root, const json& j) {
  const Image8 fg = read_png((root / j.at("foreground").get<std::string>()).string(), 1);
  if (s.height == 0) {
    s.height = fg.height;
    s.width = fg.width;
  }
  if (fg.height != s.height || fg.width != s.width) {
    throw Error(ErrorCode::kValidation, "sample " + s.id + ": foreground size differs from ground truth");
  }
  s.foreground = fg.pixels;
}

}  // namespace

Dataset load_dataset(const std::string& kind, const std::string& root_dir) {
  if (kind != "deepfashion" && kind != "cub" && kind != "synthetic") {
    throw Error(ErrorCode::kInvalidArgument, "unknown dataset kind '" + kind + "'");
  }
  const fs::path root(root_dir);
  const auto bytes = read_file_bytes((root / "index.json").string());
  json index;
  try {
    index = json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, "index.json: malformed JSON at byte " + std::to_string(e.byte));
  }
  Dataset d;
  d.kind = kind;
  d.object = index.value("object", kind == "deepfashion" ? std::string("person") : std::string("bird"));
  d.categories = index.value("categories", std::vector<std::string>{});
  for (const auto& j : index.at("samples")) {
    EvalSample s;
    s.id = j.value("id", std::to_string(d.samples.size()));
    s.image_path = (root / j.at("image").get<std::string>()).string();
    if (j.contains("caption")) s.caption = j["caption"].get<std::string>();
    s.parts = j.value("parts", std::vector<std::string>{});
    if (j.contains("scene")) s.scene_json = j["scene"].dump();
    try {
      if (kind == "cub") {
        s.kind = GroundTruthKind::kKeypoints;
        const auto kp = read_file_bytes((root / j.at("keypoints").get<std::string>()).string());
        s.keypoints = parse_keypoints(std::string(kp.begin(), kp.end()));
        const Image8 img = read_png(s.image_path, 3);
        s.height = img.height;
        s.width = img.width;
        for (const auto& k : s.keypoints) {
          if (k.x < 0 || k.y < 0 || k.x >= s.width || k.y >= s.height) {
            throw Error(ErrorCode::kValidation, "keypoint '" + k.name + "' outside the image");
          }
        }
      } else {
        s.kind = GroundTruthKind::kLabelMask;
        load_label_mask(s, root, j);
      }
      load_foreground(s, root, j);
    } catch (const Error& e) {
      // Kept so the evaluation reports it as a failed sample.
      s.labels.clear();
      s.keypoints.clear();
      s.foreground.clear();
      s.height = s.width = 0;
      s.load_error = e.what();
    }
    d.samples.push_back(std::move(s));
  }
  return d;
}

void write_synthetic_dataset(const std::string& root_dir, int samples, std::uint64_t seed) {
  if (samples < 1) throw Error(ErrorCode::kInvalidArgument, "sample count must be positive");
  const fs::path root(root_dir);
  fs::create_directories(root);
  const ClusterGrouping grouping = ClusterGrouping::builtin("cub");
  std::vector<std::vector<std::string>> by_cluster(kMaxCluster + 1);
  for (const auto& [name, id] : grouping.clusters) by_cluster[id].push_back(name);
  std::vector<std::string> categories = {"background"};
  for (const auto& name : grouping.part_names()) categories.push_back(name);

  std::mt19937_64 rng(seed);
  json list = json::array();
  for (int i = 0; i < samples; ++i) {
    std::vector<int> clusters = {1, 2, 3, 4};
    std::shuffle(clusters.begin(), clusters.end(), rng);
    const int count = std::uniform_int_distribution<int>(2, 4)(rng);
    std::vector<std::string> names;
    for (int c = 0; c < count; ++c) {
      const auto& pool = by_cluster[clusters[c]];
      names.push_back(pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)]);
    }
    SyntheticScene scene = random_scene(seed * 1000003ull + static_cast<std::uint64_t>(i), names, "bird");
    scene.base_prompt = "a photo of a bird";
    SyntheticBackend backend(scene);
    const Tensor image = backend.target_field(backend.encode_text(scene.base_prompt));

    Image8 labels{kMaskSize, kMaskSize, 1, std::vector<std::uint8_t>(kPositions, 0)};
    for (const auto& part : scene.parts) {
      const auto idx = std::find(categories.begin(), categories.end(), part.name) - categories.begin();
      const Mask2D m = scene.part_mask(part.name);
      for (int p = 0; p < kPositions; ++p) {
        if (m[p]) labels.pixels[p] = static_cast<std::uint8_t>(idx);
      }
    }
    char id[32];
    std::snprintf(id, sizeof id, "%04d", i);
    const std::string base(id);
    write_png((root / (base + "_image.png")).string(), tensor_to_image(image));
    write_png((root / (base + "_labels.png")).string(), labels);
    write_png((root / (base + "_fg.png")).string(), mask_to_image(scene.object_mask()));
    list.push_back({{"id", base},
                    {"image", base + "_image.png"},
                    {"labels", base + "_labels.png"},
                    {"foreground", base + "_fg.png"},
                    {"caption", scene.base_prompt},
                    {"parts", names},
                    {"scene", json::parse(scene_to_json(scene))}});
  }
  const json index = {{"dataset", "synthetic"}, {"object", "bird"}, {"categories", categories}, {"samples", list}};
  write_file_bytes((root / "index.json").string(), index.dump(2));
}

}  // namespace partcraft
