// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "partcraft/partcraft.h"

namespace {

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted = true; }

struct Failure {
  int code;
};

void check(pc_status status, const std::string& what) {
  if (status != PC_OK) {
    std::cerr << "partcraft: " << what << ": " << pc_status_name(status) << ": " << pc_last_error() << "\n";
    throw Failure{static_cast<int>(status)};
  }
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "partcraft: cannot read " << path << "\n";
    throw Failure{static_cast<int>(PC_ERR_IO)};
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) {
    std::cerr << "partcraft: cannot write " << path << "\n";
    throw Failure{static_cast<int>(PC_ERR_IO)};
  }
}

// Small RAII wrappers around the C handles.
template <typename T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() {
    if (p != nullptr) Free(p);
  }
};

using Doc = Handle<pc_document, pc_document_free>;
using Config = Handle<pc_config, pc_config_free>;
using Backend = Handle<pc_backend, pc_backend_free>;
using Masks = Handle<pc_masks, pc_masks_free>;
using Image = Handle<pc_image, pc_image_free>;
using Service = Handle<pc_service, pc_service_free>;

struct OwnedString {
  char* s = nullptr;
  ~OwnedString() { pc_string_free(s); }
};

// Config file with an optional --backend override.
std::string config_json(const std::string& path, const std::string& backend) {
  std::string text = path.empty() ? std::string("{}") : slurp(path);
  if (backend.empty()) return text;
  const auto brace = text.find('{');
  if (brace == std::string::npos) return text;
  const bool empty_object = text.find_first_not_of(" \t\r\n", brace + 1) == text.find('}', brace);
  return text.substr(0, brace + 1) + "\"backend\":\"" + backend + "\"" + (empty_object ? "" : ",") +
         text.substr(brace + 1);
}

void load_inputs(const std::string& doc_path, const std::string& cfg_path, const std::string& backend_name,
                 Doc& doc, Config& cfg, Backend& backend) {
  check(pc_document_parse(slurp(doc_path).c_str(), &doc.p), "document " + doc_path);
  check(pc_config_parse(config_json(cfg_path, backend_name).c_str(), &cfg.p), "config");
  check(pc_backend_create(cfg.p, doc.p, &backend.p), "backend");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Part-level controllable image composition"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(pc_version()));

  std::string doc_path, cfg_path, backend_name, out_path, masks_dir, intermediates, dataset, root, grouping,
      report_path, captioner_path, service_cfg;
  int samples = 20;
  std::uint64_t seed = 0;

  auto* loc = app.add_subcommand("localize", "Localize the document's parts and write masks");
  loc->add_option("--doc", doc_path, "Rich-text document JSON")->required()->check(CLI::ExistingFile);
  loc->add_option("--config", cfg_path, "Pipeline config JSON")->check(CLI::ExistingFile);
  loc->add_option("--backend", backend_name, "Backend name")->check(CLI::IsMember({"synthetic", "diffusion"}));
  loc->add_option("--out", out_path, "Output directory")->required();

  auto* gen = app.add_subcommand("generate", "Compose an image from localized masks");
  gen->add_option("--doc", doc_path, "Rich-text document JSON")->required()->check(CLI::ExistingFile);
  gen->add_option("--masks", masks_dir, "Directory written by localize")->required()->check(CLI::ExistingDirectory);
  gen->add_option("--config", cfg_path, "Pipeline config JSON")->check(CLI::ExistingFile);
  gen->add_option("--backend", backend_name, "Backend name")->check(CLI::IsMember({"synthetic", "diffusion"}));
  gen->add_option("--out", out_path, "Output PNG")->required();
  gen->add_option("--save-intermediates", intermediates, "Directory for per-step composites");

  auto* ev = app.add_subcommand("eval", "Unsupervised part-segmentation metrics on a dataset");
  ev->add_option("--dataset", dataset, "Dataset kind")->required()->check(
      CLI::IsMember({"deepfashion", "cub", "synthetic"}));
  ev->add_option("--root", root, "Dataset directory with index.json")->required()->check(CLI::ExistingDirectory);
  ev->add_option("--grouping", grouping, "Cluster grouping JSON")->check(CLI::ExistingFile);
  ev->add_option("--config", cfg_path, "Pipeline config JSON")->check(CLI::ExistingFile);
  ev->add_option("--captioner", captioner_path, "Captioner config JSON")->check(CLI::ExistingFile);
  ev->add_option("--report", report_path, "Report JSON path (stdout when omitted)");

  auto* mk = app.add_subcommand("make-synthetic", "Write a synthetic evaluation dataset");
  mk->add_option("--root", root, "Output directory")->required();
  mk->add_option("--samples", samples, "Number of samples")->check(CLI::PositiveNumber);
  mk->add_option("--seed", seed, "Random seed");

  auto* srv = app.add_subcommand("serve", "Run the HTTP job service");
  srv->add_option("--config", service_cfg, "Service config JSON")->check(CLI::ExistingFile);

  auto* color = app.add_subcommand("color", "Nearest named color of an RGB triple");
  int rgb[3] = {0, 0, 0};
  color->add_option("r", rgb[0])->required()->check(CLI::Range(0, 255));
  color->add_option("g", rgb[1])->required()->check(CLI::Range(0, 255));
  color->add_option("b", rgb[2])->required()->check(CLI::Range(0, 255));

  CLI11_PARSE(app, argc, argv);

  try {
    if (loc->parsed()) {
      Doc doc;
      Config cfg;
      Backend backend;
      load_inputs(doc_path, cfg_path, backend_name, doc, cfg, backend);
      Masks masks;
      check(pc_localize(doc.p, cfg.p, backend.p, &masks.p), "localize");
      check(pc_masks_save(masks.p, out_path.c_str()), "save masks");
      OwnedString json;
      check(pc_masks_to_json(masks.p, &json.s), "masks json");
      std::cout << json.s << "\n";
    } else if (gen->parsed()) {
      Doc doc;
      Config cfg;
      Backend backend;
      load_inputs(doc_path, cfg_path, backend_name, doc, cfg, backend);
      Masks masks;
      check(pc_masks_load(masks_dir.c_str(), &masks.p), "load masks");
      Image image;
      check(pc_generate(doc.p, masks.p, cfg.p, backend.p, intermediates.empty() ? nullptr : intermediates.c_str(),
                        &image.p),
            "generate");
      check(pc_image_save_png(image.p, out_path.c_str()), "save image");
    } else if (ev->parsed()) {
      Config cfg;
      check(pc_config_parse(cfg_path.empty() ? "" : slurp(cfg_path).c_str(), &cfg.p), "config");
      const std::string captioner = captioner_path.empty() ? std::string() : slurp(captioner_path);
      OwnedString report;
      check(pc_evaluate(dataset.c_str(), root.c_str(), grouping.empty() ? nullptr : grouping.c_str(), cfg.p,
                        captioner.empty() ? nullptr : captioner.c_str(), &report.s),
            "eval");
      if (report_path.empty()) {
        std::cout << report.s << "\n";
      } else {
        spit(report_path, report.s);
      }
    } else if (mk->parsed()) {
      check(pc_synthetic_dataset_write(root.c_str(), samples, seed), "make-synthetic");
    } else if (srv->parsed()) {
      Service service;
      check(pc_service_create(service_cfg.empty() ? nullptr : slurp(service_cfg).c_str(), &service.p), "serve");
      check(pc_service_start(service.p), "serve");
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "partcraft: listening on port " << pc_service_port(service.p) << "\n";
      while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(200));
      check(pc_service_stop(service.p), "serve");
    } else if (color->parsed()) {
      OwnedString name;
      check(pc_nearest_named_color(rgb[0], rgb[1], rgb[2], &name.s), "color");
      std::cout << name.s << "\n";
    }
  } catch (const Failure& f) {
    return f.code;
  }
  return 0;
}
