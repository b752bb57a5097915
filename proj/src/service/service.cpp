// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#include "service/service.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "backends/factory.hpp"
#include "core/config.hpp"
#include "core/document.hpp"
#include "core/error.hpp"
#include "core/png_io.hpp"
#include "generation/generation.hpp"
#include "generation/named_colors.hpp"
#include "localization/localization.hpp"
#include "service/artifacts.hpp"

namespace partcraft {

namespace fs = std::filesystem;
using json = nlohmann::json;

ServiceOptions parse_service_options(const std::string& text) {
  ServiceOptions o;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, "service config: malformed JSON at byte " + std::to_string(e.byte));
  }
  if (!j.is_object()) throw Error(ErrorCode::kConfiguration, "service config must be an object");
  std::vector<FieldError> errors;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const json& v = it.value();
    try {
      if (k == "host") o.host = v.get<std::string>();
      else if (k == "port") o.port = v.get<int>();
      else if (k == "workers") o.workers = v.get<int>();
      else if (k == "backend_profile") o.backend_profile = v.get<std::string>();
      else if (k == "store") o.store = v.get<std::string>();
      else if (k == "cors_origin") o.cors_origin = v.get<std::string>();
      else errors.push_back({k, "unknown key"});
    } catch (const json::exception&) {
      errors.push_back({k, "wrong type"});
    }
  }
  if (o.port < 0 || o.port > 65535) errors.push_back({"port", "must be in 0..65535"});
  if (o.workers < 1) errors.push_back({"workers", "must be at least 1"});
  if (!errors.empty()) throw Error(ErrorCode::kConfiguration, "invalid service config", errors);
  return o;
}

void apply_environment(ServiceOptions& o) {
  const auto env_int = [](const char* name, int& out) {
    if (const char* v = std::getenv(name); v != nullptr && *v != '\0') {
      char* end = nullptr;
      const long n = std::strtol(v, &end, 10);
      if (*end != '\0') throw Error(ErrorCode::kConfiguration, std::string(name) + " is not an integer");
      out = static_cast<int>(n);
    }
  };
  env_int("PARTCRAFT_PORT", o.port);
  env_int("PARTCRAFT_WORKERS", o.workers);
  if (const char* v = std::getenv("PARTCRAFT_BACKEND_PROFILE"); v != nullptr && *v != '\0') o.backend_profile = v;
  if (const char* v = std::getenv("PARTCRAFT_STORE"); v != nullptr && *v != '\0') o.store = v;
  if (o.workers < 1) throw Error(ErrorCode::kConfiguration, "PARTCRAFT_WORKERS must be at least 1");
}

namespace {

struct ParsedRequest {
  JobKind kind = JobKind::kLocalize;
  RichPromptDocument document;
  PipelineConfig config;
  std::string masks_job;
};

std::string config_text(const json& request, const std::string& default_profile) {
  json c = request.contains("config") && !request["config"].is_null() ? request["config"] : json::object();
  if (!c.is_object()) throw Error(ErrorCode::kConfiguration, "config must be an object", {{"config", "not an object"}});
  if (!c.contains("profile")) c["profile"] = default_profile;
  return c.dump();
}

// Throws kParse/kValidation/kConfiguration with field errors.
ParsedRequest parse_request(const std::string& body, const std::string& default_profile) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, "request: malformed JSON at byte " + std::to_string(e.byte));
  }
  if (!j.is_object()) throw Error(ErrorCode::kValidation, "request must be an object");
  ParsedRequest r;
  const std::string kind = j.value("kind", std::string("localize"));
  const auto parsed_kind = parse_job_kind(kind);
  if (!parsed_kind) {
    throw Error(ErrorCode::kValidation, "unknown job kind '" + kind + "'",
                {{"kind", "expected localize, generate or localize+generate"}});
  }
  r.kind = *parsed_kind;
  if (!j.contains("document")) throw Error(ErrorCode::kValidation, "missing document", {{"document", "required"}});
  r.document = parse_rich_document(j["document"].is_string() ? j["document"].get<std::string>() : j["document"].dump());
  r.config = parse_pipeline_config(config_text(j, default_profile));
  if (r.kind == JobKind::kGenerate) {
    if (!j.contains("masks_job") || !j["masks_job"].is_string()) {
      throw Error(ErrorCode::kValidation, "generate jobs need masks_job", {{"masks_job", "required"}});
    }
    r.masks_job = j["masks_job"].get<std::string>();
  }
  return r;
}

json error_body(const Error& e) {
  json fields = json::array();
  for (const auto& f : e.fields()) fields.push_back({{"field", f.field}, {"message", f.message}});
  return {{"error", e.what()}, {"code", error_code_name(e.code())}, {"fields", fields}};
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

json snapshot(const JobRecord& r) {
  json j = {{"id", r.id}, {"kind", job_kind_name(r.kind)}, {"state", job_state_name(r.state)}};
  if (r.state == JobState::kFailed) j["error"] = r.error;
  if (r.state == JobState::kDone) {
    json a = json::object();
    for (const auto& name : r.artifacts) a[name] = "/v1/jobs/" + r.id + "/artifacts/" + name;
    j["artifacts"] = a;
  }
  return j;
}

}  // namespace

std::vector<std::string> run_job(const std::string& request_json, const std::string& default_profile,
                                 const std::string& artifact_dir, const std::string& masks_dir) {
  const ParsedRequest r = parse_request(request_json, default_profile);
  std::unique_ptr<DenoiserBackend> backend;
  try {
    backend = make_backend(r.config, &r.document);
  } catch (...) {
    rethrow_with_context("backend");
  }
  std::vector<std::string> artifacts;
  PartMaskSet masks;
  if (r.kind == JobKind::kGenerate) {
    try {
      masks = load_masks(masks_dir);
    } catch (...) {
      rethrow_with_context("generate: loading masks");
    }
  } else {
    LocalizationDebug debug;
    masks = localize(r.document, r.config, *backend, nullptr, &debug);
    artifacts = save_masks(artifact_dir, masks);
    const auto attn = save_attention_debug(artifact_dir, debug);
    artifacts.insert(artifacts.end(), attn.begin(), attn.end());
  }
  if (r.kind != JobKind::kLocalize) {
    GenerationResult result;
    try {
      result = generate(r.document, masks, r.config, *backend);
    } catch (...) {
      rethrow_with_context("generate");
    }
    const auto files = save_generation(artifact_dir, result);
    artifacts.insert(artifacts.end(), files.begin(), files.end());
  }
  return artifacts;
}

Service::Service(ServiceOptions options)
    : options_(std::move(options)), store_(options_.store), server_(std::make_unique<httplib::Server>()) {
  config_profile(options_.backend_profile);
  if (options_.workers < 1) throw Error(ErrorCode::kConfiguration, "workers must be at least 1");
}

Service::~Service() { stop(); }

void Service::install_routes() {
  auto& svr = *server_;
  const std::string origin = options_.cors_origin;
  svr.set_default_headers({{"Access-Control-Allow-Origin", origin},
                           {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                           {"Access-Control-Allow-Headers", "Content-Type"}});
  svr.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  svr.Get("/v1/health", [this](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, {{"status", "ok"}, {"workers", options_.workers}, {"backend_profile", options_.backend_profile}});
  });

  svr.Get("/v1/colors", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(NamedColorTable::builtin().to_json(), "application/json");
  });

  svr.Get("/v1/colors/nearest", [](const httplib::Request& req, httplib::Response& res) {
    int rgb[3];
    const char* keys[3] = {"r", "g", "b"};
    for (int i = 0; i < 3; ++i) {
      if (!req.has_param(keys[i])) {
        send_json(res, 422, {{"error", "missing channel"}, {"fields", {{{"field", keys[i]}, {"message", "required"}}}}});
        return;
      }
      try {
        std::size_t used = 0;
        const std::string v = req.get_param_value(keys[i]);
        rgb[i] = std::stoi(v, &used);
        if (used != v.size() || rgb[i] < 0 || rgb[i] > 255) throw std::out_of_range("channel");
      } catch (const std::exception&) {
        send_json(res, 422, {{"error", "channel out of range"},
                             {"fields", {{{"field", keys[i]}, {"message", "integer in 0..255"}}}}});
        return;
      }
    }
    const NamedColor& c = nearest_named_color(Rgb{rgb[0], rgb[1], rgb[2]});
    send_json(res, 200, {{"name", c.name}, {"rgb", {c.rgb.r, c.rgb.g, c.rgb.b}}});
  });

  svr.Post("/v1/jobs", [this](const httplib::Request& req, httplib::Response& res) {
    try {
      const ParsedRequest r = parse_request(req.body, options_.backend_profile);
      if (r.kind == JobKind::kGenerate) {
        const auto masks = store_.get(r.masks_job);
        if (!masks) {
          throw Error(ErrorCode::kValidation, "unknown masks_job '" + r.masks_job + "'", {{"masks_job", "unknown job"}});
        }
        if (masks->kind == JobKind::kGenerate) {
          throw Error(ErrorCode::kValidation, "masks_job must be a localize job", {{"masks_job", "not a localize job"}});
        }
      }
      const std::string id = store_.create(r.kind, req.body);
      enqueue(id);
      send_json(res, 202, {{"id", id}, {"state", "queued"}});
    } catch (const Error& e) {
      send_json(res, e.code() == ErrorCode::kParse ? 400 : 422, error_body(e));
    }
  });

  svr.Get(R"(/v1/jobs/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    const auto r = store_.get(req.matches[1]);
    if (!r) {
      send_json(res, 404, {{"error", "unknown job"}});
      return;
    }
    send_json(res, 200, snapshot(*r));
  });

  svr.Get(R"(/v1/jobs/([^/]+)/artifacts/(.+))", [this](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    const std::string name = req.matches[2];
    const auto r = store_.get(id);
    if (!r) {
      send_json(res, 404, {{"error", "unknown job"}});
      return;
    }
    if (r->state != JobState::kDone) {
      send_json(res, 409, {{"error", std::string("job is ") + job_state_name(r->state)}});
      return;
    }
    const auto path = store_.artifact_path(id, name);
    if (!path) {
      send_json(res, 404, {{"error", "unknown artifact '" + name + "'"}});
      return;
    }
    const auto bytes = read_file_bytes(*path);
    res.set_content(std::string(bytes.begin(), bytes.end()), content_type_for(name));
  });
}

void Service::enqueue(const std::string& id) {
  {
    std::lock_guard lock(queue_mutex_);
    queue_.push_back(id);
  }
  queue_cv_.notify_one();
}

void Service::execute(const std::string& id) {
  try {
    store_.mark_running(id);
  } catch (const Error&) {
    return;
  }
  try {
    const std::string request = store_.request(id);
    std::string masks_dir;
    const json j = json::parse(request);
    if (j.contains("masks_job") && j["masks_job"].is_string()) {
      const std::string masks_job = j["masks_job"].get<std::string>();
      const auto m = store_.get(masks_job);
      if (!m || m->state != JobState::kDone) {
        throw Error(ErrorCode::kState, "generate: masks job " + masks_job + " is not done");
      }
      masks_dir = store_.artifact_dir(masks_job);
    }
    auto artifacts = run_job(request, options_.backend_profile, store_.artifact_dir(id), masks_dir);
    store_.mark_done(id, std::move(artifacts));
  } catch (const std::exception& e) {
    store_.mark_failed(id, e.what());
  }
}

void Service::worker_loop() {
  for (;;) {
    std::string id;
    {
      std::unique_lock lock(queue_mutex_);
      queue_cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
      if (stopping_) return;
      id = queue_.front();
      queue_.pop_front();
    }
    execute(id);
  }
}

void Service::start() {
  std::lock_guard guard(lifecycle_mutex_);
  if (started_ || stopped_) throw Error(ErrorCode::kState, "service already started");
  install_routes();
  if (options_.port == 0) {
    port_ = server_->bind_to_any_port(options_.host);
    if (port_ <= 0) throw Error(ErrorCode::kIo, "cannot bind " + options_.host);
  } else {
    if (!server_->bind_to_port(options_.host, options_.port)) {
      throw Error(ErrorCode::kIo, "cannot bind " + options_.host + ":" + std::to_string(options_.port));
    }
    port_ = options_.port;
  }
  for (const auto& id : store_.recover()) enqueue(id);
  {
    std::lock_guard lock(queue_mutex_);
    started_ = true;
    stopped_ = false;
    stopping_ = false;
  }
  for (int i = 0; i < options_.workers; ++i) workers_.emplace_back([this] { worker_loop(); });
  listener_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

void Service::wait() {
  std::unique_lock lock(queue_mutex_);
  stopped_cv_.wait(lock, [this] { return stopped_ || !started_; });
}

void Service::stop() {
  std::lock_guard guard(lifecycle_mutex_);
  if (!started_) return;
  {
    std::lock_guard lock(queue_mutex_);
    stopping_ = true;
  }
  queue_cv_.notify_all();
  server_->stop();
  if (listener_.joinable()) listener_.join();
  for (auto& w : workers_) {
    if (w.joinable()) w.join();
  }
  workers_.clear();
  {
    std::lock_guard lock(queue_mutex_);
    started_ = false;
    stopped_ = true;
  }
  stopped_cv_.notify_all();
}

}  // namespace partcraft
