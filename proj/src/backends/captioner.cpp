// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#include "backends/captioner.hpp"

#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "core/error.hpp"
#include "core/png_io.hpp"

namespace partcraft {

HttpCaptioner::HttpCaptioner(HttpCaptionerOptions options) : options_(std::move(options)) {
  const std::string& url = options_.endpoint;
  const auto scheme = url.find("://");
  if (url.empty() || scheme == std::string::npos) {
    throw Error(ErrorCode::kConfiguration, "captioner endpoint must be an http(s) URL",
                {{"endpoint", "invalid URL"}});
  }
  const auto slash = url.find('/', scheme + 3);
  scheme_host_port_ = url.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : url.substr(slash);
  if (options_.retries < 0) throw Error(ErrorCode::kConfiguration, "retries must be >= 0");
}

std::string HttpCaptioner::caption(const Tensor& image) {
  const auto png = encode_png(tensor_to_image(image));
  const std::string body(png.begin(), png.end());
  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(options_.timeout_seconds);
  client.set_read_timeout(options_.timeout_seconds);
  httplib::Headers headers;
  if (!options_.token_env.empty()) {
    if (const char* token = std::getenv(options_.token_env.c_str())) {
      headers.emplace("Authorization", std::string("Bearer ") + token);
    }
  }
  std::string last_error;
  const int attempts = options_.retries + 1;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    auto res = client.Post(path_, headers, body, "image/png");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP " + std::to_string(res->status);
      if (res->status < 500) break;
      continue;
    }
    try {
      const auto j = nlohmann::json::parse(res->body);
      const std::string caption = j.at("caption").get<std::string>();
      if (caption.empty()) throw Error(ErrorCode::kBackend, "captioner returned an empty caption");
      return caption;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kBackend, std::string("captioner returned malformed JSON: ") + e.what());
    }
  }
  throw Error(ErrorCode::kBackend, "captioner at " + options_.endpoint + " failed after " +
                                       std::to_string(attempts) + " attempt(s) (retries=" +
                                       std::to_string(options_.retries) + "): " + last_error);
}

std::unique_ptr<Captioner> make_captioner(const std::string& config_json) {
  if (config_json.empty()) {
    throw Error(ErrorCode::kConfiguration, "no captioner configured", {{"captioner", "required"}});
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(config_json);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParse, "malformed captioner config at byte " + std::to_string(e.byte));
  }
  const std::string kind = j.value("kind", std::string());
  if (kind == "stub") {
    if (!j.contains("caption")) throw Error(ErrorCode::kConfiguration, "stub captioner needs 'caption'");
    return std::make_unique<StubCaptioner>(j["caption"].get<std::string>());
  }
  if (kind == "http") {
    HttpCaptionerOptions o;
    o.endpoint = j.value("endpoint", std::string());
    o.token_env = j.value("token_env", std::string());
    o.retries = j.value("retries", o.retries);
    o.timeout_seconds = j.value("timeout_seconds", o.timeout_seconds);
    return std::make_unique<HttpCaptioner>(o);
  }
  throw Error(ErrorCode::kConfiguration, "captioner kind must be 'stub' or 'http'", {{"kind", "unknown"}});
}

}  // namespace partcraft
