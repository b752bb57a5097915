// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>

#include "core/tensor.hpp"

namespace partcraft {

class Captioner {
 public:
  virtual ~Captioner() = default;
  virtual std::string caption(const Tensor& image) = 0;
};

class StubCaptioner : public Captioner {
 public:
  explicit StubCaptioner(std::string text) : text_(std::move(text)) {}
  std::string caption(const Tensor&) override { return text_; }

 private:
  std::string text_;
};

struct HttpCaptionerOptions {
  std::string endpoint;   // http://host:port/path
  std::string token_env;  // environment variable holding a bearer token, optional
  int retries = 2;        // extra attempts after the first
  int timeout_seconds = 30;
};

// POSTs the image as PNG; expects {"caption": "..."} back.
class HttpCaptioner : public Captioner {
 public:
  explicit HttpCaptioner(HttpCaptionerOptions options);
  std::string caption(const Tensor& image) override;

 private:
  HttpCaptionerOptions options_;
  std::string scheme_host_port_;
  std::string path_;
};

// {"kind": "stub", "caption": "..."} or {"kind": "http", "endpoint": ...,
// "token_env": ..., "retries": n}. Empty/missing configuration is a
// kConfiguration error.
std::unique_ptr<Captioner> make_captioner(const std::string& config_json);

}  // namespace partcraft
