// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

// A linear toy latent model exposed through the backend plugin ABI.
//   latent 4×8×8, image 3×16×16, embeddings dim 8
//   eps(x, c, t) = k(t) x + W mean(c)
// Options: {"fail_init": true} makes init fail; {"attention": true} only
// advertises attention capture (and never emits anything).

#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "partcraft/partcraft.h"

namespace {

constexpr int kC = 4, kH = 8, kW = 8;
constexpr int kLatent = kC * kH * kW;
constexpr int kImgC = 3, kImgH = 16, kImgW = 16;
constexpr int kDim = 8;

struct Text {
  std::vector<std::string> words;
  std::vector<const char*> ptrs;
  std::vector<double> embeddings;
};

struct Toy {
  std::map<const double*, std::unique_ptr<Text>> live;
};

double weight(int i, int d) { return 0.05 * std::sin(0.37 * i + 1.3 * d + 0.5); }

double token_value(const std::string& token, int d) {
  unsigned h = 2166136261u;
  for (char ch : token) h = (h ^ static_cast<unsigned char>(ch)) * 16777619u;
  return std::cos(0.001 * static_cast<double>(h % 100000) + d);
}

double gain(int t) { return 0.1 + 0.0005 * t; }

void fail(char* err, size_t size, const char* msg) { std::snprintf(err, size, "%s", msg); }

int encode_text(void* user_data, const char* prompt, pc_text_conditioning* out, char*, size_t) {
  auto owned = std::make_unique<Text>();
  Text* text = owned.get();
  text->words.push_back("<sot>");
  std::string cur;
  for (const char* p = prompt; ; ++p) {
    if (*p == '\0' || *p == ' ') {
      if (!cur.empty()) text->words.push_back(cur);
      cur.clear();
      if (*p == '\0') break;
    } else {
      cur += *p;
    }
  }
  for (const auto& w : text->words) {
    text->ptrs.push_back(w.c_str());
    for (int d = 0; d < kDim; ++d) text->embeddings.push_back(token_value(w, d));
  }
  out->token_count = static_cast<int32_t>(text->words.size());
  out->dim = kDim;
  out->tokens = text->ptrs.data();
  out->embeddings = text->embeddings.data();
  static_cast<Toy*>(user_data)->live.emplace(text->embeddings.data(), std::move(owned));
  return 0;
}

void release_text(void* user_data, pc_text_conditioning* text) {
  if (text) static_cast<Toy*>(user_data)->live.erase(text->embeddings);
}

std::vector<double> mean_embedding(const pc_text_conditioning* cond) {
  std::vector<double> m(kDim, 0.0);
  for (int i = 0; i < cond->token_count; ++i) {
    for (int d = 0; d < kDim; ++d) m[d] += cond->embeddings[i * cond->dim + d] / cond->token_count;
  }
  return m;
}

int predict_noise(void*, const double* x, const pc_text_conditioning* cond, int32_t t, const pc_attention_hooks* hooks,
                  double* out, char* err, size_t err_size) {
  if (cond->dim != kDim) {
    fail(err, err_size, "embedding dim mismatch");
    return 1;
  }
  if (hooks && hooks->injected_self) {
    fail(err, err_size, "injection unsupported");
    return 1;
  }
  const auto m = mean_embedding(cond);
  for (int i = 0; i < kLatent; ++i) {
    double b = 0.0;
    for (int d = 0; d < kDim; ++d) b += weight(i, d) * m[d];
    out[i] = gain(t) * x[i] + b;
  }
  return 0;
}

int predict_noise_vjp_embedding(void*, const double*, const pc_text_conditioning* cond, int32_t,
                                const double* grad_eps, double* out, char*, size_t) {
  std::vector<double> g(kDim, 0.0);
  for (int i = 0; i < kLatent; ++i) {
    for (int d = 0; d < kDim; ++d) g[d] += grad_eps[i] * weight(i, d);
  }
  for (int i = 0; i < cond->token_count; ++i) {
    for (int d = 0; d < kDim; ++d) out[i * kDim + d] = g[d] / cond->token_count;
  }
  return 0;
}

int encode_image(void*, const double* image, double* latent, char*, size_t) {
  for (int c = 0; c < kC; ++c) {
    for (int y = 0; y < kH; ++y) {
      for (int x = 0; x < kW; ++x) {
        double acc = 0.0;
        for (int ch = 0; ch < kImgC; ++ch) {
          if (c < kImgC && ch != c) continue;
          for (int dy = 0; dy < 2; ++dy) {
            for (int dx = 0; dx < 2; ++dx) acc += image[(ch * kImgH + 2 * y + dy) * kImgW + 2 * x + dx];
          }
        }
        latent[(c * kH + y) * kW + x] = acc / (c < kImgC ? 4.0 : 12.0);
      }
    }
  }
  return 0;
}

int decode_image(void*, const double* latent, double* image, char*, size_t) {
  for (int ch = 0; ch < kImgC; ++ch) {
    for (int y = 0; y < kImgH; ++y) {
      for (int x = 0; x < kImgW; ++x) image[(ch * kImgH + y) * kImgW + x] = latent[(ch * kH + y / 2) * kW + x / 2];
    }
  }
  return 0;
}

int decode_vjp(void*, const double*, const double* grad_image, double* out, char*, size_t) {
  std::memset(out, 0, sizeof(double) * kLatent);
  for (int ch = 0; ch < kImgC; ++ch) {
    for (int y = 0; y < kImgH; ++y) {
      for (int x = 0; x < kImgW; ++x) out[(ch * kH + y / 2) * kW + x / 2] += grad_image[(ch * kImgH + y) * kImgW + x];
    }
  }
  return 0;
}

void destroy(void* user_data) { delete static_cast<Toy*>(user_data); }

}  // namespace

extern "C" __attribute__((visibility("default"))) int pc_backend_plugin_init(const char* options_json,
                                                                             pc_backend_callbacks* out, char* err,
                                                                             size_t err_size) {
  const std::string options = options_json ? options_json : "";
  if (options.find("\"fail_init\"") != std::string::npos) {
    fail(err, err_size, "toy backend refused to start");
    return 1;
  }
  std::memset(out, 0, sizeof(*out));
  out->abi_version = PC_BACKEND_ABI_VERSION;
  out->user_data = new Toy;
  out->latent_channels = kC;
  out->latent_height = kH;
  out->latent_width = kW;
  out->image_channels = kImgC;
  out->image_height = kImgH;
  out->image_width = kImgW;
  out->supports_attention = options.find("\"attention\"") != std::string::npos ? 1 : 0;
  out->encode_text = encode_text;
  out->release_text = release_text;
  out->predict_noise = predict_noise;
  out->encode_image = encode_image;
  out->decode_image = decode_image;
  out->decode_vjp = decode_vjp;
  out->predict_noise_vjp_embedding = predict_noise_vjp_embedding;
  out->destroy = destroy;
  return 0;
}
