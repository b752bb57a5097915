// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#include "backends/callback_backend.hpp"

#include <dlfcn.h>

#include <array>

#include "core/error.hpp"

namespace partcraft {

namespace {

constexpr std::size_t kErrSize = 512;

struct TextView {
  std::vector<const char*> tokens;
  pc_text_conditioning c{};
  explicit TextView(const TextConditioning& cond) {
    for (const auto& t : cond.tokens) tokens.push_back(t.c_str());
    c.token_count = static_cast<int32_t>(cond.tokens.size());
    c.dim = cond.dim;
    c.tokens = tokens.data();
    c.embeddings = cond.embeddings.data();
  }
};

void check(int rc, const std::array<char, kErrSize>& err, const std::string& what) {
  if (rc != 0) {
    std::string msg(err.data());
    throw Error(ErrorCode::kBackend, what + " failed" + (msg.empty() ? "" : ": " + msg));
  }
}

struct HookContext {
  const AttentionControl* control;
  AttentionAccumulator* self_record;
};

void emit_trampoline(void* ctx, const pc_attention_capture* c) {
  auto* h = static_cast<HookContext*>(ctx);
  AttentionCapture cap;
  cap.kind = c->kind == PC_ATTENTION_SELF ? AttentionKind::kSelf : AttentionKind::kCross;
  cap.step = h->control->step;
  cap.layer = c->layer;
  cap.head = c->head;
  cap.height = c->height;
  cap.width = c->width;
  cap.tokens = c->tokens;
  const std::size_t cells = static_cast<std::size_t>(c->height) * c->width;
  const std::size_t n = cap.kind == AttentionKind::kSelf ? cells * cells : cells * c->tokens;
  cap.values.assign(c->values, c->values + n);
  if (h->control->sink) h->control->sink->on_attention(cap);
  if (h->self_record && cap.kind == AttentionKind::kSelf) h->self_record->add(cap);
}

}  // namespace

CallbackBackend::CallbackBackend(const pc_backend_callbacks& callbacks, std::string name)
    : cb_(callbacks), name_(std::move(name)) {
  if (cb_.abi_version != PC_BACKEND_ABI_VERSION) {
    throw Error(ErrorCode::kBackend, "backend ABI version " + std::to_string(cb_.abi_version) +
                                         " is not supported (expected " +
                                         std::to_string(PC_BACKEND_ABI_VERSION) + ")");
  }
  if (!cb_.encode_text || !cb_.predict_noise || !cb_.release_text) {
    throw Error(ErrorCode::kBackend, "backend callbacks must provide encode_text, release_text and predict_noise");
  }
  if (cb_.latent_channels <= 0 || cb_.latent_height <= 0 || cb_.latent_width <= 0) {
    throw Error(ErrorCode::kBackend, "backend latent shape must be positive");
  }
}

CallbackBackend::~CallbackBackend() {
  if (cb_.destroy) cb_.destroy(cb_.user_data);
  if (library_) dlclose(library_);
}

std::unique_ptr<CallbackBackend> CallbackBackend::load_plugin(const std::string& path,
                                                              const std::string& options_json) {
  if (path.empty()) {
    throw Error(ErrorCode::kConfiguration, "diffusion backend needs a 'plugin' path", {{"plugin", "required"}});
  }
  void* lib = dlopen(path.c_str(), RTLD_NOW | RTLD_LOCAL);
  if (!lib) throw Error(ErrorCode::kConfiguration, std::string("cannot load backend plugin: ") + dlerror());
  auto init = reinterpret_cast<pc_backend_plugin_init_fn>(dlsym(lib, PC_BACKEND_PLUGIN_INIT_SYMBOL));
  if (!init) {
    dlclose(lib);
    throw Error(ErrorCode::kConfiguration, path + " does not export " PC_BACKEND_PLUGIN_INIT_SYMBOL);
  }
  pc_backend_callbacks cb{};
  std::array<char, kErrSize> err{};
  if (init(options_json.c_str(), &cb, err.data(), err.size()) != 0) {
    dlclose(lib);
    throw Error(ErrorCode::kBackend, std::string("backend plugin init failed: ") + err.data());
  }
  std::unique_ptr<CallbackBackend> backend;
  try {
    backend = std::make_unique<CallbackBackend>(cb);
  } catch (...) {
    if (cb.destroy) cb.destroy(cb.user_data);
    dlclose(lib);
    throw;
  }
  backend->library_ = lib;
  return backend;
}

BackendCapabilities CallbackBackend::capabilities() const {
  BackendCapabilities c;
  c.attention_capture = cb_.supports_attention != 0;
  c.attention_reweight = cb_.supports_reweight != 0;
  c.self_injection = cb_.supports_injection != 0;
  c.image_codec = cb_.encode_image && cb_.decode_image;
  c.decode_vjp = cb_.decode_vjp != nullptr;
  c.optimizable_embeddings = cb_.predict_noise_vjp_embedding != nullptr;
  return c;
}

Shape CallbackBackend::latent_shape() const {
  return {cb_.latent_channels, cb_.latent_height, cb_.latent_width};
}

Shape CallbackBackend::image_shape() const {
  if (cb_.image_channels <= 0) return latent_shape();
  return {cb_.image_channels, cb_.image_height, cb_.image_width};
}

TextConditioning CallbackBackend::encode_text(const std::string& prompt) {
  pc_text_conditioning out{};
  std::array<char, kErrSize> err{};
  check(cb_.encode_text(cb_.user_data, prompt.c_str(), &out, err.data(), err.size()), err, "encode_text");
  TextConditioning c;
  c.prompt = prompt;
  c.dim = out.dim;
  for (int i = 0; i < out.token_count; ++i) c.tokens.emplace_back(out.tokens[i]);
  c.embeddings.assign(out.embeddings, out.embeddings + static_cast<std::size_t>(out.token_count) * out.dim);
  cb_.release_text(cb_.user_data, &out);
  if (c.tokens.empty()) throw Error(ErrorCode::kBackend, "encode_text returned no tokens");
  return c;
}

Tensor CallbackBackend::predict_noise(const Tensor& x, const TextConditioning& cond, int train_timestep,
                                      const AttentionControl& control) {
  if (x.shape() != latent_shape()) throw Error(ErrorCode::kInvalidArgument, "latent shape mismatch");
  const BackendCapabilities caps = capabilities();
  if (control.injected_self && !caps.self_injection) throw_capability(name_, "self-attention injection");
  if (!control.token_log_weights.empty() && !caps.attention_reweight) {
    bool identity = true;
    for (double w : control.token_log_weights) identity = identity && w == 0.0;
    if (!identity) throw_capability(name_, "attention reweighting");
  }
  const bool wants_capture = control.sink != nullptr || (control.record_self && !control.injected_self);
  if (wants_capture && !caps.attention_capture) throw_capability(name_, "attention capture");

  AttentionAccumulator self_record;
  HookContext ctx{&control, control.record_self && !control.injected_self ? &self_record : nullptr};
  pc_attention_hooks hooks{};
  if (wants_capture) {
    hooks.emit = emit_trampoline;
    hooks.ctx = &ctx;
  }
  hooks.token_log_weights = control.token_log_weights.empty() ? nullptr : control.token_log_weights.data();
  hooks.token_log_weight_count = static_cast<int32_t>(control.token_log_weights.size());
  hooks.injected_self = control.injected_self ? control.injected_self->values.data() : nullptr;

  TextView view(cond);
  Tensor eps(latent_shape());
  std::array<char, kErrSize> err{};
  check(cb_.predict_noise(cb_.user_data, x.values().data(), &view.c, train_timestep, &hooks,
                          eps.values().data(), err.data(), err.size()),
        err, "predict_noise");
  if (!eps.all_finite()) throw Error(ErrorCode::kBackend, "predict_noise returned non-finite values");
  if (control.record_self) {
    if (control.injected_self) {
      control.record_self(control.injected_self);
    } else if (!self_record.empty()) {
      auto map = std::make_shared<SelfAttentionMap>();
      map->values = self_record.finish().self_attn;
      if (!map->values.empty()) control.record_self(std::move(map));
    }
  }
  return eps;
}

Tensor CallbackBackend::encode_image(const Tensor& image) {
  if (!cb_.encode_image) throw_capability(name_, "image encoding");
  if (image.shape() != image_shape()) throw Error(ErrorCode::kInvalidArgument, "image shape mismatch");
  Tensor out(latent_shape());
  std::array<char, kErrSize> err{};
  check(cb_.encode_image(cb_.user_data, image.values().data(), out.values().data(), err.data(), err.size()), err,
        "encode_image");
  return out;
}

Tensor CallbackBackend::decode_image(const Tensor& latent) {
  if (!cb_.decode_image) throw_capability(name_, "image decoding");
  if (latent.shape() != latent_shape()) throw Error(ErrorCode::kInvalidArgument, "latent shape mismatch");
  Tensor out(image_shape());
  std::array<char, kErrSize> err{};
  check(cb_.decode_image(cb_.user_data, latent.values().data(), out.values().data(), err.data(), err.size()), err,
        "decode_image");
  return out;
}

Tensor CallbackBackend::decode_vjp(const Tensor& latent, const Tensor& grad_image) {
  if (!cb_.decode_vjp) throw_capability(name_, "decoder gradients");
  Tensor out(latent_shape());
  std::array<char, kErrSize> err{};
  check(cb_.decode_vjp(cb_.user_data, latent.values().data(), grad_image.values().data(), out.values().data(),
                       err.data(), err.size()),
        err, "decode_vjp");
  return out;
}

std::vector<double> CallbackBackend::predict_noise_vjp_embedding(const Tensor& x, const TextConditioning& cond,
                                                                 int train_timestep, const Tensor& grad_eps) {
  if (!cb_.predict_noise_vjp_embedding) {
    throw Error(ErrorCode::kCapability, "null-text requires optimizable embeddings");
  }
  TextView view(cond);
  std::vector<double> out(cond.embeddings.size());
  std::array<char, kErrSize> err{};
  check(cb_.predict_noise_vjp_embedding(cb_.user_data, x.values().data(), &view.c, train_timestep,
                                        grad_eps.values().data(), out.data(), err.data(), err.size()),
        err, "predict_noise_vjp_embedding");
  return out;
}

}  // namespace partcraft
