// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "backends/callback_backend.hpp"
#include "backends/captioner.hpp"
#include "backends/factory.hpp"
#include "backends/inversion.hpp"
#include "backends/scheduler.hpp"
#include "backends/synthetic.hpp"
#include "core/error.hpp"
#include "localization/localization.hpp"
#include "support.hpp"

using namespace partcraft;

namespace {

Tensor random_tensor(testing::Gen& g, Shape shape) {
  Tensor t(shape);
  for (double& v : t.values()) v = g.normal();
  return t;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kInternal;
}

Tensor scene_image(const SyntheticScene& scene) {
  SyntheticBackend backend(scene);
  return backend.target_field(backend.encode_text(scene.effective_base_prompt()));
}

std::unique_ptr<CallbackBackend> toy(const std::string& options = "") {
  return CallbackBackend::load_plugin(PARTCRAFT_TOY_PLUGIN, options);
}

}  // namespace

TEST_CASE("noise schedule matches the scaled-linear formula") {
  const auto a = alphas_cumprod({});
  REQUIRE(a.size() == 1000);
  double prod = 1.0;
  for (int i = 0; i < 1000; ++i) {
    const double beta = std::pow(std::sqrt(0.00085) + (std::sqrt(0.012) - std::sqrt(0.00085)) * i / 999.0, 2);
    prod *= 1 - beta;
    CHECK(a[i] == doctest::Approx(prod).epsilon(1e-12));
  }
  const DdimScheduler s50({}, 50);
  CHECK(s50.train_timestep(1) == 1);
  CHECK(s50.train_timestep(50) == 981);
  CHECK(s50.alpha_bar(0) == 1.0);
  const DdimScheduler s41({}, 41);
  CHECK(s41.train_timestep(41) == 961);
  CHECK_THROWS_AS(s50.train_timestep(51), Error);
  CHECK(code_of([] { DdimScheduler({}, 5, -1.0); }) == ErrorCode::kConfiguration);
}

TEST_CASE("DDIM step matches the closed form") {
  testing::Gen g(51);
  const DdimScheduler sched({}, 50);
  const Tensor x = random_tensor(g, {2, 4, 4});
  const Tensor eps = random_tensor(g, {2, 4, 4});
  for (int s : {50, 17, 1}) {
    const double a = sched.alpha_bar(s), ap = sched.alpha_bar(s - 1);
    const Tensor next = sched.step(x, eps, s);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double x0 = (x[i] - std::sqrt(1 - a) * eps[i]) / std::sqrt(a);
      CHECK(next[i] == doctest::Approx(std::sqrt(ap) * x0 + std::sqrt(1 - ap) * eps[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("step and invert_step are inverse") {
  testing::Gen g(52);
  for (int n : {10, 41, 50}) {
    const DdimScheduler sched({}, n);
    for (int s = 1; s <= n; ++s) {
      const Tensor x = random_tensor(g, {4, 8, 8});
      const Tensor eps = random_tensor(g, {4, 8, 8});
      CHECK(max_abs_diff(sched.invert_step(sched.step(x, eps, s), eps, s), x) < 1e-5);
      CHECK(max_abs_diff(sched.step(sched.invert_step(x, eps, s), eps, s), x) < 1e-5);
    }
  }
}

TEST_CASE("stochastic steps need a generator and cannot be inverted") {
  testing::Gen g(53);
  const DdimScheduler sched({}, 10, 1.0);
  const Tensor x = random_tensor(g, {1, 2, 2});
  CHECK_THROWS_AS(sched.step(x, x, 3), Error);
  std::mt19937_64 rng(1);
  CHECK(sched.step(x, x, 3, &rng).all_finite());
  CHECK(code_of([&] { sched.invert_step(x, x, 3); }) == ErrorCode::kConfiguration);
  SyntheticBackend backend(random_scene(1, {"beak"}, "bird"));
  InversionOptions opts;
  opts.eta = 0.5;
  CHECK(code_of([&] { ddim_invert(backend, scene_image(backend.scene()), "a bird", opts); }) ==
        ErrorCode::kConfiguration);
}

TEST_CASE("synthetic invert then denoise reconstructs the image") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto scene = random_scene(seed, {"beak", "tail", "wing"}, "bird");
    SyntheticBackend backend(scene);
    const Tensor image = scene_image(scene);
    InversionOptions opts;
    const auto inv = ddim_invert(backend, image, "a photo of a bird", opts);
    REQUIRE(inv.trajectory.size() == 51);
    const Tensor back = ddim_denoise(backend, inv.noise(), "a photo of a bird", opts);
    CHECK(max_abs_diff(back, image) < 1e-3);
  }
}

TEST_CASE("inversion with zero steps is the identity") {
  SyntheticBackend backend(random_scene(4, {"beak"}, "bird"));
  const Tensor image = scene_image(backend.scene());
  InversionOptions opts;
  opts.steps = 0;
  const auto inv = ddim_invert(backend, image, "a photo of a bird", opts);
  REQUIRE(inv.trajectory.size() == 1);
  CHECK(inv.noise() == image);
}

TEST_CASE("mismatched guidance hurts the reconstruction") {
  SyntheticBackend backend(random_scene(5, {"beak", "tail"}, "bird"));
  const Tensor image = scene_image(backend.scene());
  InversionOptions opts;
  const auto inv = ddim_invert(backend, image, "a photo of a bird", opts);
  const double matched = max_abs_diff(ddim_denoise(backend, inv.noise(), "a photo of a bird", opts), image);
  InversionOptions other = opts;
  other.guidance = 3.0;
  const double mismatched = max_abs_diff(ddim_denoise(backend, inv.noise(), "a photo of a bird", other), image);
  CHECK(mismatched > matched);
  CHECK(mismatched > 1e-2);
}

TEST_CASE("null-text inversion needs optimizable embeddings") {
  SyntheticBackend backend(random_scene(6, {"beak"}, "bird"));
  try {
    null_text_optimize(backend, scene_image(backend.scene()), "a bird", {});
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kCapability);
    CHECK(std::string(e.what()) == "null-text requires optimizable embeddings");
  }
}

TEST_CASE("null-text on the toy plugin") {
  auto backend = toy();
  testing::Gen g(54);
  Tensor image(backend->image_shape());
  for (double& v : image.values()) v = g.uniform();
  NullTextOptions opts;
  opts.inversion.steps = 10;
  opts.guidance = 3.0;
  opts.iterations = 0;
  const auto none = null_text_optimize(*backend, image, "a bird", opts);
  const auto empty = backend->encode_text("");
  for (const auto& u : none.uncond) CHECK(u.embeddings == empty.embeddings);

  opts.iterations = 20;
  const auto tuned = null_text_optimize(*backend, image, "a bird", opts);
  InversionOptions plain = opts.inversion;
  plain.guidance = opts.guidance;
  const Tensor target = backend->encode_image(image);
  const double plain_err = max_abs_diff(ddim_denoise(*backend, none.noise, "a bird", plain), target);
  const double tuned_err = max_abs_diff(null_text_denoise(*backend, tuned, "a bird", opts), target);
  CHECK(tuned_err < plain_err);
}

TEST_CASE("captioners") {
  StubCaptioner stub("a small bird");
  CHECK(stub.caption(Tensor({3, 2, 2})) == "a small bird");
  CHECK(make_captioner(R"({"kind":"stub","caption":"a red bird"})")->caption(Tensor({3, 2, 2})) == "a red bird");
  CHECK(code_of([] { make_captioner(""); }) == ErrorCode::kConfiguration);
  CHECK(code_of([] { make_captioner("{}"); }) == ErrorCode::kConfiguration);
  CHECK(code_of([] { make_captioner(R"({"kind":"http"})"); }) == ErrorCode::kConfiguration);
  auto unreachable = make_captioner(R"({"kind":"http","endpoint":"http://127.0.0.1:1/caption","retries":1})");
  try {
    unreachable->caption(Tensor({3, 2, 2}, 0.5));
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kBackend);
    CHECK(std::string(e.what()).find("after 2 attempt") != std::string::npos);
  }
}

TEST_CASE("toy plugin through the callback adapter") {
  auto backend = toy();
  CHECK(backend->name() == "diffusion");
  CHECK(backend->latent_shape() == Shape{4, 8, 8});
  CHECK(backend->image_shape() == Shape{3, 16, 16});
  const auto caps = backend->capabilities();
  CHECK(caps.image_codec);
  CHECK(caps.decode_vjp);
  CHECK(caps.optimizable_embeddings);
  CHECK_FALSE(caps.attention_capture);

  const auto cond = backend->encode_text("a photo of a bird");
  CHECK(cond.tokens == std::vector<std::string>{"<sot>", "a", "photo", "of", "a", "bird"});
  CHECK(cond.embeddings.size() == 6 * 8);

  testing::Gen g(55);
  Tensor image(backend->image_shape());
  for (double& v : image.values()) v = g.uniform();
  InversionOptions opts;
  opts.steps = 20;
  const auto inv = ddim_invert(*backend, image, "a bird", opts);
  CHECK(max_abs_diff(ddim_denoise(*backend, inv.noise(), "a bird", opts), inv.trajectory[0]) < 1e-6);

  // Decoder VJP is the transpose of the decoder: <D x, y> == <x, D^T y>.
  const Tensor lat = random_tensor(g, backend->latent_shape());
  const Tensor img = random_tensor(g, backend->image_shape());
  const Tensor dx = backend->decode_image(lat);
  const Tensor dty = backend->decode_vjp(lat, img);
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t i = 0; i < dx.size(); ++i) lhs += dx[i] * img[i];
  for (std::size_t i = 0; i < lat.size(); ++i) rhs += lat[i] * dty[i];
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("toy plugin reports missing capabilities") {
  auto backend = toy();
  RichPromptDocument doc{"a photo of a bird", "bird", {{"beak"}}};
  PipelineConfig config = config_profile("synthetic");
  config.num_steps = 4;
  config.t_threshold = 2;
  try {
    localize(doc, config, *backend);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kCapability);
    CHECK(std::string(e.what()).find("attention capture") != std::string::npos);
  }
  AttentionControl control;
  control.token_log_weights = {0.0, 0.7};
  CHECK(code_of([&] { backend->predict_noise(Tensor(backend->latent_shape()), backend->encode_text("x"), 10, control); }) ==
        ErrorCode::kCapability);
}

TEST_CASE("plugin loading errors") {
  CHECK(code_of([] { CallbackBackend::load_plugin("/nonexistent/plugin.so", ""); }) == ErrorCode::kConfiguration);
  CHECK(code_of([] { CallbackBackend::load_plugin("", ""); }) == ErrorCode::kConfiguration);
  try {
    toy(R"({"fail_init": true})");
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kBackend);
    CHECK(std::string(e.what()).find("toy backend refused to start") != std::string::npos);
  }
  pc_backend_callbacks cb{};
  cb.abi_version = 99;
  CHECK(code_of([&] { CallbackBackend b(cb); }) == ErrorCode::kBackend);
}

TEST_CASE("backend factory") {
  RichPromptDocument doc{"a photo of a bird", "bird", {{"beak"}, {"tail"}}};
  PipelineConfig config = config_profile("synthetic");
  config.seed = 3;
  auto a = make_backend(config, &doc);
  CHECK(a->name() == "synthetic");
  CHECK(dynamic_cast<SyntheticBackend&>(*a).scene() == scene_for_document(doc, 3));
  CHECK(code_of([&] { make_backend(config, nullptr); }) == ErrorCode::kConfiguration);

  config.backend.scene_json = scene_to_json(random_scene(8, {"wing"}, "bird"));
  auto b = make_backend(config, nullptr);
  CHECK(dynamic_cast<SyntheticBackend&>(*b).scene() == random_scene(8, {"wing"}, "bird"));

  config.backend.name = "diffusion";
  config.backend.plugin_path = PARTCRAFT_TOY_PLUGIN;
  CHECK(make_backend(config, &doc)->latent_shape() == Shape{4, 8, 8});
}

TEST_CASE("synthetic scenes") {
  const auto scene = random_scene(10, {"a", "b", "c", "d", "e"}, "bird");
  CHECK(scene.parts.size() == 5);
  Mask2D cover(32, 32);
  for (const auto& p : scene.parts) {
    const Mask2D m = scene.part_mask(p.name);
    CHECK((m & cover).count() == 0);
    CHECK((m & ~scene.object_mask()).count() == 0);
    cover = cover | m;
  }
  CHECK(cover == scene.object_mask());
  CHECK_FALSE(scene.part_mask("zzz").any());
  CHECK(scene_from_json(scene_to_json(scene)) == scene);
  CHECK_THROWS_AS(scene_from_json("{\"object_rect\": 3}"), Error);
}

TEST_CASE("synthetic backend is deterministic") {
  const auto scene = random_scene(11, {"beak", "tail"}, "bird");
  RichPromptDocument doc{"a photo of a bird", "bird", {{"beak"}, {"tail"}}};
  PipelineConfig config = config_profile("synthetic");
  SyntheticBackend a(scene), b(scene);
  LocalizationDebug da, db;
  const auto ma = localize(doc, config, a, nullptr, &da);
  const auto mb = localize(doc, config, b, nullptr, &db);
  CHECK(da.normalized == db.normalized);
  CHECK(da.segments == db.segments);
  CHECK(ma.background_mask == mb.background_mask);
  std::vector<Tensor> ta, tb;
  denoise_base(doc, config, a, nullptr, &ta);
  denoise_base(doc, config, b, nullptr, &tb);
  CHECK(ta == tb);
  CHECK(a.initial_noise(4) == b.initial_noise(4));
  CHECK_FALSE(a.initial_noise(4) == b.initial_noise(5));
}

TEST_CASE("planted cross-attention without noise is an exact indicator") {
  SyntheticScene scene = random_scene(12, {"beak", "tail"}, "bird");
  scene.attention_noise = 0.0;
  scene.floor = 0.0;
  SyntheticBackend backend(scene);
  RichPromptDocument doc{"a photo of a bird", "bird", {{"beak"}, {"tail"}}};
  const auto cond = assemble_part_conditioning(embed_parts_independently(doc, backend), backend);
  AttentionAccumulator acc(cond.tokens);
  AccumulatingSink sink(acc);
  AttentionControl control;
  control.sink = &sink;
  backend.predict_noise(backend.initial_noise(0), cond, 100, control);
  const auto bundle = acc.finish();
  const auto maps = normalize_cross_attention(bundle, part_token_indices(cond));
  for (std::size_t i = 0; i < 2; ++i) {
    const Map2D m = conditional_normalize(maps[i], true);
    const Mask2D truth = scene.part_mask(doc.parts[i].name);
    const Mask2D other = scene.part_mask(doc.parts[1 - i].name);
    for (int p = 0; p < kPositions; ++p) {
      CHECK((m.values[p] == 1.0) == truth[p]);
      if (other[p]) CHECK(m.values[p] == 0.0);
    }
  }
}
