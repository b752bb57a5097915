// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "core/error.hpp"
#include "attention/attention.hpp"
#include "localization/spectral.hpp"
#include "support.hpp"

using namespace partcraft;

namespace {

struct Planted {
  std::vector<int> truth;
  std::vector<double> affinity;
};

// k shuffled blocks of random sizes, in-block weight 1 plus small noise,
// cross-block weight small.
Planted planted_blocks(testing::Gen& g, int n, int k) {
  std::vector<int> sizes(k, 2);
  for (int i = 2 * k; i < n; ++i) sizes[g.integer(0, k - 1)]++;
  Planted p;
  for (int b = 0; b < k; ++b) p.truth.insert(p.truth.end(), sizes[b], b);
  std::shuffle(p.truth.begin(), p.truth.end(), g.engine());
  p.affinity.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double base = p.truth[i] == p.truth[j] ? 1.0 : 0.02;
      p.affinity[static_cast<std::size_t>(i) * n + j] = base + 0.01 * g.uniform();
    }
  }
  return p;
}

// Same partition iff a bijection maps one labeling onto the other.
bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  std::map<int, int> ab, ba;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto [x, ix] = ab.emplace(a[i], b[i]);
    auto [y, iy] = ba.emplace(b[i], a[i]);
    if (x->second != b[i] || y->second != a[i]) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("planted blocks are recovered exactly") {
  testing::Gen g(21);
  for (int k = 2; k <= 6; ++k) {
    for (int seed = 0; seed < 5; ++seed) {
      const int n = g.integer(40, 120);
      const auto p = planted_blocks(g, n, k);
      const SegmentMap seg = cluster_attention(p.affinity, k, seed, 10, 1, n);
      CHECK(seg.k == k);
      CHECK(seg.label_count() == k);
      CHECK(same_partition(seg.labels, p.truth));
    }
  }
}

TEST_CASE("full 32x32 grid with rectangular blocks") {
  testing::Gen g(22);
  const int n = kPositions;
  std::vector<int> truth(n);
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 32; ++x) truth[y * 32 + x] = (y < 12 ? 0 : 1) + (x < 20 ? 0 : 2);
  }
  std::vector<double> aff(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) aff[static_cast<std::size_t>(i) * n + j] = (truth[i] == truth[j] ? 1.0 : 0.05) + 0.01 * g.uniform();
  }
  const auto seg = cluster_attention(aff, 4, 3);
  CHECK(same_partition(seg.labels, truth));
  CHECK(seg.segment(0).count() == 12 * 20);
}

TEST_CASE("clustering is deterministic") {
  testing::Gen g(23);
  const auto p = planted_blocks(g, 90, 4);
  // Noisier affinity so that the answer depends on the seeding.
  auto aff = p.affinity;
  for (double& v : aff) v += 0.5 * g.uniform();
  const auto a = cluster_attention(aff, 4, 17, 10, 1, 90);
  const auto b = cluster_attention(aff, 4, 17, 10, 1, 90);
  CHECK(a == b);
}

TEST_CASE("labels are canonical by first occurrence") {
  CHECK(canonical_labels({3, 3, 1, 0, 1, 2}) == std::vector<int>{0, 0, 1, 2, 1, 3});
  testing::Gen g(24);
  const auto p = planted_blocks(g, 60, 3);
  const auto seg = cluster_attention(p.affinity, 3, 0, 10, 1, 60);
  CHECK(seg.labels == canonical_labels(seg.labels));
  CHECK(seg.labels[0] == 0);
}

TEST_CASE("spectral embedding rows have unit length") {
  testing::Gen g(25);
  const auto p = planted_blocks(g, 50, 3);
  auto sym = p.affinity;
  for (int i = 0; i < 50; ++i) {
    for (int j = 0; j < 50; ++j) sym[i * 50 + j] = 0.5 * (p.affinity[i * 50 + j] + p.affinity[j * 50 + i]);
  }
  const auto emb = spectral_embedding(sym, 50, 3);
  REQUIRE(emb.size() == 150);
  for (int i = 0; i < 50; ++i) {
    const double norm = std::hypot(emb[i * 3], emb[i * 3 + 1], emb[i * 3 + 2]);
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("kmeans on separated points") {
  std::vector<double> pts;
  for (int i = 0; i < 10; ++i) {
    pts.push_back(0.01 * i);
    pts.push_back(0.0);
  }
  for (int i = 0; i < 10; ++i) {
    pts.push_back(5.0 + 0.01 * i);
    pts.push_back(5.0);
  }
  const auto labels = kmeans(pts, 20, 2, 2, 1);
  for (int i = 1; i < 10; ++i) CHECK(labels[i] == labels[0]);
  for (int i = 11; i < 20; ++i) CHECK(labels[i] == labels[10]);
  CHECK(labels[0] != labels[10]);
}

TEST_CASE("clustering preconditions") {
  testing::Gen g(26);
  const auto p = planted_blocks(g, 20, 2);
  CHECK_THROWS_AS(cluster_attention(p.affinity, 1, 0, 10, 1, 20), Error);
  CHECK_THROWS_AS(cluster_attention(p.affinity, 21, 0, 10, 1, 20), Error);
  CHECK_THROWS_AS(cluster_attention(p.affinity, 2, 0, 10, 4, 4), Error);
  auto bad = p.affinity;
  bad[7] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(cluster_attention(bad, 2, 0, 10, 1, 20), Error);
}
