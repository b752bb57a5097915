// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#include "localization/spectral.hpp"

#include <Eigen/Dense>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "core/error.hpp"

namespace partcraft {

int SegmentMap::label_count() const {
  int m = 0;
  for (int l : labels) m = std::max(m, l + 1);
  return m;
}

Mask2D SegmentMap::segment(int label) const {
  Mask2D m(height, width);
  for (std::size_t i = 0; i < labels.size(); ++i) m.set(i, labels[i] == label);
  return m;
}

std::vector<int> canonical_labels(const std::vector<int>& labels) {
  std::map<int, int> remap;
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto it = remap.emplace(labels[i], static_cast<int>(remap.size())).first;
    out[i] = it->second;
  }
  return out;
}

namespace {

double sq_dist(const double* a, const double* b, int dim) {
  double d = 0.0;
  for (int i = 0; i < dim; ++i) {
    const double t = a[i] - b[i];
    d += t * t;
  }
  return d;
}

struct KMeansRun {
  std::vector<int> labels;
  double inertia = 0.0;
};

KMeansRun kmeans_once(const std::vector<double>& pts, int n, int dim, int k, std::mt19937_64& rng) {
  std::vector<double> centers(static_cast<std::size_t>(k) * dim);
  std::uniform_int_distribution<int> first(0, n - 1);
  int pick = first(rng);
  std::copy_n(pts.begin() + static_cast<std::size_t>(pick) * dim, dim, centers.begin());
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], sq_dist(&pts[static_cast<std::size_t>(i) * dim], &centers[static_cast<std::size_t>(c - 1) * dim], dim));
      total += d2[i];
    }
    if (total <= 0.0) {
      pick = first(rng);
    } else {
      double r = unit(rng) * total;
      pick = n - 1;
      for (int i = 0; i < n; ++i) {
        r -= d2[i];
        if (r < 0.0) {
          pick = i;
          break;
        }
      }
    }
    std::copy_n(pts.begin() + static_cast<std::size_t>(pick) * dim, dim, centers.begin() + static_cast<std::size_t>(c) * dim);
  }

  KMeansRun run;
  run.labels.assign(n, -1);
  constexpr int kMaxIterations = 300;
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = sq_dist(&pts[static_cast<std::size_t>(i) * dim], &centers[static_cast<std::size_t>(c) * dim], dim);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (run.labels[i] != best) {
        run.labels[i] = best;
        changed = true;
      }
    }
    if (!changed) break;
    std::vector<double> sums(centers.size(), 0.0);
    std::vector<int> counts(k, 0);
    for (int i = 0; i < n; ++i) {
      ++counts[run.labels[i]];
      for (int d = 0; d < dim; ++d) sums[static_cast<std::size_t>(run.labels[i]) * dim + d] += pts[static_cast<std::size_t>(i) * dim + d];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (int d = 0; d < dim; ++d) centers[static_cast<std::size_t>(c) * dim + d] = sums[static_cast<std::size_t>(c) * dim + d] / counts[c];
    }
  }
  for (int i = 0; i < n; ++i) {
    run.inertia += sq_dist(&pts[static_cast<std::size_t>(i) * dim], &centers[static_cast<std::size_t>(run.labels[i]) * dim], dim);
  }
  return run;
}

}  // namespace

std::vector<int> kmeans(const std::vector<double>& points, int n, int dim, int k, std::uint64_t seed, int restarts) {
  if (k < 1 || k > n) throw Error(ErrorCode::kInvalidArgument, "k-means needs 1 <= k <= n");
  if (points.size() != static_cast<std::size_t>(n) * dim) throw Error(ErrorCode::kInvalidArgument, "point buffer size mismatch");
  std::mt19937_64 rng(seed);
  KMeansRun best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(1, restarts); ++r) {
    KMeansRun run = kmeans_once(points, n, dim, k, rng);
    if (run.inertia < best.inertia) best = std::move(run);
  }
  return best.labels;
}

std::vector<double> spectral_embedding(const std::vector<double>& affinity, int n, int k) {
  std::vector<double> inv_sqrt_deg(n);
  for (int i = 0; i < n; ++i) {
    double d = 0.0;
    for (int j = 0; j < n; ++j) d += affinity[static_cast<std::size_t>(i) * n + j];
    inv_sqrt_deg[i] = d > 0.0 ? 1.0 / std::sqrt(d) : 0.0;
  }
  Eigen::MatrixXd lap(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double v = inv_sqrt_deg[i] * affinity[static_cast<std::size_t>(i) * n + j] * inv_sqrt_deg[j];
      lap(i, j) = (i == j ? 1.0 : 0.0) - v;
    }
  }
  // Householder reduction to tridiagonal form, the k smallest eigenpairs of
  // the tridiagonal matrix, then the back-transform of those k vectors.
  const Eigen::Tridiagonalization<Eigen::MatrixXd> tri(lap);
  const Eigen::VectorXd main_diag = tri.diagonal();
  std::vector<double> diag(main_diag.data(), main_diag.data() + n);
  std::vector<double> off(n, 0.0);
  const Eigen::VectorXd sub = tri.subDiagonal();
  for (int i = 0; i + 1 < n; ++i) off[i] = sub[i];
  std::vector<double> w(n);
  Eigen::MatrixXd tz(n, k);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(k));
  lapack_int found = 0;
  lapack_logical tryrac = 1;
  const lapack_int info = LAPACKE_dstemr(LAPACK_COL_MAJOR, 'V', 'I', n, diag.data(), off.data(), 0.0, 0.0, 1, k,
                                         &found, w.data(), tz.data(), n, k, support.data(), &tryrac);
  if (info != 0 || found != k) {
    throw Error(ErrorCode::kInternal, "eigendecomposition failed (info=" + std::to_string(info) + ")");
  }
  const Eigen::MatrixXd vectors = tri.matrixQ() * tz;
  std::vector<double> z(static_cast<std::size_t>(n) * k);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < k; ++c) z[static_cast<std::size_t>(i) * k + c] = vectors(i, c);
  }
  for (int i = 0; i < n; ++i) {
    double* row = &z[static_cast<std::size_t>(i) * k];
    double norm = 0.0;
    for (int c = 0; c < k; ++c) norm += row[c] * row[c];
    norm = std::sqrt(norm);
    if (norm > 0.0) {
      for (int c = 0; c < k; ++c) row[c] /= norm;
    }
  }
  return z;
}

SegmentMap cluster_attention(const std::vector<double>& affinity, int k, std::uint64_t seed, int restarts, int height,
                             int width) {
  const int n = height * width;
  if (k < 2) throw Error(ErrorCode::kInvalidArgument, "cluster count must be >= 2");
  if (k > n) throw Error(ErrorCode::kInvalidArgument, "cluster count exceeds the number of positions");
  if (affinity.size() != static_cast<std::size_t>(n) * n) {
    throw Error(ErrorCode::kInvalidArgument, "affinity must be square over the grid positions");
  }
  std::vector<double> sym(affinity.size());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double a = affinity[static_cast<std::size_t>(i) * n + j];
      const double b = affinity[static_cast<std::size_t>(j) * n + i];
      if (!std::isfinite(a)) throw Error(ErrorCode::kInvalidArgument, "affinity has non-finite entries");
      if (a < 0.0) throw Error(ErrorCode::kInvalidArgument, "affinity has negative entries");
      sym[static_cast<std::size_t>(i) * n + j] = 0.5 * (a + b);
    }
  }
  const auto embedding = spectral_embedding(sym, n, k);
  SegmentMap out;
  out.height = height;
  out.width = width;
  out.k = k;
  out.labels = canonical_labels(kmeans(embedding, n, k, k, seed, restarts));
  return out;
}

}  // namespace partcraft
