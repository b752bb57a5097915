// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <random>
#include <vector>

#include "core/config.hpp"
#include "core/tensor.hpp"

namespace partcraft {

// Scaled-linear beta schedule, cumulative products indexed by training timestep.
std::vector<double> alphas_cumprod(const NoiseSchedule& schedule);

// Deterministic DDIM sampler. Steps are indexed by the number of updates still
// to run: step(s) maps x_s to x_{s-1}, s = num_steps .. 1, and x_0 is clean.
class DdimScheduler {
 public:
  DdimScheduler(const NoiseSchedule& schedule, int num_steps, double eta = 0.0);

  int num_steps() const { return num_steps_; }
  double eta() const { return eta_; }
  bool deterministic() const { return eta_ == 0.0; }

  // Training timestep the denoiser sees when x_s is the input, s >= 1.
  int train_timestep(int s) const;
  // Signal level of x_s; alpha_bar(0) == 1.
  double alpha_bar(int s) const;

  Tensor predict_x0(const Tensor& x_s, const Tensor& eps, int s) const;
  Tensor step(const Tensor& x_s, const Tensor& eps, int s, std::mt19937_64* rng = nullptr) const;
  // Exact inverse of the deterministic step for the same eps.
  Tensor invert_step(const Tensor& x_prev, const Tensor& eps, int s) const;

 private:
  void check_step(int s) const;

  std::vector<double> cumprod_;
  std::vector<int> timesteps_;  // timesteps_[s - 1] for s = 1..N
  int num_steps_;
  double eta_;
};

}  // namespace partcraft
