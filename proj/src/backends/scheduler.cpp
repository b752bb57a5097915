// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#include "backends/scheduler.hpp"

#include <cmath>

#include "core/error.hpp"

namespace partcraft {

std::vector<double> alphas_cumprod(const NoiseSchedule& schedule) {
  if (schedule.train_steps < 2) {
    throw Error(ErrorCode::kConfiguration, "noise schedule needs at least 2 training steps");
  }
  std::vector<double> out(schedule.train_steps);
  const double lo = std::sqrt(schedule.beta_start);
  const double hi = std::sqrt(schedule.beta_end);
  double prod = 1.0;
  for (int i = 0; i < schedule.train_steps; ++i) {
    const double r = lo + (hi - lo) * i / (schedule.train_steps - 1);
    prod *= 1.0 - r * r;
    out[i] = prod;
  }
  return out;
}

DdimScheduler::DdimScheduler(const NoiseSchedule& schedule, int num_steps, double eta)
    : cumprod_(alphas_cumprod(schedule)), num_steps_(num_steps), eta_(eta) {
  if (num_steps < 0 || num_steps > schedule.train_steps) {
    throw Error(ErrorCode::kConfiguration, "num_steps must lie in [0, train_steps]");
  }
  if (!(eta >= 0.0)) throw Error(ErrorCode::kConfiguration, "eta must be >= 0");
  if (num_steps == 0) return;
  const int ratio = schedule.train_steps / num_steps;
  for (int i = 0; i < num_steps; ++i) {
    timesteps_.push_back(std::min(i * ratio + 1, schedule.train_steps - 1));
  }
}

void DdimScheduler::check_step(int s) const {
  if (s < 1 || s > num_steps_) {
    throw Error(ErrorCode::kInvalidArgument, "step " + std::to_string(s) + " outside [1, " +
                                                 std::to_string(num_steps_) + "]");
  }
}

int DdimScheduler::train_timestep(int s) const {
  check_step(s);
  return timesteps_[s - 1];
}

double DdimScheduler::alpha_bar(int s) const {
  if (s == 0) return 1.0;
  return cumprod_[train_timestep(s)];
}

Tensor DdimScheduler::predict_x0(const Tensor& x, const Tensor& eps, int s) const {
  const double a = alpha_bar(s);
  const double sa = std::sqrt(a);
  const double sb = std::sqrt(1.0 - a);
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - sb * eps[i]) / sa;
  return out;
}

Tensor DdimScheduler::step(const Tensor& x, const Tensor& eps, int s, std::mt19937_64* rng) const {
  if (x.shape() != eps.shape()) throw Error(ErrorCode::kInvalidArgument, "latent/noise shape mismatch");
  const double a = alpha_bar(s);
  const double a_prev = alpha_bar(s - 1);
  const double sigma =
      eta_ * std::sqrt((1.0 - a_prev) / (1.0 - a)) * std::sqrt(1.0 - a / a_prev);
  if (sigma > 0.0 && rng == nullptr) {
    throw Error(ErrorCode::kInvalidArgument, "stochastic step requires a random generator");
  }
  const double sa = std::sqrt(a);
  const double sb = std::sqrt(1.0 - a);
  const double sa_prev = std::sqrt(a_prev);
  const double dir = std::sqrt(std::max(0.0, 1.0 - a_prev - sigma * sigma));
  Tensor out(x.shape());
  std::normal_distribution<double> normal;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double x0 = (x[i] - sb * eps[i]) / sa;
    out[i] = sa_prev * x0 + dir * eps[i];
    if (sigma > 0.0) out[i] += sigma * normal(*rng);
  }
  return out;
}

Tensor DdimScheduler::invert_step(const Tensor& x_prev, const Tensor& eps, int s) const {
  if (x_prev.shape() != eps.shape()) throw Error(ErrorCode::kInvalidArgument, "latent/noise shape mismatch");
  if (!deterministic()) {
    throw Error(ErrorCode::kConfiguration, "inversion requires a deterministic scheduler (eta = 0)");
  }
  const double a = alpha_bar(s);
  const double a_prev = alpha_bar(s - 1);
  const double sa = std::sqrt(a);
  const double sb = std::sqrt(1.0 - a);
  const double sa_prev = std::sqrt(a_prev);
  const double sb_prev = std::sqrt(1.0 - a_prev);
  Tensor out(x_prev.shape());
  for (std::size_t i = 0; i < x_prev.size(); ++i) {
    const double x0 = (x_prev[i] - sb_prev * eps[i]) / sa_prev;
    out[i] = sa * x0 + sb * eps[i];
  }
  return out;
}

}  // namespace partcraft
