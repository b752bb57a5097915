// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace partcraft {

// Canonical attention / mask resolution.
inline constexpr int kMaskSize = 32;

struct Shape {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::size_t numel() const {
    return static_cast<std::size_t>(channels) * height * width;
  }
  bool operator==(const Shape&) const = default;
};

std::string to_string(const Shape& shape);

// Dense CHW tensor of doubles. Used for latents, noise predictions and images.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  double& at(int c, int y, int x) {
    return data_[(static_cast<std::size_t>(c) * shape_.height + y) * shape_.width + x];
  }
  double at(int c, int y, int x) const {
    return data_[(static_cast<std::size_t>(c) * shape_.height + y) * shape_.width + x];
  }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  bool all_finite() const;
  bool operator==(const Tensor&) const = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

double max_abs_diff(const Tensor& a, const Tensor& b);

// A real-valued single-channel grid (attention maps, normalized scores).
struct Map2D {
  int height = 0;
  int width = 0;
  std::vector<double> values;

  Map2D() = default;
  Map2D(int h, int w, double fill = 0.0)
      : height(h), width(w), values(static_cast<std::size_t>(h) * w, fill) {}

  std::size_t size() const { return values.size(); }
  double& at(int y, int x) { return values[static_cast<std::size_t>(y) * width + x]; }
  double at(int y, int x) const { return values[static_cast<std::size_t>(y) * width + x]; }
  double max() const;
  double min() const;
  bool operator==(const Map2D&) const = default;
};

// Binary grid with values in {0,1}.
class Mask2D {
 public:
  Mask2D() = default;
  Mask2D(int height, int width, bool fill = false);
  Mask2D(int height, int width, std::vector<std::uint8_t> values);

  static Mask2D full(int height = kMaskSize, int width = kMaskSize) {
    return Mask2D(height, width, true);
  }
  static Mask2D empty(int height = kMaskSize, int width = kMaskSize) {
    return Mask2D(height, width, false);
  }

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return values_.size(); }
  const std::vector<std::uint8_t>& values() const { return values_; }

  bool get(int y, int x) const { return values_[static_cast<std::size_t>(y) * width_ + x] != 0; }
  void set(int y, int x, bool v) { values_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0; }
  bool operator[](std::size_t i) const { return values_[i] != 0; }
  void set(std::size_t i, bool v) { values_[i] = v ? 1 : 0; }

  std::size_t count() const;
  bool any() const { return count() > 0; }
  bool same_shape(const Mask2D& other) const {
    return height_ == other.height_ && width_ == other.width_;
  }

  Mask2D operator|(const Mask2D& other) const;
  Mask2D operator&(const Mask2D& other) const;
  Mask2D operator~() const;
  bool operator==(const Mask2D&) const = default;

  // Nearest-neighbor resize (source pixel = floor(dst * src / dst_size)).
  Mask2D resized(int height, int width) const;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> values_;
};

double iou(const Mask2D& a, const Mask2D& b);

// A noisy latent together with the number of denoising steps still to run.
struct LatentImage {
  Tensor values;
  int timestep = 0;
};

}  // namespace partcraft
