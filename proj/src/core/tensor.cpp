// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"

namespace partcraft {

std::string to_string(const Shape& shape) {
  return std::to_string(shape.channels) + "x" + std::to_string(shape.height) +
         "x" + std::to_string(shape.width);
}

Tensor::Tensor(Shape shape, double fill) : shape_(shape), data_(shape.numel(), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(shape), data_(std::move(values)) {
  if (data_.size() != shape_.numel()) {
    throw Error(ErrorCode::kInvalidArgument,
                "tensor data size " + std::to_string(data_.size()) +
                    " does not match shape " + to_string(shape_));
  }
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (!(a.shape() == b.shape())) {
    throw Error(ErrorCode::kInvalidArgument, "shape mismatch: " + to_string(a.shape()) +
                                                 " vs " + to_string(b.shape()));
  }
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double Map2D::max() const { return *std::max_element(values.begin(), values.end()); }
double Map2D::min() const { return *std::min_element(values.begin(), values.end()); }

Mask2D::Mask2D(int height, int width, bool fill)
    : height_(height), width_(width),
      values_(static_cast<std::size_t>(height) * width, fill ? 1 : 0) {}

Mask2D::Mask2D(int height, int width, std::vector<std::uint8_t> values)
    : height_(height), width_(width), values_(std::move(values)) {
  if (values_.size() != static_cast<std::size_t>(height) * width) {
    throw Error(ErrorCode::kInvalidArgument, "mask data does not match its declared shape");
  }
  for (auto& v : values_) {
    if (v > 1) throw Error(ErrorCode::kInvalidArgument, "mask values must be 0 or 1");
  }
}

std::size_t Mask2D::count() const {
  return static_cast<std::size_t>(std::count(values_.begin(), values_.end(), 1));
}

namespace {
void require_same_shape(const Mask2D& a, const Mask2D& b) {
  if (!a.same_shape(b)) {
    throw Error(ErrorCode::kInvalidArgument, "mask shape mismatch");
  }
}
}  // namespace

Mask2D Mask2D::operator|(const Mask2D& other) const {
  require_same_shape(*this, other);
  Mask2D out(height_, width_);
  for (std::size_t i = 0; i < values_.size(); ++i) out.values_[i] = values_[i] | other.values_[i];
  return out;
}

Mask2D Mask2D::operator&(const Mask2D& other) const {
  require_same_shape(*this, other);
  Mask2D out(height_, width_);
  for (std::size_t i = 0; i < values_.size(); ++i) out.values_[i] = values_[i] & other.values_[i];
  return out;
}

Mask2D Mask2D::operator~() const {
  Mask2D out(height_, width_);
  for (std::size_t i = 0; i < values_.size(); ++i) out.values_[i] = values_[i] ? 0 : 1;
  return out;
}

Mask2D Mask2D::resized(int height, int width) const {
  if (height == height_ && width == width_) return *this;
  Mask2D out(height, width);
  for (int y = 0; y < height; ++y) {
    const int sy = static_cast<int>(static_cast<long long>(y) * height_ / height);
    for (int x = 0; x < width; ++x) {
      const int sx = static_cast<int>(static_cast<long long>(x) * width_ / width);
      out.set(y, x, get(sy, sx));
    }
  }
  return out;
}

double iou(const Mask2D& a, const Mask2D& b) {
  const auto inter = (a & b).count();
  const auto uni = (a | b).count();
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace partcraft
