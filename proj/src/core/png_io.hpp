// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/tensor.hpp"

namespace partcraft {

// 8-bit interleaved pixels, 1 (gray) or 3 (RGB) channels.
struct Image8 {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> pixels;
};

std::vector<std::uint8_t> encode_png(const Image8& image);
Image8 decode_png(const std::vector<std::uint8_t>& bytes, int channels);

void write_png(const std::string& path, const Image8& image);
Image8 read_png(const std::string& path, int channels);

// Masks persist as single-channel 0/255 PNGs; any nonzero pixel reads back as 1.
Image8 mask_to_image(const Mask2D& mask);
Mask2D image_to_mask(const Image8& image);

// CHW tensor in [0,1] (1 or 3 channels) to 8-bit, clamping and rounding.
Image8 tensor_to_image(const Tensor& tensor);
Tensor image_to_tensor(const Image8& image);
// Grayscale rendering of a map rescaled by its own min/max.
Image8 map_to_image(const Map2D& map);

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const std::string& bytes);

}  // namespace partcraft
