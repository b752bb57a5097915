// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

#include "core/error.hpp"

namespace partcraft {

namespace {

png_uint_32 format_for(int channels) {
  if (channels == 1) return PNG_FORMAT_GRAY;
  if (channels == 3) return PNG_FORMAT_RGB;
  throw Error(ErrorCode::kInvalidArgument, "PNG images must have 1 or 3 channels");
}

}  // namespace

std::vector<std::uint8_t> encode_png(const Image8& image) {
  if (image.width <= 0 || image.height <= 0 ||
      image.pixels.size() != static_cast<std::size_t>(image.width) * image.height * image.channels) {
    throw Error(ErrorCode::kInvalidArgument, "image buffer does not match its dimensions");
  }
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width);
  img.height = static_cast<png_uint_32>(image.height);
  img.format = format_for(image.channels);
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, image.pixels.data(), 0, nullptr)) {
    throw Error(ErrorCode::kIo, std::string("PNG encode failed: ") + img.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, image.pixels.data(), 0, nullptr)) {
    throw Error(ErrorCode::kIo, std::string("PNG encode failed: ") + img.message);
  }
  out.resize(size);
  return out;
}

Image8 decode_png(const std::vector<std::uint8_t>& bytes, int channels) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
    throw Error(ErrorCode::kIo, std::string("PNG decode failed: ") + img.message);
  }
  img.format = format_for(channels);
  Image8 out;
  out.width = static_cast<int>(img.width);
  out.height = static_cast<int>(img.height);
  out.channels = channels;
  out.pixels.resize(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, out.pixels.data(), 0, nullptr)) {
    png_image_free(&img);
    throw Error(ErrorCode::kIo, std::string("PNG decode failed: ") + img.message);
  }
  return out;
}

void write_png(const std::string& path, const Image8& image) {
  const auto bytes = encode_png(image);
  write_file_bytes(path, std::string(bytes.begin(), bytes.end()));
}

Image8 read_png(const std::string& path, int channels) {
  try {
    return decode_png(read_file_bytes(path), channels);
  } catch (...) {
    rethrow_with_context(path);
  }
}

Image8 mask_to_image(const Mask2D& mask) {
  Image8 img{mask.width(), mask.height(), 1, {}};
  img.pixels.reserve(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) img.pixels.push_back(mask[i] ? 255 : 0);
  return img;
}

Mask2D image_to_mask(const Image8& image) {
  if (image.channels != 1) throw Error(ErrorCode::kInvalidArgument, "mask image must be grayscale");
  std::vector<std::uint8_t> values(image.pixels.size());
  std::transform(image.pixels.begin(), image.pixels.end(), values.begin(),
                 [](std::uint8_t v) { return v ? 1 : 0; });
  return Mask2D(image.height, image.width, std::move(values));
}

Image8 tensor_to_image(const Tensor& tensor) {
  const Shape& s = tensor.shape();
  Image8 img{s.width, s.height, s.channels, {}};
  format_for(s.channels);
  img.pixels.resize(s.numel());
  for (int y = 0; y < s.height; ++y) {
    for (int x = 0; x < s.width; ++x) {
      for (int c = 0; c < s.channels; ++c) {
        const double v = std::clamp(tensor.at(c, y, x), 0.0, 1.0);
        img.pixels[(static_cast<std::size_t>(y) * s.width + x) * s.channels + c] =
            static_cast<std::uint8_t>(std::lround(v * 255.0));
      }
    }
  }
  return img;
}

Tensor image_to_tensor(const Image8& image) {
  Tensor t(Shape{image.channels, image.height, image.width});
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      for (int c = 0; c < image.channels; ++c) {
        t.at(c, y, x) =
            image.pixels[(static_cast<std::size_t>(y) * image.width + x) * image.channels + c] / 255.0;
      }
    }
  }
  return t;
}

Image8 map_to_image(const Map2D& map) {
  Image8 img{map.width, map.height, 1, {}};
  const double lo = map.min();
  const double range = map.max() - lo;
  img.pixels.reserve(map.size());
  for (double v : map.values) {
    const double u = range > 0 ? (v - lo) / range : 0.0;
    img.pixels.push_back(static_cast<std::uint8_t>(std::lround(u * 255.0)));
  }
  return img;
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path);
}

}  // namespace partcraft
