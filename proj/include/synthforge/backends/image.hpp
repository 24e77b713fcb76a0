/* Copyright 2026 The Synthforge Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace synthforge::backends {

// 8-bit RGB, row-major, no padding.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3) {}

  std::uint8_t* at(int x, int y) { return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3; }
  const std::uint8_t* at(int x, int y) const {
    return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }
};

struct DecodedPng {
  RgbImage image;
  std::map<std::string, std::string> text;  // tEXt chunks
};

std::vector<std::uint8_t> encode_png(const RgbImage& image,
                                     const std::map<std::string, std::string>& text = {});
// Throws InvalidRequestError when the bytes are not a decodable PNG.
DecodedPng decode_png(std::span<const std::uint8_t> bytes);

// Bilinear resampling with pixel-center alignment.
RgbImage resize_bilinear(const RgbImage& image, int width, int height);

}  // namespace synthforge::backends
