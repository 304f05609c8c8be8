// Copyright (c) 2026 The fieldray Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace fieldray {

// 8-bit RGBA raster, row-major from the top-left pixel.
struct ImageU8 {
  int width = 0, height = 0;
  std::vector<uint8_t> rgba;  // width * height * 4

  static ImageU8 filled(int w, int h, uint8_t r, uint8_t g, uint8_t b, uint8_t a) {
    ImageU8 img;
    img.width = w;
    img.height = h;
    img.rgba.resize(static_cast<size_t>(w) * h * 4);
    for (size_t i = 0; i < img.rgba.size(); i += 4) {
      img.rgba[i] = r;
      img.rgba[i + 1] = g;
      img.rgba[i + 2] = b;
      img.rgba[i + 3] = a;
    }
    return img;
  }
};

// Float RGBA raster in [0,1], straight (unassociated) alpha.
struct ImageF {
  int width = 0, height = 0;
  std::vector<float> rgba;  // width * height * 4

  static ImageF zeros(int w, int h) {
    ImageF img;
    img.width = w;
    img.height = h;
    img.rgba.assign(static_cast<size_t>(w) * h * 4, 0.0f);
    return img;
  }

  float* pixel(int x, int y) { return &rgba[4 * (static_cast<size_t>(y) * width + x)]; }
  const float* pixel(int x, int y) const {
    return &rgba[4 * (static_cast<size_t>(y) * width + x)];
  }
};

inline uint8_t quantize8(float v) {
  float c = std::clamp(v, 0.0f, 1.0f);
  return static_cast<uint8_t>(std::lround(c * 255.0f));
}

inline ImageU8 quantize(const ImageF& img) {
  ImageU8 out;
  out.width = img.width;
  out.height = img.height;
  out.rgba.resize(img.rgba.size());
  for (size_t i = 0; i < img.rgba.size(); ++i) out.rgba[i] = quantize8(img.rgba[i]);
  return out;
}

inline ImageF dequantize(const ImageU8& img) {
  ImageF out;
  out.width = img.width;
  out.height = img.height;
  out.rgba.resize(img.rgba.size());
  for (size_t i = 0; i < img.rgba.size(); ++i)
    out.rgba[i] = static_cast<float>(img.rgba[i]) / 255.0f;
  return out;
}

// PNG I/O (8-bit RGBA, fixed encoder settings so identical pixels give
// identical files). Failures raise Error{"io"}.
void write_png(const std::string& path, const ImageU8& img);
ImageU8 read_png(const std::string& path);

}  // namespace fieldray
