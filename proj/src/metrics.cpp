// Copyright (c) 2026 The fieldray Authors.
// SPDX-License-Identifier: Apache-2.0
#include "fieldray/pipeline/metrics.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "fieldray/util/error.hpp"

namespace fieldray {

using nlohmann::json;

namespace {

void check_same_size(const ImageU8& a, const ImageU8& b) {
  if (a.width != b.width || a.height != b.height)
    fail("config", "image size mismatch: " + std::to_string(a.width) + "x" +
                       std::to_string(a.height) + " vs " + std::to_string(b.width) + "x" +
                       std::to_string(b.height));
}

double mse_to_psnr(double mse) {
  if (mse <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

}  // namespace

double psnr(const ImageU8& a, const ImageU8& b) {
  check_same_size(a, b);
  double acc = 0.0;
  size_t pixels = a.rgba.size() / 4;
  for (size_t i = 0; i < pixels; ++i)
    for (int c = 0; c < 3; ++c) {
      double d = (a.rgba[4 * i + c] - b.rgba[4 * i + c]) / 255.0;
      acc += d * d;
    }
  return mse_to_psnr(acc / (3.0 * static_cast<double>(pixels)));
}

double psnr_foreground(const ImageU8& a, const ImageU8& b, const ImageU8& weight_alpha) {
  check_same_size(a, b);
  check_same_size(a, weight_alpha);
  double acc = 0.0, wsum = 0.0;
  size_t pixels = a.rgba.size() / 4;
  for (size_t i = 0; i < pixels; ++i) {
    double w = weight_alpha.rgba[4 * i + 3] / 255.0;
    wsum += w;
    for (int c = 0; c < 3; ++c) {
      double d = (a.rgba[4 * i + c] - b.rgba[4 * i + c]) / 255.0;
      acc += w * d * d;
    }
  }
  if (wsum <= 0.0) return kPsnrCap;
  return mse_to_psnr(acc / (3.0 * wsum));
}

double hf_energy(const ImageU8& img) {
  if (img.width < 3 || img.height < 3) return 0.0;
  auto lum = [&](int x, int y) {
    const uint8_t* p = &img.rgba[4 * (static_cast<size_t>(y) * img.width + x)];
    return (0.2126 * p[0] + 0.7152 * p[1] + 0.0722 * p[2]) / 255.0;
  };
  double acc = 0.0;
  for (int y = 1; y + 1 < img.height; ++y)
    for (int x = 1; x + 1 < img.width; ++x) {
      double lap =
          4.0 * lum(x, y) - lum(x - 1, y) - lum(x + 1, y) - lum(x, y - 1) - lum(x, y + 1);
      acc += lap * lap;
    }
  return acc / (static_cast<double>(img.width - 2) * (img.height - 2));
}

ImageU8 composite_over(const ImageU8& img, const Vec3& background) {
  ImageU8 out = img;
  size_t pixels = img.rgba.size() / 4;
  const double bg[3] = {background.x, background.y, background.z};
  for (size_t i = 0; i < pixels; ++i) {
    double a = img.rgba[4 * i + 3] / 255.0;
    for (int c = 0; c < 3; ++c) {
      double v = a * (img.rgba[4 * i + c] / 255.0) + (1.0 - a) * bg[c];
      out.rgba[4 * i + c] = quantize8(static_cast<float>(v));
    }
    out.rgba[4 * i + 3] = 255;
  }
  return out;
}

std::string MetricsReport::to_json() const {
  json j;
  j["method"] = method;
  j["dataset"] = dataset;
  j["scene"] = scene;
  j["seed"] = seed;
  json curve = json::array();
  for (const auto& [iter, loss] : loss_curve) curve.push_back({{"iteration", iter}, {"loss", loss}});
  j["loss_curve"] = curve;
  json views = json::array();
  for (const ViewMetric& v : held_out)
    views.push_back({{"view", v.view},
                     {"psnr_db", v.psnr_db},
                     {"psnr_foreground_db", v.psnr_foreground_db},
                     {"hf_energy", v.hf_energy}});
  j["held_out"] = views;
  if (mesh.available)
    j["mesh"] = {{"vertex_count", mesh.vertex_count},
                 {"mean_abs_sdf", mesh.mean_abs_sdf},
                 {"max_abs_sdf", mesh.max_abs_sdf}};
  else
    j["mesh"] = nullptr;
  return j.dump(2) + "\n";
}

void write_metrics(const MetricsReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail("io", "cannot open " + path + " for writing");
  out << report.to_json();
  if (!out.good()) fail("io", "write failed for " + path);
}

void write_timing(double wall_seconds, const std::string& path) {
  json j = {{"wall_seconds", wall_seconds}};
  std::ofstream out(path);
  if (!out) fail("io", "cannot open " + path + " for writing");
  out << j.dump(2) << "\n";
  if (!out.good()) fail("io", "write failed for " + path);
}

}  // namespace fieldray
