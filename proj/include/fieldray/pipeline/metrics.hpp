// Copyright (c) 2026 The fieldray Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fieldray/util/image.hpp"
#include "fieldray/util/vec.hpp"

namespace fieldray {

inline constexpr double kPsnrCap = 99.0;

// PSNR = 10 log10(1 / MSE) over rgb channels scaled to [0,1] from 8-bit;
// identical images report the cap. Alpha is ignored.
double psnr(const ImageU8& a, const ImageU8& b);

// Foreground-weighted variant: per-pixel squared errors weighted by
// weight_alpha's alpha channel. All-zero weights report the cap.
double psnr_foreground(const ImageU8& a, const ImageU8& b, const ImageU8& weight_alpha);

// Mean squared 4-neighbor Laplacian of luminance; the blur/noise
// quantification surface (higher = more high-frequency content).
double hf_energy(const ImageU8& img);

// Composites a straight-alpha dataset image over a background color.
ImageU8 composite_over(const ImageU8& img, const Vec3& background);

struct ViewMetric {
  int view = 0;
  double psnr_db = 0.0;
  double psnr_foreground_db = 0.0;
  double hf_energy = 0.0;
};

struct MeshErrorStats {
  bool available = false;
  int vertex_count = 0;
  double mean_abs_sdf = 0.0;
  double max_abs_sdf = 0.0;
};

// The deterministic quantitative record of a run. Wall-clock time is written
// to a separate timing file so this report is byte-identical across repeated
// runs of the same seed.
struct MetricsReport {
  std::string method;
  std::string dataset;
  std::string scene;
  uint64_t seed = 0;
  std::vector<std::pair<int, double>> loss_curve;  // (iteration, loss)
  std::vector<ViewMetric> held_out;
  MeshErrorStats mesh;

  std::string to_json() const;  // pretty-printed, stable key order
};

void write_metrics(const MetricsReport& report, const std::string& path);
void write_timing(double wall_seconds, const std::string& path);

}  // namespace fieldray
