// Copyright (c) 2026 The fieldray Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "fieldray/autodiff/checkpoint.hpp"
#include "fieldray/oracle/dataset.hpp"
#include "fieldray/pipeline/config.hpp"
#include "fieldray/pipeline/metrics.hpp"

namespace fieldray {

struct RenderedViews {
  std::vector<std::string> files;  // one PNG per dataset camera, in view order
};

// Renders every dataset camera from a trained checkpoint into cfg.out_dir.
// PNG alpha is the residual-transmittance coverage. The checkpoint kind must
// match cfg.method (radiance for nerf, sdf for neus).
RenderedViews render_views(const Checkpoint& ckpt, const Dataset& data, const RunConfig& cfg);

// PSNR/hf metrics of rendered frames against a truth dataset, one entry per
// view. Counts and dimensions must match.
MetricsReport evaluate_views(const std::vector<ImageU8>& rendered, const Dataset& truth,
                             const Vec3& background);

// All *.png files in a directory, sorted by filename.
std::vector<ImageU8> load_image_dir(const std::string& dir);

}  // namespace fieldray
