// Copyright (c) 2026 The fieldray Authors.
// SPDX-License-Identifier: Apache-2.0
#include "fieldray/pipeline/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fieldray/autodiff/adam.hpp"
#include "fieldray/fields/analytic.hpp"
#include "fieldray/fields/radiance_field.hpp"
#include "fieldray/fields/sdf_field.hpp"
#include "fieldray/mesh/marching_cubes.hpp"
#include "fieldray/nerf/renderer.hpp"
#include "fieldray/neus/renderer.hpp"
#include "fieldray/util/error.hpp"

namespace fieldray {

namespace {

constexpr int kCheckpointEvery = 500;
constexpr int kMeshStatsResolution = 128;

std::string run_meta_json(const RunConfig& cfg, const Dataset& data) {
  nlohmann::json j;
  j["method"] = cfg.method;
  j["scene"] = data.scene_name;
  j["seed"] = cfg.seed;
  j["background"] = {cfg.background.x, cfg.background.y, cfg.background.z};
  j["samples_coarse"] = cfg.samples_coarse;
  j["samples_fine"] = cfg.samples_fine;
  j["samples_neus"] = cfg.samples_neus;
  j["eikonal_weight"] = cfg.eikonal_weight;
  return j.dump();
}

// Supervision color for one view: stored foreground composited over the
// configured training background, in [0,1] floats.
std::vector<float> composited_targets(const ImageU8& img, const Vec3& background) {
  size_t n = static_cast<size_t>(img.width) * img.height;
  std::vector<float> out(n * 3);
  for (size_t i = 0; i < n; ++i) {
    double a = img.rgba[4 * i + 3] / 255.0;
    for (int c = 0; c < 3; ++c) {
      double fg = img.rgba[4 * i + c] / 255.0;
      out[3 * i + c] = static_cast<float>(a * fg + (1.0 - a) * background[c]);
    }
  }
  return out;
}

ImageU8 opaque(ImageU8 img) {
  for (size_t i = 3; i < img.rgba.size(); i += 4) img.rgba[i] = 255;
  return img;
}

}  // namespace

std::vector<int> held_out_views(int view_count) {
  std::vector<int> held;
  for (int v : {0, 8})
    if (v < view_count && static_cast<int>(held.size()) + 1 < view_count) held.push_back(v);
  return held;
}

ViewMetric view_metric(int view, const ImageU8& rendered, const ImageU8& truth,
                       const Vec3& background) {
  ImageU8 composited = composite_over(truth, background);
  ViewMetric m;
  m.view = view;
  m.psnr_db = psnr(rendered, composited);
  m.psnr_foreground_db = psnr_foreground(rendered, composited, truth);
  m.hf_energy = fieldray::hf_energy(rendered);
  return m;
}

MeshErrorStats mesh_error_stats(const Checkpoint& ckpt, const std::string& scene_name,
                                int resolution) {
  MeshErrorStats out;
  if (ckpt.kind != "sdf" || ckpt.params.items().empty()) return out;
  AnalyticField reference;
  try {
    reference = make_analytic_scene(scene_name);
  } catch (const Error&) {
    return out;  // external dataset; no analytic surface to compare against
  }
  if (reference.kind != AnalyticField::Kind::kSdf) return out;

  const std::string& first = ckpt.params.items().begin()->first;
  std::string prefix = first.substr(0, first.find('/'));
  ScalarGrid grid =
      sample_sdf_grid(ckpt.params, prefix, Vec3{-1, -1, -1}, Vec3{1, 1, 1}, resolution);
  TriangleMesh mesh = marching_cubes(grid, 0.0);
  if (mesh.vertices.empty()) return out;

  out.available = true;
  out.vertex_count = static_cast<int>(mesh.vertices.size());
  double sum = 0.0, worst = 0.0;
  for (const Vec3& v : mesh.vertices) {
    double d = std::abs(reference.value(v));
    sum += d;
    worst = std::max(worst, d);
  }
  out.mean_abs_sdf = sum / static_cast<double>(mesh.vertices.size());
  out.max_abs_sdf = worst;
  return out;
}

TrainResult train(const RunConfig& cfg) {
  auto t0 = std::chrono::steady_clock::now();
  validate_run_config(cfg);
  Dataset data = load_dataset(cfg.dataset);
  const bool is_nerf = cfg.method == "nerf";

  std::vector<int> held = held_out_views(data.view_count());
  std::vector<int> train_views;
  for (int v = 0; v < data.view_count(); ++v)
    if (std::find(held.begin(), held.end(), v) == held.end()) train_views.push_back(v);

  size_t pixel_count = static_cast<size_t>(data.width) * data.height;
  std::vector<std::vector<float>> targets(data.view_count());
  for (int v : train_views) targets[v] = composited_targets(data.images[v], cfg.background);

  ParameterSet<float> params;
  Stream init = Stream(cfg.seed).fork("init");
  if (is_nerf) {
    radiance_init(params, "coarse", init.fork("coarse"));
    radiance_init(params, "fine", init.fork("fine"));
  } else {
    sdf_init(params, "sdf", init.fork("sdf"));
  }
  Adam<float> opt(Adam<float>::Options{.lr = cfg.learning_rate});

  NerfConfig nerf_cfg{cfg.samples_coarse, cfg.samples_fine, cfg.background};
  NeusConfig neus_cfg{cfg.samples_neus, cfg.eikonal_weight, cfg.background};

  std::filesystem::create_directories(cfg.out_dir);
  std::string ckpt_file = checkpoint_path(cfg);
  Checkpoint ckpt;
  ckpt.kind = is_nerf ? "radiance" : "sdf";
  ckpt.meta_json = run_meta_json(cfg, data);
  ckpt.params = params;
  save_checkpoint(ckpt_file, ckpt);  // divergence always has a state to fall back to

  MetricsReport report;
  report.method = cfg.method;
  report.dataset = cfg.dataset;
  report.scene = data.scene_name;
  report.seed = cfg.seed;

  Stream base(cfg.seed);
  const int batch = cfg.rays_per_batch;
  std::vector<Ray> rays;
  std::vector<Stream> streams;
  std::vector<float> truth(static_cast<size_t>(batch) * 3);
  for (int iter = 0; iter < cfg.iterations; ++iter) {
    Stream it = base.fork("iter").fork(static_cast<uint64_t>(iter));
    rays.clear();
    streams.clear();
    for (int slot = 0; slot < batch; ++slot) {
      Stream pick = it.fork("pick").fork(static_cast<uint64_t>(slot));
      int view = train_views[pick.next_below(train_views.size())];
      uint64_t pix = pick.next_below(pixel_count);
      rays.push_back(generate_ray(data.cameras[view], static_cast<int>(pix % data.width),
                                  static_cast<int>(pix / data.width)));
      for (int c = 0; c < 3; ++c) truth[3 * slot + c] = targets[view][3 * pix + c];
      streams.push_back(it.fork("ray").fork(static_cast<uint64_t>(slot)));
    }

    Tape<float> tape;
    auto bound = bind_params(tape, params);
    auto truth_id =
        tape.constant(Shape::of(batch, 3), std::span<const float>(truth), "truth");
    Tape<float>::Id loss;
    if (is_nerf) {
      auto graph = nerf_render_batch(tape, bound, std::span<const Ray>(rays),
                                     std::span<Stream>(streams), nerf_cfg, "coarse", "fine");
      loss = nerf_loss(tape, graph.coarse.color, graph.fine.color, truth_id);
    } else {
      auto graph = build_neus_pass(tape, bound, "sdf", std::span<const Ray>(rays),
                                   std::span<Stream>(streams), neus_cfg);
      // Eikonal probes: half uniform over the unit box, half on this batch's
      // rays so the term also acts where rendering actually looks.
      std::vector<Vec3> probes;
      probes.reserve(batch);
      Stream eik = it.fork("eikonal");
      int volume_count = (batch + 1) / 2;
      for (int k = 0; k < volume_count; ++k) {
        Stream p = eik.fork("volume").fork(static_cast<uint64_t>(k));
        probes.push_back(Vec3{p.next_double() * 2.0 - 1.0, p.next_double() * 2.0 - 1.0,
                              p.next_double() * 2.0 - 1.0});
      }
      for (int k = 0; k < batch - volume_count; ++k) {
        Stream p = eik.fork("surface").fork(static_cast<uint64_t>(k));
        const Ray& ray = rays[k];
        double t = ray.t_near + p.next_double() * (ray.t_far - ray.t_near);
        probes.push_back(ray.at(t));
      }
      auto grad_norm = sdf_grad_norm_fd(tape, bound, "sdf", probes);
      loss = neus_loss(tape, graph.render.color, truth_id, grad_norm, cfg.eikonal_weight);
    }

    double loss_value = tape.data(loss)[0];
    if (!std::isfinite(loss_value))
      fail("optim", "non-finite loss at iteration " + std::to_string(iter) +
                        "; last saved checkpoint kept at " + ckpt_file);
    report.loss_curve.emplace_back(iter, loss_value);

    tape.backward(loss);
    auto grads = collect_grads(tape, bound);
    opt.step(params, grads);

    if ((iter + 1) % kCheckpointEvery == 0 || iter + 1 == cfg.iterations) {
      ckpt.params = params;
      save_checkpoint(ckpt_file, ckpt);
      std::fprintf(stderr, "[train] iter %d/%d loss %.6g\n", iter + 1, cfg.iterations,
                   loss_value);
    }
  }

  for (int v : held) {
    ImageF frame = is_nerf
                       ? render_image(params, data.cameras[v], nerf_cfg, cfg.seed)
                       : neus_render_image(params, data.cameras[v], neus_cfg, cfg.seed, "sdf");
    ImageU8 rendered = opaque(quantize(frame));
    write_png(cfg.out_dir + "/heldout_" + std::to_string(v) + ".png", rendered);
    report.held_out.push_back(view_metric(v, rendered, data.images[v], cfg.background));
  }

  if (!is_nerf) report.mesh = mesh_error_stats(ckpt, data.scene_name, kMeshStatsResolution);

  write_metrics(report, cfg.out_dir + "/metrics.json");
  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_timing(wall, cfg.out_dir + "/timing.json");
  return TrainResult{std::move(ckpt), std::move(report), wall};
}

}  // namespace fieldray
