// Copyright (c) 2026 The fieldray Authors.
// SPDX-License-Identifier: Apache-2.0
//
// fieldray: synthesize analytic multiview datasets, train NeRF/NeuS style
// fields on them, render, extract meshes, run the synchronized diffusion
// demo, and score renders. One subcommand per pipeline stage; every failure
// exits nonzero with an error JSON on stderr.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fieldray/fields/radiance_field.hpp"
#include "fieldray/fields/sdf_field.hpp"
#include "fieldray/mesh/marching_cubes.hpp"
#include "fieldray/mesh/mesh_io.hpp"
#include "fieldray/oracle/dataset.hpp"
#include "fieldray/oracle/scene.hpp"
#include "fieldray/pipeline/render.hpp"
#include "fieldray/pipeline/sync_demo.hpp"
#include "fieldray/pipeline/train.hpp"
#include "fieldray/util/error.hpp"

namespace {

using namespace fieldray;

struct CommonFlags {
  std::string config;
  uint64_t seed = 0;
  bool seed_set = false;
  std::string out;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool config_required) {
  auto* c = cmd->add_option("--config", f.config, "run config JSON");
  if (config_required) c->required();
  cmd->add_option("--seed", f.seed, "override the config seed")
      ->each([&f](const std::string&) { f.seed_set = true; });
  cmd->add_option("--out", f.out, "override the output directory");
}

RunConfig load_with_overrides(const CommonFlags& f) {
  RunConfig cfg = load_run_config(f.config);
  if (f.seed_set) cfg.seed = f.seed;
  if (!f.out.empty()) cfg.out_dir = f.out;
  return cfg;
}

int cmd_synth_data(const std::string& scene_name, int views, double elevation, double radius,
                   int size, double fov, double t_near, double t_far, uint64_t seed,
                   const std::string& out) {
  AnalyticScene scene = make_scene(scene_name);
  std::vector<Camera> ring =
      fixed_view_ring(views, elevation, radius, size, size, fov, t_near, t_far);
  PosedImageSet set = render_ground_truth(scene, ring);
  set.seed = seed;
  write_dataset(set, out);
  std::cout << "wrote " << views << " views of '" << scene_name << "' to " << out << "\n";
  return 0;
}

int cmd_train(const CommonFlags& flags, const std::string& method) {
  RunConfig cfg = load_with_overrides(flags);
  if (cfg.method.empty()) cfg.method = method;
  if (cfg.method != method)
    fail("config", "config method '" + cfg.method + "' does not match subcommand " + method);
  TrainResult result = train(cfg);
  double final_loss = result.report.loss_curve.back().second;
  std::cout << "trained " << method << " for " << cfg.iterations << " iterations, final loss "
            << final_loss << ", outputs in " << cfg.out_dir << "\n";
  for (const ViewMetric& m : result.report.held_out)
    std::cout << "held-out view " << m.view << ": psnr " << m.psnr_db << " dB\n";
  return 0;
}

int cmd_render(const CommonFlags& flags, const std::string& checkpoint) {
  RunConfig cfg = load_run_config(flags.config);
  std::string ckpt_file = checkpoint.empty() ? checkpoint_path(cfg) : checkpoint;
  if (flags.seed_set) cfg.seed = flags.seed;
  cfg.out_dir = flags.out.empty() ? cfg.out_dir + "/views" : flags.out;
  Checkpoint ckpt = load_checkpoint(ckpt_file);
  Dataset data = load_dataset(cfg.dataset);
  RenderedViews views = render_views(ckpt, data, cfg);
  std::cout << "rendered " << views.files.size() << " views to " << cfg.out_dir << "\n";
  return 0;
}

int cmd_extract_mesh(const std::string& checkpoint, const std::string& out, int resolution,
                     double iso, bool iso_set, const std::string& net) {
  if (resolution < 2 || resolution > 256) fail("config", "resolution must be in [2,256]");
  Checkpoint ckpt = load_checkpoint(checkpoint);
  ScalarGrid grid;
  if (ckpt.kind == "sdf") {
    if (ckpt.params.items().empty()) fail("params", "checkpoint holds no parameters");
    const std::string& first = ckpt.params.items().begin()->first;
    std::string prefix = first.substr(0, first.find('/'));
    grid = sample_sdf_grid(ckpt.params, prefix, Vec3{-1, -1, -1}, Vec3{1, 1, 1}, resolution);
    if (!iso_set) iso = 0.0;
  } else if (ckpt.kind == "radiance") {
    grid = sample_density_grid(ckpt.params, net, Vec3{-1, -1, -1}, Vec3{1, 1, 1}, resolution);
    if (!iso_set) iso = 25.0;  // density threshold; level sets of sigma
  } else {
    fail("config", "cannot extract a mesh from checkpoint kind '" + ckpt.kind + "'");
  }
  TriangleMesh mesh = marching_cubes(grid, iso);
  std::filesystem::create_directories(out);
  std::string path = out + "/mesh.obj";
  export_obj(mesh, path);
  std::cout << "extracted " << mesh.vertices.size() << " vertices / " << mesh.triangles.size()
            << " triangles at iso " << iso << " to " << path << "\n";
  return 0;
}

int cmd_sync_sample(const SyncSampleOptions& opt) {
  SyncSampleStats stats = run_sync_sample(opt);
  std::cout << stats.to_json(opt);
  return 0;
}

int cmd_eval(const std::string& rendered_dir, const std::string& truth_dir,
             const std::string& out) {
  Dataset truth = load_dataset(truth_dir);
  std::vector<ImageU8> rendered = load_image_dir(rendered_dir);
  MetricsReport report = evaluate_views(rendered, truth, truth.background);
  report.dataset = truth_dir;
  if (!out.empty()) {
    std::filesystem::create_directories(out);
    write_metrics(report, out + "/metrics.json");
  }
  std::cout << report.to_json();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fieldray: multiview field reconstruction toolkit"};
  app.require_subcommand(1);

  // synth-data
  std::string sd_scene = "checker_sphere", sd_out;
  int sd_views = 16, sd_size = 64;
  double sd_elev = 30.0, sd_radius = 2.5, sd_fov = 40.0, sd_tnear = 1.0, sd_tfar = 4.0;
  uint64_t sd_seed = 0;
  auto* synth = app.add_subcommand("synth-data", "render an analytic scene into a dataset");
  synth->add_option("--scene", sd_scene,
                    "checker_sphere | torus | two_spheres | slab");
  synth->add_option("--views", sd_views, "camera count on the ring")->check(CLI::Range(2, 256));
  synth->add_option("--elevation", sd_elev, "ring elevation in degrees");
  synth->add_option("--radius", sd_radius, "ring radius");
  synth->add_option("--size", sd_size, "square image size in pixels")
      ->check(CLI::Range(8, 1024));
  synth->add_option("--fov", sd_fov, "vertical field of view in degrees");
  synth->add_option("--tnear", sd_tnear, "near integration bound");
  synth->add_option("--tfar", sd_tfar, "far integration bound");
  synth->add_option("--seed", sd_seed, "seed recorded in scene.json");
  synth->add_option("--out", sd_out, "dataset directory")->required();

  // train-nerf / train-neus
  CommonFlags nerf_flags, neus_flags;
  auto* train_nerf = app.add_subcommand("train-nerf", "train the radiance field");
  add_common(train_nerf, nerf_flags, /*config_required=*/true);
  auto* train_neus = app.add_subcommand("train-neus", "train the signed distance field");
  add_common(train_neus, neus_flags, /*config_required=*/true);

  // render
  CommonFlags render_flags;
  std::string render_ckpt;
  auto* render = app.add_subcommand("render", "render all dataset views from a checkpoint");
  add_common(render, render_flags, /*config_required=*/true);
  render->add_option("--checkpoint", render_ckpt,
                     "checkpoint path (default: <config out_dir>/checkpoint.json)");

  // extract-mesh
  std::string em_ckpt, em_out = "mesh_out", em_net = "fine";
  int em_res = 128;
  double em_iso = std::numeric_limits<double>::quiet_NaN();
  auto* extract = app.add_subcommand("extract-mesh", "marching-cubes surface from a checkpoint");
  extract->add_option("--checkpoint", em_ckpt, "checkpoint path")->required();
  extract->add_option("--out", em_out, "output directory for mesh.obj");
  extract->add_option("--resolution", em_res, "grid resolution per axis");
  auto* iso_opt = extract->add_option("--iso", em_iso,
                                      "level value (default: 0 for sdf, 25 for radiance)");
  extract->add_option("--net", em_net, "radiance network to sample (coarse|fine)");

  // sync-sample
  SyncSampleOptions sync_opt;
  auto* sync = app.add_subcommand("sync-sample", "synchronized multiview diffusion demo");
  sync->add_option("--views", sync_opt.views, "number of synchronized chains");
  sync->add_option("--dim", sync_opt.dim, "state dimension per view");
  sync->add_option("--steps", sync_opt.steps, "diffusion steps")->check(CLI::Range(1, 100000));
  sync->add_option("--mode", sync_opt.mode, "independent | averaging");
  sync->add_option("--kappa", sync_opt.kappa, "view-averaging strength in [0,1]");
  sync->add_option("--mean", sync_opt.mean, "oracle target mean");
  sync->add_option("--variance", sync_opt.variance, "oracle target variance");
  sync->add_flag("--shared-noise", sync_opt.shared_noise, "one noise draw shared across views");
  sync->add_option("--seed", sync_opt.seed, "chain seed");
  sync->add_option("--out", sync_opt.out_dir, "write samples.csv and stats.json here");

  // eval
  std::string ev_rendered, ev_truth, ev_out;
  auto* eval = app.add_subcommand("eval", "score rendered views against a truth dataset");
  eval->add_option("--rendered", ev_rendered, "directory of rendered PNGs")->required();
  eval->add_option("--truth", ev_truth, "truth dataset directory")->required();
  eval->add_option("--out", ev_out, "also write metrics.json here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed())
      return cmd_synth_data(sd_scene, sd_views, sd_elev, sd_radius, sd_size, sd_fov, sd_tnear,
                            sd_tfar, sd_seed, sd_out);
    if (train_nerf->parsed()) return cmd_train(nerf_flags, "nerf");
    if (train_neus->parsed()) return cmd_train(neus_flags, "neus");
    if (render->parsed()) return cmd_render(render_flags, render_ckpt);
    if (extract->parsed())
      return cmd_extract_mesh(em_ckpt, em_out, em_res, em_iso, iso_opt->count() > 0, em_net);
    if (sync->parsed()) return cmd_sync_sample(sync_opt);
    if (eval->parsed()) return cmd_eval(ev_rendered, ev_truth, ev_out);
  } catch (const Error& e) {
    nlohmann::json j;
    j["error"] = {{"type", e.type()}, {"message", e.what()}};
    std::cerr << j.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    nlohmann::json j;
    j["error"] = {{"type", "internal"}, {"message", e.what()}};
    std::cerr << j.dump() << "\n";
    return 2;
  }
  return 0;
}
