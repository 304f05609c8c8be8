// Copyright (c) 2026 The fieldray Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Release gate. Runs the ten checks that qualify a build, one line each:
//
//   [ 7] PASS  end-to-end nerf beats background baseline   612.41 s  ...
//
// Checks 1-6 and 9 are fast properties with hard time budgets; 7, 8 and 10
// are full training runs (expect roughly an hour total on one desktop core;
// their wall-clock targets are reported but only quality gates the result).
// Exits 0 only when every line is PASS.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fieldray/autodiff/adam.hpp"
#include "fieldray/autodiff/tape.hpp"
#include "fieldray/diffusion/sampler.hpp"
#include "fieldray/fields/analytic.hpp"
#include "fieldray/fields/mlp.hpp"
#include "fieldray/fields/radiance_field.hpp"
#include "fieldray/fields/sdf_field.hpp"
#include "fieldray/mesh/marching_cubes.hpp"
#include "fieldray/nerf/renderer.hpp"
#include "fieldray/nerf/sampling.hpp"
#include "fieldray/neus/renderer.hpp"
#include "fieldray/oracle/dataset.hpp"
#include "fieldray/oracle/scene.hpp"
#include "fieldray/pipeline/metrics.hpp"
#include "fieldray/pipeline/train.hpp"
#include "fieldray/util/stats.hpp"

namespace {

using namespace fieldray;
using Clock = std::chrono::steady_clock;

std::filesystem::path g_work;

// A gate returns "" on pass, else a short failure reason. Extra detail for
// the report goes through the out-string.
struct Gate {
  int id;
  std::string name;
  double time_limit_s;  // <= 0: no hard budget, wall time is informational
  std::function<std::string(std::string& detail)> run;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in.good()) return {};
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// ---------------------------------------------------------------------------
// 1. Quadrature exactness: piecewise-constant profiles with samples aligned
//    to the pieces must reproduce the closed-form transmittance integral.
std::string gate_quadrature(std::string& detail) {
  Stream rng(101);
  const int profiles = 64, pieces = 8;
  double worst = 0.0;
  for (int p = 0; p < profiles; ++p) {
    Stream pr = rng.fork(static_cast<uint64_t>(p));
    PiecewiseProfile prof;
    prof.knots.push_back(0.2 + pr.next_double());
    for (int i = 0; i < pieces; ++i) {
      prof.knots.push_back(prof.knots.back() + 0.05 + pr.next_double() * 0.4);
      prof.sigma.push_back(pr.next_double() * 4.0);
      prof.color.push_back(Vec3{pr.next_double(), pr.next_double(), pr.next_double()});
    }
    Vec3 bg{pr.next_double(), pr.next_double(), pr.next_double()};
    AnalyticRender closed = render_ray_analytic(prof, bg);

    Tape<double> tape;
    std::vector<double> sig(prof.sigma), del(pieces), rgb(pieces * 3), bgv{bg.x, bg.y, bg.z};
    for (int i = 0; i < pieces; ++i) {
      del[i] = prof.knots[i + 1] - prof.knots[i];
      rgb[3 * i] = prof.color[i].x;
      rgb[3 * i + 1] = prof.color[i].y;
      rgb[3 * i + 2] = prof.color[i].z;
    }
    auto nodes = render_quadrature(
        tape, tape.constant(Shape::of(1, pieces), std::span<const double>(sig)),
        tape.constant(Shape::of(1, pieces, 3), std::span<const double>(rgb)),
        tape.constant(Shape::of(1, pieces), std::span<const double>(del)),
        tape.constant(Shape::of(3), std::span<const double>(bgv)));
    auto got = tape.data(nodes.color);
    double expect[3] = {closed.rgb.x, closed.rgb.y, closed.rgb.z};
    for (int c = 0; c < 3; ++c)
      worst = std::max(worst, std::abs(got[c] - expect[c]) / std::max(1e-12, std::abs(expect[c])));
  }
  detail = "max rel err " + fmt(worst) + " over " + std::to_string(profiles) + " profiles";
  if (worst > 1e-6) return "relative error " + fmt(worst) + " exceeds 1e-6";
  return "";
}

// ---------------------------------------------------------------------------
// 2. Weight normalization: quadrature weights plus residual transmittance
//    must partition unity for both renderers.
std::string gate_normalization(std::string& detail) {
  const int rays = 10000, samples = 16;
  double worst_nerf = 0.0, worst_neus = 0.0;

  {
    Stream rng(202);
    std::vector<double> sig(static_cast<size_t>(rays) * samples);
    std::vector<double> del(sig.size());
    std::vector<double> rgb(sig.size() * 3, 0.5);
    for (auto& v : sig) v = rng.next_double() < 0.1 ? 0.0 : rng.next_double() * 5.0;
    for (auto& v : del) v = 0.01 + rng.next_double() * 0.3;
    std::vector<double> bg{1.0, 1.0, 1.0};
    Tape<double> tape;
    auto nodes = render_quadrature(
        tape, tape.constant(Shape::of(rays, samples), std::span<const double>(sig)),
        tape.constant(Shape::of(rays, samples, 3), std::span<const double>(rgb)),
        tape.constant(Shape::of(rays, samples), std::span<const double>(del)),
        tape.constant(Shape::of(3), std::span<const double>(bg)));
    auto w = tape.data(nodes.weights);
    auto t_rem = tape.data(nodes.t_rem);
    for (int r = 0; r < rays; ++r) {
      double sum = t_rem[r];
      for (int i = 0; i < samples; ++i) sum += w[static_cast<size_t>(r) * samples + i];
      worst_nerf = std::max(worst_nerf, std::abs(sum - 1.0));
    }
  }

  {
    Stream rng(203);
    for (int r = 0; r < rays; ++r) {
      Stream rr = rng.fork(static_cast<uint64_t>(r));
      std::vector<double> f(samples);
      f[0] = rr.next_double() * 2.0 - 0.5;
      for (int i = 1; i < samples; ++i) f[i] = f[i - 1] + (rr.next_double() - 0.6) * 0.4;
      NeusWeights w = neus_weights_value(f, 25.0);
      double sum = w.t_rem;
      for (double wi : w.weights) sum += wi;
      worst_neus = std::max(worst_neus, std::abs(sum - 1.0));
    }
  }

  detail = "max |sum-1| nerf " + fmt(worst_nerf) + ", neus " + fmt(worst_neus);
  if (worst_nerf > 1e-6) return "nerf weight sum off by " + fmt(worst_nerf);
  if (worst_neus > 1e-6) return "neus weight sum off by " + fmt(worst_neus);
  return "";
}

// ---------------------------------------------------------------------------
// 3. NeuS unbiasedness: weights peak at the surface crossing, and an occluded
//    second surface receives less mass than the first.
std::string gate_unbiased(std::string& detail) {
  const int n = 256;
  const double t_lo = 0.0, t_hi = 2.0, crossing = 0.7;
  const double spacing = (t_hi - t_lo) / n;
  std::ostringstream note;
  for (double s : {5.0, 20.0, 80.0}) {
    std::vector<double> f(n);
    std::vector<double> mid(n);
    for (int i = 0; i < n; ++i) {
      mid[i] = t_lo + (i + 0.5) * spacing;
      f[i] = crossing - mid[i];  // linear SDF along the ray
    }
    NeusWeights w = neus_weights_value(f, s);
    size_t arg = 0;
    for (size_t i = 1; i < w.weights.size(); ++i)
      if (w.weights[i] > w.weights[arg]) arg = i;
    double peak_t = 0.5 * (mid[arg] + mid[arg + 1]);  // weight i covers [t_i, t_i+1]
    if (std::abs(peak_t - crossing) > spacing)
      return "s=" + fmt(s) + ": weight peak at t=" + fmt(peak_t) + ", crossing at " +
             fmt(crossing);
    note << "s=" << s << " peak off " << fmt(std::abs(peak_t - crossing)) << "; ";
  }

  // Two-sphere occlusion: rays offset from the axis pierce the small front
  // sphere, exit, then enter the big rear sphere.
  AnalyticField field = make_analytic_scene("two_spheres");
  for (double x : {0.16, 0.18, 0.20}) {
    Ray ray{Vec3{x, 0.0, 2.0}, Vec3{0.0, 0.0, -1.0}, 0.5, 4.0};
    std::vector<double> weights;
    neus_render_analytic(field, ray, 64.0, 512, &weights);
    std::vector<double> f(512);
    double len = ray.t_far - ray.t_near;
    for (int i = 0; i < 512; ++i)
      f[i] = field.value(ray.at(ray.t_near + (i + 0.5) * len / 512));
    // locate the two negative runs and split the mass between them
    int first_end = -1, second_start = -1;
    bool inside = false;
    int runs = 0;
    for (int i = 0; i < 512; ++i) {
      if (f[i] < 0.0 && !inside) {
        ++runs;
        inside = true;
        if (runs == 2) second_start = i;
      }
      if (f[i] >= 0.0 && inside) {
        inside = false;
        if (runs == 1) first_end = i;
      }
    }
    if (runs < 2) return "ray x=" + fmt(x) + " saw " + std::to_string(runs) + " crossings";
    int split = (first_end + second_start) / 2;
    double mass1 = 0.0, mass2 = 0.0;
    for (size_t i = 0; i + 1 < f.size(); ++i)
      (static_cast<int>(i) < split ? mass1 : mass2) += weights[i];
    if (!(mass1 > mass2))
      return "ray x=" + fmt(x) + ": first mass " + fmt(mass1) + " <= second " + fmt(mass2);
    note << "x=" << x << " mass " << fmt(mass1) << ">" << fmt(mass2) << "; ";
  }
  detail = note.str();
  return "";
}

// ---------------------------------------------------------------------------
// 4. Gradient integrity: reverse-mode gradients against central finite
//    differences, on bare MLPs and through the full render+loss paths.
double directional_fd(const std::function<double(const ParameterSet<double>&)>& loss,
                      const ParameterSet<double>& params, const std::map<std::string,
                      std::vector<double>>& grads, Stream dir_rng) {
  // random unit direction over the whole parameter vector
  std::vector<double> dir;
  for (const auto& [name, value] : params.items())
    for (size_t i = 0; i < value.data.size(); ++i) dir.push_back(dir_rng.next_normal());
  double norm = 0.0;
  for (double d : dir) norm += d * d;
  norm = std::sqrt(norm);
  for (double& d : dir) d /= norm;

  double analytic = 0.0;
  size_t k = 0;
  for (const auto& [name, value] : params.items()) {
    auto it = grads.find(name);
    for (size_t i = 0; i < value.data.size(); ++i, ++k)
      if (it != grads.end()) analytic += it->second[i] * dir[k];
  }

  const double h = 1e-5;
  auto shifted = [&](double sign) {
    ParameterSet<double> p = params;
    size_t j = 0;
    for (auto& [name, value] : p.items())
      for (double& v : value.data) v += sign * h * dir[j++];
    return loss(p);
  };
  double numeric = (shifted(1.0) - shifted(-1.0)) / (2.0 * h);
  double scale = std::max({1e-9, std::abs(analytic), std::abs(numeric)});
  return std::abs(analytic - numeric) / scale;
}

std::string gate_gradients(std::string& detail) {
  double worst_mlp = 0.0;

  {  // bare MLP, random weights and inputs
    MlpSpec spec{{6, 16, 16, 3}};
    ParameterSet<double> params;
    mlp_init(params, "net", spec, Stream(404).fork("init"));
    Stream in_rng(405);
    const int batch = 5;
    std::vector<double> xs(batch * 6), mix(batch * 3);
    for (auto& v : xs) v = in_rng.next_normal();
    for (auto& v : mix) v = in_rng.next_normal();

    auto loss_of = [&](const ParameterSet<double>& p) {
      Tape<double> tape;
      auto bound = bind_params(tape, p);
      auto x = tape.constant(Shape::of(batch, 6), std::span<const double>(xs));
      auto out = mlp_forward(tape, bound, "net", spec, x);
      auto m = tape.constant(Shape::of(batch, 3), std::span<const double>(mix));
      auto l = tape.sum(tape.mul(out, m));
      return static_cast<double>(tape.data(l)[0]);
    };
    Tape<double> tape;
    auto bound = bind_params(tape, params);
    auto x = tape.constant(Shape::of(batch, 6), std::span<const double>(xs));
    auto out = mlp_forward(tape, bound, "net", spec, x);
    auto m = tape.constant(Shape::of(batch, 3), std::span<const double>(mix));
    auto l = tape.sum(tape.mul(out, m));
    tape.backward(l);
    auto grads = collect_grads(tape, bound);
    for (uint64_t d = 0; d < 3; ++d)
      worst_mlp = std::max(worst_mlp,
                           directional_fd(loss_of, params, grads, Stream(406).fork(d)));
    if (worst_mlp > 1e-4) return "mlp relative error " + fmt(worst_mlp) + " exceeds 1e-4";
  }

  double worst_nerf = 0.0;
  {  // full NeRF path: two passes, quadrature, loss; sample positions frozen
    ParameterSet<double> params;
    Stream init = Stream(407).fork("init");
    radiance_init(params, "coarse", init.fork("coarse"));
    radiance_init(params, "fine", init.fork("fine"));

    const int rays_n = 4, nc = 6, nf = 6;
    std::vector<Ray> rays;
    Stream geo(408);
    for (int r = 0; r < rays_n; ++r) {
      Vec3 o{geo.next_double() - 0.5, geo.next_double() - 0.5, 2.0};
      rays.push_back(Ray{o, Vec3{0, 0, -1}, 1.0, 3.5});
    }
    std::vector<std::vector<double>> t_coarse, t_fine;
    for (int r = 0; r < rays_n; ++r) {
      Stream s = geo.fork("t").fork(static_cast<uint64_t>(r));
      auto tc = stratified_samples(s, 1.0, 3.5, nc);
      auto tf = stratified_samples(s, 1.2, 3.3, nf);
      t_coarse.push_back(tc);
      std::vector<double> merged(tc);
      merged.insert(merged.end(), tf.begin(), tf.end());
      std::sort(merged.begin(), merged.end());
      t_fine.push_back(merged);
    }
    std::vector<double> truth(rays_n * 3, 0.4);
    Vec3 bg{1, 1, 1};

    auto loss_of = [&](const ParameterSet<double>& p) {
      Tape<double> tape;
      auto bound = bind_params(tape, p);
      auto coarse = build_nerf_pass(tape, bound, "coarse", std::span<const Ray>(rays), t_coarse, bg);
      auto fine = build_nerf_pass(tape, bound, "fine", std::span<const Ray>(rays), t_fine, bg);
      auto truth_id = tape.constant(Shape::of(rays_n, 3), std::span<const double>(truth));
      auto l = nerf_loss(tape, coarse.color, fine.color, truth_id);
      return static_cast<double>(tape.data(l)[0]);
    };
    Tape<double> tape;
    auto bound = bind_params(tape, params);
    auto coarse = build_nerf_pass(tape, bound, "coarse", std::span<const Ray>(rays), t_coarse, bg);
    auto fine = build_nerf_pass(tape, bound, "fine", std::span<const Ray>(rays), t_fine, bg);
    auto truth_id = tape.constant(Shape::of(rays_n, 3), std::span<const double>(truth));
    auto l = nerf_loss(tape, coarse.color, fine.color, truth_id);
    tape.backward(l);
    auto grads = collect_grads(tape, bound);
    for (uint64_t d = 0; d < 2; ++d)
      worst_nerf = std::max(worst_nerf,
                            directional_fd(loss_of, params, grads, Stream(409).fork(d)));
    if (worst_nerf > 1e-3) return "nerf path relative error " + fmt(worst_nerf);
  }

  double worst_neus = 0.0;
  {  // full NeuS path: sdf render, eikonal term, loss
    ParameterSet<double> params;
    sdf_init(params, "sdf", Stream(410).fork("init").fork("sdf"));

    const int rays_n = 4;
    std::vector<Ray> rays;
    Stream geo(411);
    for (int r = 0; r < rays_n; ++r) {
      Vec3 o{geo.next_double() - 0.5, geo.next_double() - 0.5, 2.0};
      rays.push_back(Ray{o, Vec3{0, 0, -1}, 1.0, 3.2});
    }
    std::vector<Vec3> probes;
    for (int k = 0; k < 3; ++k)
      probes.push_back(Vec3{geo.next_double() - 0.5, geo.next_double() - 0.5,
                            geo.next_double() - 0.5});
    std::vector<double> truth(rays_n * 3, 0.3);
    NeusConfig cfg{8, 0.1, Vec3{1, 1, 1}};

    auto loss_of = [&](const ParameterSet<double>& p) {
      Tape<double> tape;
      auto bound = bind_params(tape, p);
      std::vector<Stream> streams;
      for (int r = 0; r < rays_n; ++r) streams.push_back(Stream(412).fork(static_cast<uint64_t>(r)));
      auto pass = build_neus_pass(tape, bound, "sdf", std::span<const Ray>(rays),
                                  std::span<Stream>(streams), cfg);
      auto grad_norm = sdf_grad_norm_fd(tape, bound, "sdf", probes);
      auto truth_id = tape.constant(Shape::of(rays_n, 3), std::span<const double>(truth));
      auto l = neus_loss(tape, pass.render.color, truth_id, grad_norm, cfg.eikonal_weight);
      return static_cast<double>(tape.data(l)[0]);
    };
    Tape<double> tape;
    auto bound = bind_params(tape, params);
    std::vector<Stream> streams;
    for (int r = 0; r < rays_n; ++r) streams.push_back(Stream(412).fork(static_cast<uint64_t>(r)));
    auto pass = build_neus_pass(tape, bound, "sdf", std::span<const Ray>(rays),
                                std::span<Stream>(streams), cfg);
    auto grad_norm = sdf_grad_norm_fd(tape, bound, "sdf", probes);
    auto truth_id = tape.constant(Shape::of(rays_n, 3), std::span<const double>(truth));
    auto l = neus_loss(tape, pass.render.color, truth_id, grad_norm, cfg.eikonal_weight);
    tape.backward(l);
    auto grads = collect_grads(tape, bound);
    for (uint64_t d = 0; d < 2; ++d)
      worst_neus = std::max(worst_neus,
                            directional_fd(loss_of, params, grads, Stream(413).fork(d)));
    if (worst_neus > 1e-3) return "neus path relative error " + fmt(worst_neus);
  }

  detail = "rel err: mlp " + fmt(worst_mlp) + ", nerf " + fmt(worst_nerf) + ", neus " +
           fmt(worst_neus);
  return "";
}

// ---------------------------------------------------------------------------
// 5. Synchronized sampler against the Gaussian oracle.
std::string gate_sync_oracle(std::string& detail) {
  DiffusionSchedule sched = make_schedule(1000, 1e-4, 0.02);
  const double m = 3.0, v = 0.25;
  std::ostringstream note;

  {  // 1e4 independent scalar chains must land on N(m, v)
    const int chains = 10000;
    auto pred = make_gaussian_predictor(sched, m, v);
    auto x = sample(pred, chains, 1, sched, 7001);
    std::vector<double> finals(chains);
    for (int i = 0; i < chains; ++i) finals[i] = x[i][0];
    MeanVar mv = mean_var(finals);
    double se = std::sqrt(v / chains);
    if (std::abs(mv.mean - m) > 3.0 * se)
      return "mean " + fmt(mv.mean) + " not within 3 SE of " + fmt(m);
    if (std::abs(mv.variance - v) > 0.05 * v)
      return "variance " + fmt(mv.variance) + " not within 5% of " + fmt(v);
    note << "mean off " << fmt(std::abs(mv.mean - m)) << " (3SE " << fmt(3 * se)
         << "), var off " << fmt(std::abs(mv.variance - v) / v * 100) << "%; ";
  }

  {  // N = 1 must bit-match the longhand single-view chain
    for (uint64_t seed : {1ull, 42ull, 900ull}) {
      auto pred = make_gaussian_predictor(sched, m, v);
      auto multi = sample(pred, 1, 3, sched, seed);
      auto single = reference_single_view_chain(
          [&](const ViewState& x, int t) {
            double ab = sched.alpha_bar_at(t);
            double scale = std::sqrt(1.0 - ab) / (ab * v + 1.0 - ab);
            double sm = std::sqrt(ab) * m;
            ViewState eps(x.size());
            for (size_t i = 0; i < x.size(); ++i) eps[i] = scale * (x[i] - sm);
            return eps;
          },
          3, sched, seed);
      for (int i = 0; i < 3; ++i)
        if (multi[0][i] != single[i]) return "N=1 diverges from reference at seed " +
                                             std::to_string(seed);
    }
    note << "N=1 bitwise ok; ";
  }

  {  // shared noise + symmetric predictor: views stay bitwise identical
    const int views = 6, dim = 4;
    auto pred = make_view_averaging_predictor(make_gaussian_predictor(sched, m, v), sched, 0.7);
    Stream chain(7002);
    MultiviewState state;
    state.t = sched.steps;
    Stream init = chain.fork("common-init");
    ViewState shared(dim);
    for (auto& s : shared) s = init.next_normal();
    state.x.assign(views, shared);
    while (state.t > 0) {
      state = sync_reverse_step(state, pred, sched, chain, /*shared_noise=*/true);
      for (int n = 1; n < views; ++n)
        for (int i = 0; i < dim; ++i)
          if (state.x[n][i] != state.x[0][i])
            return "views diverged at t=" + std::to_string(state.t);
    }
    note << "shared-noise lockstep ok";
  }
  detail = note.str();
  return "";
}

// ---------------------------------------------------------------------------
// 6. Hierarchical resampling distributions.
std::string gate_resampling(std::string& detail) {
  const int draws = 10000;
  {  // one-hot weights: every draw lands inside the hot bin
    std::vector<double> t{0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6};
    std::vector<double> w(t.size() - 1, 0.0);
    w[3] = 2.5;
    Stream rng(606);
    auto samples = inverse_cdf_sample(t, w, rng, draws);
    for (double s : samples)
      if (s < t[3] || s >= t[4]) return "draw " + fmt(s) + " escaped the hot bin [0.6,0.8)";
  }
  double d_stat;
  {  // uniform weights over equal bins: draws are uniform on [0,1)
    const int bins = 16;
    std::vector<double> t(bins + 1), w(bins, 1.0);
    for (int i = 0; i <= bins; ++i) t[i] = static_cast<double>(i) / bins;
    Stream rng(607);
    auto samples = inverse_cdf_sample(t, w, rng, draws);
    d_stat = ks_statistic_uniform(samples);
    double crit = ks_critical_1pct(draws);
    if (d_stat > crit)
      return "KS statistic " + fmt(d_stat) + " above 1% critical value " + fmt(crit);
    detail = "containment ok; KS " + fmt(d_stat) + " < " + fmt(crit);
  }
  return "";
}

// ---------------------------------------------------------------------------
// 7/8/10: end-to-end training. The dataset and both frozen configs live here
// so the determinism gate can rerun them unchanged.
PosedImageSet make_acceptance_dataset() {
  AnalyticScene scene = make_scene("checker_sphere");
  auto cams = fixed_view_ring(16, 30.0, 2.5, 64, 64, 40.0, 1.0, 4.0);
  return render_ground_truth(scene, cams);
}

RunConfig nerf_run_config(const std::string& data_dir, const std::string& out_dir) {
  RunConfig cfg;
  cfg.method = "nerf";
  cfg.dataset = data_dir;
  cfg.iterations = 5000;
  cfg.rays_per_batch = 128;
  cfg.samples_coarse = 32;
  cfg.samples_fine = 32;
  cfg.learning_rate = 2e-3;
  cfg.seed = 1;
  cfg.out_dir = out_dir;
  return cfg;
}

RunConfig neus_run_config(const std::string& data_dir, const std::string& out_dir) {
  RunConfig cfg;
  cfg.method = "neus";
  cfg.dataset = data_dir;
  cfg.iterations = 5000;
  cfg.rays_per_batch = 24;
  cfg.samples_neus = 64;
  cfg.learning_rate = 1e-3;
  cfg.seed = 1;
  cfg.out_dir = out_dir;
  return cfg;
}

std::string ensure_dataset() {
  std::string dir = (g_work / "data").string();
  if (!std::filesystem::exists(dir + "/cameras.json")) {
    PosedImageSet set = make_acceptance_dataset();
    write_dataset(set, dir);
  }
  return dir;
}

double baseline_psnr(const Dataset& data, int view) {
  ImageU8 blank = ImageU8::filled(data.width, data.height, 0, 0, 0, 0);
  ImageU8 white = composite_over(blank, data.background);
  ImageU8 truth = composite_over(data.images[view], data.background);
  return psnr(white, truth);
}

std::string gate_nerf_e2e(std::string& detail) {
  std::string data_dir = ensure_dataset();
  RunConfig cfg = nerf_run_config(data_dir, (g_work / "nerf_a").string());
  TrainResult r = train(cfg);
  Dataset data = load_dataset(data_dir);

  double margin_min = 1e9;
  std::ostringstream note;
  for (const ViewMetric& m : r.report.held_out) {
    double base = baseline_psnr(data, m.view);
    margin_min = std::min(margin_min, m.psnr_db - base);
    note << "view " << m.view << " " << fmt(m.psnr_db) << " dB (baseline " << fmt(base)
         << "); ";
  }
  note << "wall " << fmt(r.wall_seconds) << " s (target 1200)";
  detail = note.str();
  if (margin_min < 8.0) return "held-out margin " + fmt(margin_min) + " dB below 8 dB";
  return "";
}

std::string gate_neus_e2e(std::string& detail) {
  std::string data_dir = ensure_dataset();
  RunConfig cfg = neus_run_config(data_dir, (g_work / "neus_a").string());
  TrainResult r = train(cfg);

  MeshErrorStats stats = mesh_error_stats(r.checkpoint, "checker_sphere", 128);
  if (!stats.available) return "mesh unavailable (empty surface?)";
  detail = "mean |sdf| " + fmt(stats.mean_abs_sdf) + " over " +
           std::to_string(stats.vertex_count) + " vertices, max " + fmt(stats.max_abs_sdf) +
           ", wall " + fmt(r.wall_seconds) + " s (target 1800)";
  if (stats.mean_abs_sdf >= 0.03)
    return "mean |sdf| " + fmt(stats.mean_abs_sdf) + " not below 0.03";
  return "";
}

// ---------------------------------------------------------------------------
// 9. Marching cubes against the analytic sphere.
std::string gate_marching_cubes(std::string& detail) {
  const int n = 64;
  const double radius = 0.6;
  ScalarGrid grid = sample_grid(
      [&](const Vec3& p) { return std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z) - radius; },
      Vec3{-1, -1, -1}, Vec3{1, 1, 1}, n, n, n);
  TriangleMesh mesh = marching_cubes(grid, 0.0);
  if (mesh.vertices.empty()) return "sphere mesh came out empty";
  double cell_diag = std::sqrt(3.0) * 2.0 / (n - 1);
  double worst = 0.0;
  for (const Vec3& v : mesh.vertices)
    worst = std::max(worst,
                     std::abs(std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z) - radius));
  if (worst > cell_diag)
    return "vertex radius off by " + fmt(worst) + ", above one cell diagonal " + fmt(cell_diag);

  ScalarGrid positive = sample_grid([](const Vec3&) { return 1.0; }, Vec3{-1, -1, -1},
                                    Vec3{1, 1, 1}, 8, 8, 8);
  if (!marching_cubes(positive, 0.0).triangles.empty())
    return "all-positive grid produced triangles";
  detail = std::to_string(mesh.vertices.size()) + " vertices, worst radius err " + fmt(worst) +
           " < diag " + fmt(cell_diag);
  return "";
}

// ---------------------------------------------------------------------------
// 10. Determinism: the training gates rerun byte-identically.
std::string gate_determinism(std::string& detail) {
  std::string data_dir = ensure_dataset();

  RunConfig nerf_b = nerf_run_config(data_dir, (g_work / "nerf_b").string());
  train(nerf_b);
  std::string a = slurp(g_work / "nerf_a" / "metrics.json");
  std::string b = slurp(g_work / "nerf_b" / "metrics.json");
  if (a.empty() || a != b) return "nerf metrics.json differs between identical runs";

  RunConfig neus_b = neus_run_config(data_dir, (g_work / "neus_b").string());
  train(neus_b);
  std::string c = slurp(g_work / "neus_a" / "metrics.json");
  std::string d = slurp(g_work / "neus_b" / "metrics.json");
  if (c.empty() || c != d) return "neus metrics.json differs between identical runs";

  detail = "nerf " + std::to_string(a.size()) + " bytes, neus " + std::to_string(c.size()) +
           " bytes, both byte-identical";
  return "";
}

}  // namespace

int main(int argc, char** argv) {
  g_work = std::filesystem::temp_directory_path() / "fieldray_acceptance";
  std::filesystem::create_directories(g_work);

  // Optional gate ids on the command line run a subset (dev loop); the ctest
  // entry passes nothing and runs all ten.
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));

  std::vector<Gate> gates{
      {1, "quadrature matches the closed-form renderer", 1.0, gate_quadrature},
      {2, "quadrature weights partition unity", 1.0, gate_normalization},
      {3, "sdf weights peak at first surface crossing", 5.0, gate_unbiased},
      {4, "gradients match finite differences", 30.0, gate_gradients},
      {5, "synchronized sampler hits the gaussian oracle", 60.0, gate_sync_oracle},
      {6, "inverse-cdf resampling distributions", 5.0, gate_resampling},
      {7, "end-to-end nerf beats background baseline", 0.0, gate_nerf_e2e},
      {8, "end-to-end neus mesh matches analytic sphere", 0.0, gate_neus_e2e},
      {9, "marching cubes recovers the sphere", 5.0, gate_marching_cubes},
      {10, "training reruns are byte-identical", 0.0, gate_determinism},
  };

  int passed = 0, ran = 0;
  for (const Gate& g : gates) {
    if (!only.empty() && std::find(only.begin(), only.end(), g.id) == only.end()) continue;
    ++ran;
    auto t0 = Clock::now();
    std::string detail;
    std::string err;
    try {
      err = g.run(detail);
    } catch (const std::exception& e) {
      err = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (err.empty() && g.time_limit_s > 0.0 && secs > g.time_limit_s)
      err = "took " + fmt(secs) + " s, budget " + fmt(g.time_limit_s) + " s";
    bool ok = err.empty();
    passed += ok ? 1 : 0;
    std::printf("[%2d] %s  %-46s %8.2f s  %s\n", g.id, ok ? "PASS" : "FAIL", g.name.c_str(),
                secs, ok ? detail.c_str() : err.c_str());
    std::fflush(stdout);
  }
  std::printf("acceptance: %d/%d passed\n", passed, ran);
  return passed == ran && ran > 0 ? 0 : 1;
}
