// Copyright (c) 2026 The fieldray Authors.
// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include "doctest.h"
#include "fieldray/autodiff/adam.hpp"
#include "fieldray/autodiff/checkpoint.hpp"
#include "fieldray/autodiff/params.hpp"
#include "fieldray/autodiff/tape.hpp"
#include "fieldray/util/rng.hpp"
#include "test_util.hpp"

using namespace fieldray;
using TD = Tape<double>;
using Id = TD::Id;

namespace {

// One finite-difference gradient check: builds the graph twice per probed
// element with a central step and compares against the tape gradient.
struct FdCase {
  std::vector<Shape> shapes;
  // sampler may enforce op-specific domains (e.g. away from relu kinks)
  std::function<std::vector<std::vector<double>>(Stream&)> sample;
  std::function<Id(TD&, std::vector<Id>)> build;
  double h = 1e-3;
  double tol = 1e-4;
};

std::vector<std::vector<double>> default_sample(Stream& rng, const std::vector<Shape>& shapes) {
  std::vector<std::vector<double>> vals;
  for (const auto& s : shapes)
    vals.push_back(testutil::random_doubles(rng, static_cast<size_t>(s.count()), -2.0, 2.0));
  return vals;
}

double run_loss(const FdCase& c, const std::vector<std::vector<double>>& vals) {
  TD tape;
  std::vector<Id> ins;
  for (size_t i = 0; i < c.shapes.size(); ++i) ins.push_back(tape.input(c.shapes[i], vals[i]));
  Id loss = c.build(tape, ins);
  return tape.data(loss)[0];
}

void check_fd_case(const FdCase& c, Stream& rng, const char* name) {
  auto vals = c.sample ? c.sample(rng) : default_sample(rng, c.shapes);
  TD tape;
  std::vector<Id> ins;
  for (size_t i = 0; i < c.shapes.size(); ++i) ins.push_back(tape.input(c.shapes[i], vals[i]));
  Id loss = c.build(tape, ins);
  tape.backward(loss);
  for (size_t i = 0; i < ins.size(); ++i) {
    auto grad = tape.grad(ins[i]);
    for (size_t e = 0; e < vals[i].size(); ++e) {
      auto plus = vals, minus = vals;
      plus[i][e] += c.h;
      minus[i][e] -= c.h;
      double fd = (run_loss(c, plus) - run_loss(c, minus)) / (2.0 * c.h);
      double ad = grad[e];
      double denom = std::max({std::abs(fd), std::abs(ad), 1e-6});
      INFO(name << " input " << i << " elem " << e << " ad=" << ad << " fd=" << fd);
      CHECK(std::abs(ad - fd) / denom < c.tol);
    }
  }
}

// Scalar loss wrapper: weights the op output by a fixed random constant so
// every output element receives a distinct upstream gradient. The stream is
// taken by value: the same weights must come out on every rebuild of the
// graph, or central differences would compare two different losses.
Id weighted_sum(TD& tape, Id out, Stream rng) {
  Shape s = tape.shape(out);
  auto w = testutil::random_doubles(rng, static_cast<size_t>(s.count()), 0.2, 1.0);
  Id wc = tape.constant(s, w);
  return tape.sum(tape.mul(out, wc));
}

}  // namespace

TEST_CASE("autodiff: forward op reference values") {
  TD tape;
  // matmul(I3, A) = A
  std::vector<double> eye = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  std::vector<double> a = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  Id i3 = tape.input(Shape::of(3, 3), eye);
  Id am = tape.input(Shape::of(3, 4), a);
  Id prod = tape.matmul(i3, am);
  for (size_t i = 0; i < a.size(); ++i) CHECK(tape.data(prod)[i] == doctest::Approx(a[i]));

  // max_with_zero(-2.5) = 0
  std::vector<double> neg = {-2.5};
  Id r = tape.max_with_zero(tape.input(Shape::of(1), neg));
  CHECK(tape.data(r)[0] == 0.0);

  // sigmoid(0) = 0.5
  std::vector<double> zero = {0.0};
  Id s = tape.sigmoid(tape.input(Shape::of(1), zero));
  CHECK(tape.data(s)[0] == doctest::Approx(0.5));
}

TEST_CASE("autodiff: basic backward values") {
  // loss = x*x at x=3 -> dloss/dx = 6
  {
    TD tape;
    std::vector<double> x = {3.0};
    Id xi = tape.input(Shape::scalar(), x);
    Id loss = tape.mul(xi, xi);
    tape.backward(loss);
    CHECK(tape.grad(xi)[0] == doctest::Approx(6.0));
  }
  // loss = sum(sigmoid(x)) at x=0 -> grad 0.25 per element
  {
    TD tape;
    std::vector<double> x(5, 0.0);
    Id xi = tape.input(Shape::of(5), x);
    Id loss = tape.sum(tape.sigmoid(xi));
    tape.backward(loss);
    for (int i = 0; i < 5; ++i) CHECK(tape.grad(xi)[i] == doctest::Approx(0.25));
  }
}

TEST_CASE("autodiff: error diagnostics") {
  TD tape;
  std::vector<double> a(6, 1.0), b(6, 1.0);
  Id x = tape.input(Shape::of(2, 3), a);
  Id y = tape.input(Shape::of(2, 3), b);
  // incompatible matmul names both shapes
  try {
    tape.matmul(x, y);
    FAIL("expected shape error");
  } catch (const Error& e) {
    std::string msg = e.what();
    CHECK(msg.find("[2,3]") != std::string::npos);
    CHECK(msg.find("matmul") != std::string::npos);
  }
  // non-scalar loss rejected
  CHECK_THROWS_AS(tape.backward(x), Error);
}

TEST_CASE("autodiff: finite differences across the op set") {
  Stream rng(2026);
  int cases_run = 0;

  auto run = [&](const char* name, FdCase c, int reps = 6) {
    for (int i = 0; i < reps; ++i) {
      check_fd_case(c, rng, name);
      ++cases_run;
    }
  };

  Stream wrng(77);

  run("add", {{Shape::of(2, 3), Shape::of(2, 3)},
              nullptr,
              [&](TD& t, std::vector<Id> in) {
                return weighted_sum(t, t.add(in[0], in[1]), wrng);
              }});
  run("add_broadcast", {{Shape::of(2, 3), Shape::of(3)},
                        nullptr,
                        [&](TD& t, std::vector<Id> in) {
                          return weighted_sum(t, t.add(in[0], in[1]), wrng);
                        }});
  run("sub", {{Shape::of(4), Shape::of(4)},
              nullptr,
              [&](TD& t, std::vector<Id> in) {
                return weighted_sum(t, t.sub(in[0], in[1]), wrng);
              }});
  run("mul_broadcast", {{Shape::of(2, 4), Shape::of(2, 1)},
                        nullptr,
                        [&](TD& t, std::vector<Id> in) {
                          return weighted_sum(t, t.mul(in[0], in[1]), wrng);
                        }});
  run("mul_scalar", {{Shape::of(3), Shape::scalar()},
                     nullptr,
                     [&](TD& t, std::vector<Id> in) {
                       return weighted_sum(t, t.mul(in[0], in[1]), wrng);
                     }});
  run("matmul", {{Shape::of(3, 4), Shape::of(4, 2)},
                 nullptr,
                 [&](TD& t, std::vector<Id> in) {
                   return weighted_sum(t, t.matmul(in[0], in[1]), wrng);
                 }});
  {
    FdCase c;
    c.shapes = {Shape::of(6)};
    // keep probes away from the relu kink by more than the fd step
    c.sample = [&](Stream& r) {
      std::vector<std::vector<double>> v{testutil::random_doubles(r, 6, -2.0, 2.0)};
      for (auto& x : v[0])
        if (std::abs(x) < 0.05) x = x < 0 ? -0.05 : 0.05;
      return v;
    };
    c.build = [&](TD& t, std::vector<Id> in) { return weighted_sum(t, t.relu(in[0]), wrng); };
    run("relu", c);
  }
  run("sigmoid", {{Shape::of(5)},
                  nullptr,
                  [&](TD& t, std::vector<Id> in) {
                    return weighted_sum(t, t.sigmoid(in[0]), wrng);
                  }});
  run("exp", {{Shape::of(5)},
              nullptr,
              [&](TD& t, std::vector<Id> in) { return weighted_sum(t, t.exp(in[0]), wrng); }});
  {
    FdCase c;
    c.shapes = {Shape::of(5)};
    c.sample = [&](Stream& r) {
      return std::vector<std::vector<double>>{testutil::random_doubles(r, 5, 0.1, 2.0)};
    };
    c.build = [&](TD& t, std::vector<Id> in) { return weighted_sum(t, t.log(in[0]), wrng); };
    run("log", c);
    c.build = [&](TD& t, std::vector<Id> in) { return weighted_sum(t, t.sqrt(in[0]), wrng); };
    run("sqrt", c);
  }
  run("sin", {{Shape::of(5)},
              nullptr,
              [&](TD& t, std::vector<Id> in) { return weighted_sum(t, t.sin(in[0]), wrng); }});
  run("cos", {{Shape::of(5)},
              nullptr,
              [&](TD& t, std::vector<Id> in) { return weighted_sum(t, t.cos(in[0]), wrng); }});
  run("softplus", {{Shape::of(5)},
                   nullptr,
                   [&](TD& t, std::vector<Id> in) {
                     return weighted_sum(t, t.softplus(in[0]), wrng);
                   }});
  run("sum", {{Shape::of(2, 3)},
              nullptr,
              [&](TD& t, std::vector<Id> in) { return t.sum(in[0]); }});
  run("sum_axis0", {{Shape::of(3, 4)},
                    nullptr,
                    [&](TD& t, std::vector<Id> in) {
                      return weighted_sum(t, t.sum_axis(in[0], 0), wrng);
                    }});
  run("sum_axis_mid", {{Shape::of(2, 3, 4)},
                       nullptr,
                       [&](TD& t, std::vector<Id> in) {
                         return weighted_sum(t, t.sum_axis(in[0], 1), wrng);
                       }});
  run("broadcast", {{Shape::of(1, 3)},
                    nullptr,
                    [&](TD& t, std::vector<Id> in) {
                      return weighted_sum(t, t.broadcast_to(in[0], Shape::of(4, 3)), wrng);
                    }});
  run("concat", {{Shape::of(2, 3), Shape::of(2, 2)},
                 nullptr,
                 [&](TD& t, std::vector<Id> in) {
                   return weighted_sum(t, t.concat(in[0], in[1], 1), wrng);
                 }});
  run("slice", {{Shape::of(3, 5)},
                nullptr,
                [&](TD& t, std::vector<Id> in) {
                  return weighted_sum(t, t.slice(in[0], 1, 1, 3), wrng);
                }});
  run("reshape", {{Shape::of(2, 6)},
                  nullptr,
                  [&](TD& t, std::vector<Id> in) {
                    return weighted_sum(t, t.reshape(in[0], Shape::of(3, 4)), wrng);
                  }});
  run("affine", {{Shape::of(4)},
                 nullptr,
                 [&](TD& t, std::vector<Id> in) {
                   return weighted_sum(t, t.affine(in[0], 1.7, -0.3), wrng);
                 }});
  {
    FdCase c;
    c.shapes = {Shape::of(6)};
    c.sample = [&](Stream& r) {
      std::vector<std::vector<double>> v{testutil::random_doubles(r, 6, -2.0, 2.0)};
      for (auto& x : v[0]) {
        if (std::abs(x - 1.0) < 0.05) x = 1.1;
        if (std::abs(x + 1.0) < 0.05) x = -1.1;
      }
      return v;
    };
    c.build = [&](TD& t, std::vector<Id> in) {
      return weighted_sum(t, t.clamp(in[0], -1.0, 1.0), wrng);
    };
    run("clamp", c);
  }
  {
    FdCase c;
    c.shapes = {Shape::of(2, 3)};
    c.h = 1e-4;  // highest encoding frequency raises the fd truncation error
    c.build = [&](TD& t, std::vector<Id> in) {
      return weighted_sum(t, t.posenc(in[0], 3), wrng);
    };
    run("posenc", c);
  }
  {
    FdCase c;
    c.shapes = {Shape::of(2, 4), Shape::scalar()};
    c.sample = [&](Stream& r) {
      std::vector<std::vector<double>> v;
      v.push_back(testutil::random_doubles(r, 8, -1.5, 1.5));
      // keep consecutive samples separated so the max() clamp is inactive
      for (size_t i = 0; i + 1 < 4; ++i) {
        for (int row = 0; row < 2; ++row) {
          double& fa = v[0][row * 4 + i];
          double& fb = v[0][row * 4 + i + 1];
          if (std::abs(fa - fb) < 0.1) fb = fa + (fb >= fa ? 0.1 : -0.1);
        }
      }
      v.push_back({0.5 + 2.0 * r.next_double()});
      return v;
    };
    c.build = [&](TD& t, std::vector<Id> in) {
      return weighted_sum(t, t.neus_alpha(in[0], in[1]), wrng);
    };
    run("neus_alpha", c);
  }
  {
    FdCase c;
    c.shapes = {Shape::of(2, 5)};
    c.sample = [&](Stream& r) {
      return std::vector<std::vector<double>>{testutil::random_doubles(r, 10, 0.05, 0.95)};
    };
    c.build = [&](TD& t, std::vector<Id> in) {
      return weighted_sum(t, t.alpha_composite(in[0]), wrng);
    };
    run("alpha_composite", c);
  }

  CHECK(cases_run >= 100);
}

TEST_CASE("autodiff: 3-layer MLP gradient matches finite differences") {
  Stream rng(5);
  // sigmoid activations keep the network smooth everywhere, so the central
  // difference at step 1e-3 is trustworthy to well below the 1e-4 bound
  const int in_dim = 4, hidden = 8, out_dim = 1;
  FdCase c;
  c.shapes = {Shape::of(in_dim, hidden), Shape::of(hidden),      Shape::of(hidden, hidden),
              Shape::of(hidden),         Shape::of(hidden, out_dim), Shape::of(out_dim)};
  std::vector<double> probe = testutil::random_doubles(rng, 3 * in_dim, -2.0, 2.0);
  c.sample = [&](Stream& r) {
    std::vector<std::vector<double>> v;
    for (const auto& s : c.shapes)
      v.push_back(testutil::random_doubles(r, static_cast<size_t>(s.count()), -0.7, 0.7));
    return v;
  };
  c.build = [&](TD& t, std::vector<Id> in) {
    Id x = t.constant(Shape::of(3, in_dim), probe);
    Id h1 = t.sigmoid(t.add(t.matmul(x, in[0]), in[1]));
    Id h2 = t.sigmoid(t.add(t.matmul(h1, in[2]), in[3]));
    Id out = t.add(t.matmul(h2, in[4]), in[5]);
    return t.sum(t.mul(out, out));
  };
  for (int i = 0; i < 3; ++i) check_fd_case(c, rng, "mlp3");
}

TEST_CASE("autodiff: backward is linear in the loss") {
  Stream rng(9);
  auto xv = testutil::random_doubles(rng, 6, -1.0, 1.0);

  TD joint;
  Id xj = joint.input(Shape::of(6), xv);
  Id la = joint.sum(joint.sigmoid(xj));
  Id lb = joint.sum(joint.mul(xj, xj));
  joint.backward(joint.add(la, lb));
  auto gj = joint.grad(xj);

  TD ta;
  Id xa = ta.input(Shape::of(6), xv);
  ta.backward(ta.sum(ta.sigmoid(xa)));
  TD tb;
  Id xb = tb.input(Shape::of(6), xv);
  tb.backward(tb.sum(tb.mul(xb, xb)));

  for (int i = 0; i < 6; ++i)
    CHECK(std::abs(gj[i] - (ta.grad(xa)[i] + tb.grad(xb)[i])) < 1e-10);
}

TEST_CASE("autodiff: gradients of non-ancestors are zero") {
  TD tape;
  std::vector<double> v{1.0, 2.0};
  Id x = tape.input(Shape::of(2), v);
  Id unrelated = tape.input(Shape::of(2), v);
  tape.backward(tape.sum(tape.mul(x, x)));
  CHECK(tape.grad(unrelated)[0] == 0.0);
  CHECK(tape.grad(unrelated)[1] == 0.0);
}

TEST_CASE("adam: fresh state with zero gradients leaves params unchanged") {
  ParameterSet<double> params;
  params.add("w", Shape::of(3), {1.0, -2.0, 0.5});
  Adam<double> opt;
  std::map<std::string, std::vector<double>> grads{{"w", {0.0, 0.0, 0.0}}};
  opt.step(params, grads);
  CHECK(params.at("w").data[0] == doctest::Approx(1.0));
  CHECK(params.at("w").data[1] == doctest::Approx(-2.0));
  CHECK(params.at("w").data[2] == doctest::Approx(0.5));
}

TEST_CASE("adam: first step magnitude is about lr in the gradient sign direction") {
  ParameterSet<double> params;
  params.add("w", Shape::of(2), {0.0, 0.0});
  Adam<double>::Options opt;
  opt.lr = 1e-3;
  Adam<double> adam(opt);
  std::map<std::string, std::vector<double>> grads{{"w", {0.7, -0.2}}};
  adam.step(params, grads);
  // bias correction gives mhat = g, vhat = g^2, so the update is lr*sign(g)
  CHECK(params.at("w").data[0] == doctest::Approx(-1e-3).epsilon(1e-4));
  CHECK(params.at("w").data[1] == doctest::Approx(1e-3).epsilon(1e-4));
}

TEST_CASE("adam: non-finite gradient is rejected naming the parameter") {
  ParameterSet<double> params;
  params.add("trunk/w0", Shape::of(2), {0.0, 0.0});
  Adam<double> adam;
  std::map<std::string, std::vector<double>> grads{
      {"trunk/w0", {1.0, std::numeric_limits<double>::quiet_NaN()}}};
  try {
    adam.step(params, grads);
    FAIL("expected rejection");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("trunk/w0") != std::string::npos);
    CHECK(params.at("trunk/w0").data[0] == 0.0);
  }
}

TEST_CASE("adam: identical seeded runs give bit-identical trajectories") {
  auto train_once = [] {
    Stream rng(31);
    ParameterSet<float> params;
    params.add("w", Shape::of(4, 1), testutil::random_floats(rng, 4));
    params.add("b", Shape::of(1), testutil::random_floats(rng, 1));
    auto xs = testutil::random_floats(rng, 32);
    Adam<float> adam;
    for (int it = 0; it < 25; ++it) {
      Tape<float> tape;
      auto bound = bind_params(tape, params);
      auto x = tape.constant(Shape::of(8, 4), std::span<const float>(xs));
      auto pred = tape.add(tape.matmul(x, bound.at("w")), bound.at("b"));
      auto err = tape.affine(pred, 1.0, -0.25);
      auto loss = tape.sum(tape.mul(err, err));
      tape.backward(loss);
      adam.step(params, collect_grads(tape, bound));
    }
    return std::make_pair(params.at("w").data, params.at("b").data);
  };
  auto a = train_once();
  auto b = train_once();
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
}

TEST_CASE("checkpoint: json round trip preserves names, shapes, and values") {
  testutil::TempDir dir("fieldray_ckpt");
  Checkpoint ckpt;
  ckpt.kind = "radiance";
  ckpt.meta_json = R"({"note":"fixture"})";
  Stream rng(3);
  ckpt.params.add("trunk/w0", Shape::of(3, 2), testutil::random_floats(rng, 6));
  ckpt.params.add("trunk/b0", Shape::of(2), testutil::random_floats(rng, 2));
  std::string path = dir.str() + "/ckpt.json";
  save_checkpoint(path, ckpt);
  Checkpoint back = load_checkpoint(path);
  CHECK(back.version == 1);
  CHECK(back.kind == "radiance");
  CHECK(back.params.size() == 2);
  CHECK(back.params.at("trunk/w0").shape.dims[0] == 3);
  CHECK(back.params.at("trunk/w0").data == ckpt.params.at("trunk/w0").data);
  CHECK(back.params.at("trunk/b0").data == ckpt.params.at("trunk/b0").data);

  // a file without a version field is rejected
  std::string bad = dir.str() + "/bad.json";
  {
    std::ofstream out(bad);
    out << "{\"params\": {}}";
  }
  CHECK_THROWS_AS(load_checkpoint(bad), Error);
}
