// Copyright (c) 2026 The fieldray Authors.
// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "fieldray/kernels/kernels.hpp"
#include "fieldray/kernels/reference.hpp"
#include "fieldray/util/rng.hpp"
#include "test_util.hpp"

using namespace fieldray;

namespace {

// Reference result in f64 for a gemm with the given transpose pattern.
std::vector<double> gemm_f64(const std::vector<float>& a, const std::vector<float>& b, int m,
                             int k, int n, char mode) {
  std::vector<double> c(static_cast<size_t>(m) * n, 0.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int p = 0; p < k; ++p) {
        double av = mode == 't' ? a[static_cast<size_t>(p) * m + i]
                                : a[static_cast<size_t>(i) * k + p];
        double bv = mode == 'n' ? b[static_cast<size_t>(p) * n + j]
                                : (mode == 'b' ? b[static_cast<size_t>(j) * k + p]
                                               : b[static_cast<size_t>(p) * n + j]);
        s += av * bv;
      }
      c[static_cast<size_t>(i) * n + j] = s;
    }
  return c;
}

void check_close(const std::vector<float>& got, const std::vector<double>& want, double tol) {
  REQUIRE(got.size() == want.size());
  double scale = 1.0;
  for (double w : want) scale = std::max(scale, std::abs(w));
  for (size_t i = 0; i < got.size(); ++i)
    CHECK(std::abs(static_cast<double>(got[i]) - want[i]) <= tol * scale);
}

}  // namespace

TEST_CASE("kernels: gemm variants match the f64 reference on both backends") {
  Stream rng(42);
  const Kernels* backends[] = {&scalar_kernels(), &simd_kernels()};
  int sizes[][3] = {{1, 1, 1},  {2, 3, 4},   {3, 8, 8},  {7, 5, 9},
                    {8, 64, 3}, {17, 60, 64}, {33, 128, 65}};
  for (const Kernels* k : backends) {
    for (auto [m, kk, n] : sizes) {
      auto a_nn = testutil::random_floats(rng, static_cast<size_t>(m) * kk);
      auto b_nn = testutil::random_floats(rng, static_cast<size_t>(kk) * n);
      std::vector<float> c(static_cast<size_t>(m) * n, 7.0f);
      k->gemm_nn(c.data(), a_nn.data(), b_nn.data(), m, kk, n, false);
      check_close(c, gemm_f64(a_nn, b_nn, m, kk, n, 'n'), 1e-4);

      // accumulate: run twice, expect the doubled result
      k->gemm_nn(c.data(), a_nn.data(), b_nn.data(), m, kk, n, true);
      auto want2 = gemm_f64(a_nn, b_nn, m, kk, n, 'n');
      for (auto& w : want2) w *= 2.0;
      check_close(c, want2, 1e-4);

      auto b_nt = testutil::random_floats(rng, static_cast<size_t>(n) * kk);
      std::vector<float> cnt(static_cast<size_t>(m) * n, 0.0f);
      k->gemm_nt(cnt.data(), a_nn.data(), b_nt.data(), m, kk, n, false);
      check_close(cnt, gemm_f64(a_nn, b_nt, m, kk, n, 'b'), 1e-4);

      auto a_tn = testutil::random_floats(rng, static_cast<size_t>(kk) * m);
      std::vector<float> ctn(static_cast<size_t>(m) * n, 0.0f);
      k->gemm_tn(ctn.data(), a_tn.data(), b_nn.data(), m, kk, n, false);
      check_close(ctn, gemm_f64(a_tn, b_nn, m, kk, n, 't'), 1e-4);
    }
  }
}

TEST_CASE("kernels: elementwise ops agree between backends") {
  Stream rng(7);
  for (int64_t n : {1, 5, 8, 17, 1000}) {
    auto x = testutil::random_floats(rng, static_cast<size_t>(n), -2.0f, 2.0f);
    auto y = testutil::random_floats(rng, static_cast<size_t>(n), -2.0f, 2.0f);

    std::vector<float> r1(n), r2(n);
    scalar_kernels().relu_fwd(r1.data(), x.data(), n);
    simd_kernels().relu_fwd(r2.data(), x.data(), n);
    CHECK(r1 == r2);

    std::vector<float> d1(n, 0.5f), d2(n, 0.5f);
    scalar_kernels().relu_bwd_acc(d1.data(), x.data(), y.data(), n);
    simd_kernels().relu_bwd_acc(d2.data(), x.data(), y.data(), n);
    CHECK(d1 == d2);

    std::vector<float> s1(n), s2(n);
    scalar_kernels().ew_add(s1.data(), x.data(), y.data(), n);
    simd_kernels().ew_add(s2.data(), x.data(), y.data(), n);
    CHECK(s1 == s2);
    scalar_kernels().ew_mul(s1.data(), x.data(), y.data(), n);
    simd_kernels().ew_mul(s2.data(), x.data(), y.data(), n);
    CHECK(s1 == s2);

    std::vector<float> y1 = y, y2 = y;
    scalar_kernels().axpy(y1.data(), 0.25f, x.data(), n);
    simd_kernels().axpy(y2.data(), 0.25f, x.data(), n);
    for (int64_t i = 0; i < n; ++i) CHECK(std::abs(y1[i] - y2[i]) <= 1e-6f);

    double sum_ref = 0.0;
    for (float v : x) sum_ref += v;
    CHECK(scalar_kernels().sum_f64(x.data(), n) == doctest::Approx(sum_ref).epsilon(1e-12));
    CHECK(simd_kernels().sum_f64(x.data(), n) == doctest::Approx(sum_ref).epsilon(1e-12));
  }
}

TEST_CASE("kernels: adam update agrees between backends") {
  Stream rng(11);
  int64_t n = 37;
  auto g = testutil::random_floats(rng, static_cast<size_t>(n));
  std::vector<float> p1 = testutil::random_floats(rng, static_cast<size_t>(n));
  std::vector<float> p2 = p1;
  std::vector<float> m1(n, 0.0f), v1(n, 0.0f), m2(n, 0.0f), v2(n, 0.0f);
  float corr1 = 1.0f / (1.0f - 0.9f);
  float corr2 = 1.0f / (1.0f - 0.999f);
  scalar_kernels().adam_update(p1.data(), m1.data(), v1.data(), g.data(), n, 1e-3f, 0.9f,
                               0.999f, 1e-8f, corr1, corr2);
  simd_kernels().adam_update(p2.data(), m2.data(), v2.data(), g.data(), n, 1e-3f, 0.9f, 0.999f,
                             1e-8f, corr1, corr2);
  for (int64_t i = 0; i < n; ++i) {
    CHECK(std::abs(p1[i] - p2[i]) <= 1e-6f);
    CHECK(std::abs(m1[i] - m2[i]) <= 1e-7f);
    CHECK(std::abs(v1[i] - v2[i]) <= 1e-7f);
  }
}

TEST_CASE("kernels: dispatch selects a valid backend") {
  const Kernels& k = active_kernels();
  std::string name = k.name;
  CHECK((name == "scalar" || name == "simd"));
  if (!simd_supported()) CHECK(name == "scalar");
}
