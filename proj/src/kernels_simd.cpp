// Copyright (c) 2026 The fieldray Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Vectorized kernel variants built on std::experimental::simd. This
// translation unit is compiled with the target's wide-vector flags (AVX2+FMA
// on x86-64); callers must gate entry through simd_supported().
#include "fieldray/kernels/kernels.hpp"
#include "fieldray/kernels/reference.hpp"

#if defined(FIELDRAY_HAVE_SIMD_TU)
#include <experimental/simd>

namespace stdx = std::experimental;

namespace fieldray {
namespace {

using vf = stdx::native_simd<float>;
constexpr int kW = static_cast<int>(vf::size());

inline vf load(const float* p) { return vf(p, stdx::element_aligned); }
inline void store(vf v, float* p) { v.copy_to(p, stdx::element_aligned); }

// C[M,N] (+)= A[M,K] * B[K,N]. Two output rows per pass, vectorized over N;
// B rows are streamed so each k step is two fused multiply-adds per lane.
void gemm_nn_simd(float* c, const float* a, const float* b, int m, int k, int n,
                  bool accumulate) {
  int i = 0;
  for (; i + 1 < m; i += 2) {
    const float* a0 = a + static_cast<int64_t>(i) * k;
    const float* a1 = a0 + k;
    float* c0 = c + static_cast<int64_t>(i) * n;
    float* c1 = c0 + n;
    int j = 0;
    for (; j + kW <= n; j += kW) {
      vf acc0 = accumulate ? load(c0 + j) : vf(0.0f);
      vf acc1 = accumulate ? load(c1 + j) : vf(0.0f);
      for (int p = 0; p < k; ++p) {
        vf bv = load(b + static_cast<int64_t>(p) * n + j);
        acc0 += vf(a0[p]) * bv;
        acc1 += vf(a1[p]) * bv;
      }
      store(acc0, c0 + j);
      store(acc1, c1 + j);
    }
    for (; j < n; ++j) {
      float s0 = accumulate ? c0[j] : 0.0f;
      float s1 = accumulate ? c1[j] : 0.0f;
      for (int p = 0; p < k; ++p) {
        s0 += a0[p] * b[static_cast<int64_t>(p) * n + j];
        s1 += a1[p] * b[static_cast<int64_t>(p) * n + j];
      }
      c0[j] = s0;
      c1[j] = s1;
    }
  }
  for (; i < m; ++i) {
    const float* a0 = a + static_cast<int64_t>(i) * k;
    float* c0 = c + static_cast<int64_t>(i) * n;
    int j = 0;
    for (; j + kW <= n; j += kW) {
      vf acc0 = accumulate ? load(c0 + j) : vf(0.0f);
      for (int p = 0; p < k; ++p) acc0 += vf(a0[p]) * load(b + static_cast<int64_t>(p) * n + j);
      store(acc0, c0 + j);
    }
    for (; j < n; ++j) {
      float s0 = accumulate ? c0[j] : 0.0f;
      for (int p = 0; p < k; ++p) s0 += a0[p] * b[static_cast<int64_t>(p) * n + j];
      c0[j] = s0;
    }
  }
}

// C[M,N] (+)= A[M,K] * B[N,K]^T: row-by-row dot products, vectorized over K.
void gemm_nt_simd(float* c, const float* a, const float* b, int m, int k, int n,
                  bool accumulate) {
  for (int i = 0; i < m; ++i) {
    const float* ai = a + static_cast<int64_t>(i) * k;
    for (int j = 0; j < n; ++j) {
      const float* bj = b + static_cast<int64_t>(j) * k;
      vf acc(0.0f);
      int p = 0;
      for (; p + kW <= k; p += kW) acc += load(ai + p) * load(bj + p);
      float s = stdx::reduce(acc);
      for (; p < k; ++p) s += ai[p] * bj[p];
      float base = accumulate ? c[static_cast<int64_t>(i) * n + j] : 0.0f;
      c[static_cast<int64_t>(i) * n + j] = base + s;
    }
  }
}

// C[M,N] (+)= A[K,M]^T * B[K,N]: accumulated rank-1 updates, vectorized over N.
void gemm_tn_simd(float* c, const float* a, const float* b, int m, int k, int n,
                  bool accumulate) {
  if (!accumulate) {
    for (int64_t i = 0; i < static_cast<int64_t>(m) * n; ++i) c[i] = 0.0f;
  }
  for (int p = 0; p < k; ++p) {
    const float* ap = a + static_cast<int64_t>(p) * m;
    const float* bp = b + static_cast<int64_t>(p) * n;
    for (int i = 0; i < m; ++i) {
      float* ci = c + static_cast<int64_t>(i) * n;
      vf av(ap[i]);
      int j = 0;
      for (; j + kW <= n; j += kW) store(load(ci + j) + av * load(bp + j), ci + j);
      for (; j < n; ++j) ci[j] += ap[i] * bp[j];
    }
  }
}

void relu_fwd_simd(float* y, const float* x, int64_t n) {
  int64_t i = 0;
  for (; i + kW <= n; i += kW) {
    vf v = load(x + i);
    store(stdx::max(v, vf(0.0f)), y + i);
  }
  for (; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void relu_bwd_acc_simd(float* dx, const float* x, const float* dy, int64_t n) {
  int64_t i = 0;
  for (; i + kW <= n; i += kW) {
    vf v = load(x + i);
    vf add = load(dy + i);
    stdx::where(v <= vf(0.0f), add) = vf(0.0f);
    store(load(dx + i) + add, dx + i);
  }
  for (; i < n; ++i)
    if (x[i] > 0.0f) dx[i] += dy[i];
}

void ew_add_simd(float* y, const float* a, const float* b, int64_t n) {
  int64_t i = 0;
  for (; i + kW <= n; i += kW) store(load(a + i) + load(b + i), y + i);
  for (; i < n; ++i) y[i] = a[i] + b[i];
}

void ew_mul_simd(float* y, const float* a, const float* b, int64_t n) {
  int64_t i = 0;
  for (; i + kW <= n; i += kW) store(load(a + i) * load(b + i), y + i);
  for (; i < n; ++i) y[i] = a[i] * b[i];
}

void axpy_simd(float* y, float s, const float* x, int64_t n) {
  vf sv(s);
  int64_t i = 0;
  for (; i + kW <= n; i += kW) store(load(y + i) + sv * load(x + i), y + i);
  for (; i < n; ++i) y[i] += s * x[i];
}

void adam_update_simd(float* p, float* m, float* v, const float* g, int64_t n, float lr,
                      float beta1, float beta2, float eps, float corr1, float corr2) {
  vf b1(beta1), b2(beta2), ib1(1.0f - beta1), ib2(1.0f - beta2);
  vf c1(corr1), c2(corr2), lrv(lr), epsv(eps);
  int64_t i = 0;
  for (; i + kW <= n; i += kW) {
    vf gv = load(g + i);
    vf mv = b1 * load(m + i) + ib1 * gv;
    vf vv = b2 * load(v + i) + ib2 * gv * gv;
    store(mv, m + i);
    store(vv, v + i);
    vf update = lrv * (mv * c1) / (stdx::sqrt(vv * c2) + epsv);
    store(load(p + i) - update, p + i);
  }
  if (i < n)
    ref::adam_update<float>(p + i, m + i, v + i, g + i, n - i, lr, beta1, beta2, eps, corr1,
                            corr2);
}

double sum_f64_simd(const float* x, int64_t n) { return ref::sum_f64<float>(x, n); }

}  // namespace

const Kernels& simd_kernels() {
  static const Kernels k = {
      "simd",        gemm_nn_simd,  gemm_nt_simd, gemm_tn_simd, relu_fwd_simd,
      relu_bwd_acc_simd, ew_add_simd, ew_mul_simd, axpy_simd,   adam_update_simd,
      sum_f64_simd,
  };
  return k;
}

}  // namespace fieldray

#else  // !FIELDRAY_HAVE_SIMD_TU

namespace fieldray {

const Kernels& simd_kernels() { return scalar_kernels(); }

}  // namespace fieldray

#endif
