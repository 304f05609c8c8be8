// Copyright (c) 2026 The fieldray Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

namespace fieldray {

// Hot inner loops used by the float tape. Two implementations ship: a
// scalar reference and a vectorized variant; one is selected at runtime
// (see active_kernels). Shapes are row-major.
//
//   gemm_nn: C[M,N] (+)= A[M,K] * B[K,N]
//   gemm_nt: C[M,N] (+)= A[M,K] * B[N,K]^T
//   gemm_tn: C[M,N] (+)= A[K,M]^T * B[K,N]
struct Kernels {
  const char* name;
  void (*gemm_nn)(float* c, const float* a, const float* b, int m, int k, int n, bool accumulate);
  void (*gemm_nt)(float* c, const float* a, const float* b, int m, int k, int n, bool accumulate);
  void (*gemm_tn)(float* c, const float* a, const float* b, int m, int k, int n, bool accumulate);
  void (*relu_fwd)(float* y, const float* x, int64_t n);
  // dx += dy where x > 0
  void (*relu_bwd_acc)(float* dx, const float* x, const float* dy, int64_t n);
  void (*ew_add)(float* y, const float* a, const float* b, int64_t n);
  void (*ew_mul)(float* y, const float* a, const float* b, int64_t n);
  // y += s * x
  void (*axpy)(float* y, float s, const float* x, int64_t n);
  // Bias-corrected Adam over one parameter array; corr1/corr2 are
  // 1/(1 - beta^t) for the current step.
  void (*adam_update)(float* p, float* m, float* v, const float* g, int64_t n, float lr,
                      float beta1, float beta2, float eps, float corr1, float corr2);
  double (*sum_f64)(const float* x, int64_t n);
};

const Kernels& scalar_kernels();
const Kernels& simd_kernels();  // falls back to scalar when unavailable
bool simd_supported();

// Selection: FIELDRAY_KERNELS=scalar|simd|auto (default auto). Resolved
// once per process; "simd" on unsupported hardware raises Error{"config"}.
const Kernels& active_kernels();

}  // namespace fieldray
