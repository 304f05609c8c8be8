// Copyright (c) 2026 The fieldray Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>

namespace fieldray::ref {

// Scalar reference kernels, templated so the float dispatch table and the
// double code path share one definition. These are the semantics the
// vectorized variants are tested against.

template <typename T>
void gemm_nn(T* c, const T* a, const T* b, int m, int k, int n, bool accumulate) {
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      double s = accumulate ? static_cast<double>(c[i * n + j]) : 0.0;
      for (int p = 0; p < k; ++p)
        s += static_cast<double>(a[i * k + p]) * static_cast<double>(b[p * n + j]);
      c[i * n + j] = static_cast<T>(s);
    }
  }
}

template <typename T>
void gemm_nt(T* c, const T* a, const T* b, int m, int k, int n, bool accumulate) {
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      double s = accumulate ? static_cast<double>(c[i * n + j]) : 0.0;
      for (int p = 0; p < k; ++p)
        s += static_cast<double>(a[i * k + p]) * static_cast<double>(b[j * k + p]);
      c[i * n + j] = static_cast<T>(s);
    }
  }
}

template <typename T>
void gemm_tn(T* c, const T* a, const T* b, int m, int k, int n, bool accumulate) {
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      double s = accumulate ? static_cast<double>(c[i * n + j]) : 0.0;
      for (int p = 0; p < k; ++p)
        s += static_cast<double>(a[p * m + i]) * static_cast<double>(b[p * n + j]);
      c[i * n + j] = static_cast<T>(s);
    }
  }
}

template <typename T>
void relu_fwd(T* y, const T* x, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
}

template <typename T>
void relu_bwd_acc(T* dx, const T* x, const T* dy, int64_t n) {
  for (int64_t i = 0; i < n; ++i)
    if (x[i] > T(0)) dx[i] += dy[i];
}

template <typename T>
void ew_add(T* y, const T* a, const T* b, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] = a[i] + b[i];
}

template <typename T>
void ew_mul(T* y, const T* a, const T* b, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] = a[i] * b[i];
}

template <typename T>
void axpy(T* y, T s, const T* x, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] += s * x[i];
}

template <typename T>
void adam_update(T* p, T* m, T* v, const T* g, int64_t n, T lr, T beta1, T beta2, T eps,
                 T corr1, T corr2) {
  for (int64_t i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + (T(1) - beta1) * g[i];
    v[i] = beta2 * v[i] + (T(1) - beta2) * g[i] * g[i];
    T mhat = m[i] * corr1;
    T vhat = v[i] * corr2;
    p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

template <typename T>
double sum_f64(const T* x, int64_t n) {
  double s = 0.0;
  for (int64_t i = 0; i < n; ++i) s += static_cast<double>(x[i]);
  return s;
}

}  // namespace fieldray::ref
