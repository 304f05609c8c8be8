// Copyright (c) 2026 The fieldray Authors.
// SPDX-License-Identifier: Apache-2.0
#include "fieldray/kernels/kernels.hpp"
#include "fieldray/kernels/reference.hpp"

namespace fieldray {

const Kernels& scalar_kernels() {
  static const Kernels k = {
      "scalar",         ref::gemm_nn<float>, ref::gemm_nt<float>, ref::gemm_tn<float>,
      ref::relu_fwd<float>, ref::relu_bwd_acc<float>, ref::ew_add<float>, ref::ew_mul<float>,
      ref::axpy<float>, ref::adam_update<float>, ref::sum_f64<float>,
  };
  return k;
}

}  // namespace fieldray
