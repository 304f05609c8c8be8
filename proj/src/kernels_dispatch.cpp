// Copyright (c) 2026 The fieldray Authors.
// SPDX-License-Identifier: Apache-2.0
#include <cstdlib>
#include <string>

#include "fieldray/kernels/kernels.hpp"
#include "fieldray/util/error.hpp"

namespace fieldray {

bool simd_supported() {
#if !defined(FIELDRAY_HAVE_SIMD_TU)
  return false;
#elif defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  // Non-x86 builds compile the simd unit with the baseline vector ISA.
  return true;
#endif
}

const Kernels& active_kernels() {
  static const Kernels* selected = [] {
    const char* env = std::getenv("FIELDRAY_KERNELS");
    std::string mode = env ? env : "auto";
    if (mode == "scalar") return &scalar_kernels();
    if (mode == "simd") {
      if (!simd_supported())
        fail("config", "FIELDRAY_KERNELS=simd but this CPU/build lacks vector support");
      return &simd_kernels();
    }
    if (mode != "auto") fail("config", "FIELDRAY_KERNELS must be scalar, simd, or auto");
    return simd_supported() ? &simd_kernels() : &scalar_kernels();
  }();
  return *selected;
}

}  // namespace fieldray
