/*
Copyright 2026 The Dolly Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS-IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#pragma once

#include <cstddef>
#include <cstdint>

namespace dolly::kernels {

struct MaskedSum {
  double sum = 0.0;
  size_t count = 0;
};

/// Flat-span arithmetic kernels used by the image pipeline. Each entry has
/// a scalar reference implementation and (on x86-64) an AVX2 variant.
/// Map-style kernels (lerp, mul, threshold, conv_*) evaluate each output
/// element with the same operation order in every variant, so their results
/// are bit-identical across backends. Reduction kernels accumulate in double
/// but in lane order, so variants agree only to ~1e-12 relative error.
struct Kernels {
  const char* name;

  /// out[i] = t[i]*a[i] + (1 - t[i])*b[i]
  void (*lerp)(const float* a, const float* b, const float* t, float* out, size_t n);

  /// out[i] = a[i]*b[i]
  void (*mul)(const float* a, const float* b, float* out, size_t n);

  /// Horizontal/vertical 1-D convolution of a single plane with an odd-length
  /// kernel, borders mirrored about the edge pixel (-1 -> 1, w -> w-2).
  /// Taps are accumulated in ascending order.
  void (*conv_h)(const float* in, float* out, int w, int h, const float* k, int taps);
  void (*conv_v)(const float* in, float* out, int w, int h, const float* k, int taps);

  double (*sum)(const float* x, size_t n);
  double (*sum_abs_diff)(const float* a, const float* b, size_t n);
  double (*sum_sq_diff)(const float* a, const float* b, size_t n);
  MaskedSum (*sum_abs_diff_masked)(const float* a, const float* b, const uint8_t* m, size_t n);

  /// out[i] = in[i] >= thr ? 1 : 0 (NaN compares false)
  void (*threshold)(const float* in, uint8_t* out, size_t n, float thr);

  /// Intersection / union counters over {0,1} masks.
  void (*count_and_or)(const uint8_t* a, const uint8_t* b, size_t n, size_t* n_and, size_t* n_or);
};

enum class Backend { auto_detect, scalar, avx2 };

const Kernels& scalar_table();
const Kernels* avx2_table();  // nullptr when not compiled in or unsupported by the CPU

/// Active table. First use resolves Backend::auto_detect from CPU features;
/// the DOLLY_KERNELS environment variable ("scalar"/"avx2") overrides.
const Kernels& active();

/// Force a backend (used by the equivalence tests). Returns false if the
/// requested backend is unavailable, leaving the selection unchanged.
bool select(Backend b);

}  // namespace dolly::kernels
