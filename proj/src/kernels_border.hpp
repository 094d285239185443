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

namespace dolly::kernels {

/// Mirror an index about the edge pixels: -1 -> 1, n -> n-2.
inline int mirror_index(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
  }
  return i;
}

/// One convolution output at position `pos` of a line with `n` elements and
/// element stride `stride`, taps accumulated in ascending order. Shared by
/// all backends so border pixels are bit-identical everywhere.
inline float conv_at_mirrored(const float* line, int n, int stride, int pos, const float* k,
                              int taps) {
  const int r = taps / 2;
  float acc = k[0] * line[static_cast<long>(mirror_index(pos - r, n)) * stride];
  for (int j = 1; j < taps; ++j) {
    acc += k[j] * line[static_cast<long>(mirror_index(pos - r + j, n)) * stride];
  }
  return acc;
}

}  // namespace dolly::kernels
