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

#include <cmath>

#include "dolly/kernels.hpp"
#include "kernels_border.hpp"

namespace dolly::kernels {
namespace {

void lerp_scalar(const float* a, const float* b, const float* t, float* out, size_t n) {
  for (size_t i = 0; i < n; ++i) {
    out[i] = t[i] * a[i] + (1.0f - t[i]) * b[i];
  }
}

void mul_scalar(const float* a, const float* b, float* out, size_t n) {
  for (size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void conv_h_scalar(const float* in, float* out, int w, int h, const float* k, int taps) {
  const int r = taps / 2;
  for (int y = 0; y < h; ++y) {
    const float* row = in + static_cast<size_t>(y) * w;
    float* orow = out + static_cast<size_t>(y) * w;
    int x = 0;
    for (; x < r && x < w; ++x) orow[x] = conv_at_mirrored(row, w, 1, x, k, taps);
    for (; x < w - r; ++x) {
      float acc = k[0] * row[x - r];
      for (int j = 1; j < taps; ++j) acc += k[j] * row[x - r + j];
      orow[x] = acc;
    }
    for (; x < w; ++x) orow[x] = conv_at_mirrored(row, w, 1, x, k, taps);
  }
}

void conv_v_scalar(const float* in, float* out, int w, int h, const float* k, int taps) {
  const int r = taps / 2;
  for (int y = 0; y < h; ++y) {
    float* orow = out + static_cast<size_t>(y) * w;
    if (y >= r && y < h - r) {
      const float* base = in + static_cast<size_t>(y - r) * w;
      for (int x = 0; x < w; ++x) {
        float acc = k[0] * base[x];
        for (int j = 1; j < taps; ++j) acc += k[j] * base[static_cast<size_t>(j) * w + x];
        orow[x] = acc;
      }
    } else {
      for (int x = 0; x < w; ++x) orow[x] = conv_at_mirrored(in + x, h, w, y, k, taps);
    }
  }
}

double sum_scalar(const float* x, size_t n) {
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) acc += static_cast<double>(x[i]);
  return acc;
}

double sum_abs_diff_scalar(const float* a, const float* b, size_t n) {
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) acc += std::fabs(static_cast<double>(a[i]) - b[i]);
  return acc;
}

double sum_sq_diff_scalar(const float* a, const float* b, size_t n) {
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(a[i]) - b[i];
    acc += d * d;
  }
  return acc;
}

MaskedSum sum_abs_diff_masked_scalar(const float* a, const float* b, const uint8_t* m, size_t n) {
  MaskedSum r;
  for (size_t i = 0; i < n; ++i) {
    if (m[i]) {
      r.sum += std::fabs(static_cast<double>(a[i]) - b[i]);
      ++r.count;
    }
  }
  return r;
}

void threshold_scalar(const float* in, uint8_t* out, size_t n, float thr) {
  for (size_t i = 0; i < n; ++i) out[i] = (in[i] >= thr) ? 1 : 0;
}

void count_and_or_scalar(const uint8_t* a, const uint8_t* b, size_t n, size_t* n_and,
                         size_t* n_or) {
  size_t na = 0, no = 0;
  for (size_t i = 0; i < n; ++i) {
    na += (a[i] & b[i]) ? 1 : 0;
    no += (a[i] | b[i]) ? 1 : 0;
  }
  *n_and = na;
  *n_or = no;
}

}  // namespace

const Kernels& scalar_table() {
  static const Kernels table = {
      "scalar",
      lerp_scalar,
      mul_scalar,
      conv_h_scalar,
      conv_v_scalar,
      sum_scalar,
      sum_abs_diff_scalar,
      sum_sq_diff_scalar,
      sum_abs_diff_masked_scalar,
      threshold_scalar,
      count_and_or_scalar,
  };
  return table;
}

}  // namespace dolly::kernels
