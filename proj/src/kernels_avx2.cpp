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

// Compiled with -mavx2 and -ffp-contract=off. No FMA is used anywhere so
// map-style kernels stay bit-identical to the scalar reference.

#include <immintrin.h>

#include <cmath>

#include "dolly/kernels.hpp"
#include "kernels_border.hpp"

namespace dolly::kernels {
namespace {

void lerp_avx2(const float* a, const float* b, const float* t, float* out, size_t n) {
  const __m256 ones = _mm256_set1_ps(1.0f);
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 va = _mm256_loadu_ps(a + i);
    const __m256 vb = _mm256_loadu_ps(b + i);
    const __m256 vt = _mm256_loadu_ps(t + i);
    const __m256 lhs = _mm256_mul_ps(vt, va);
    const __m256 rhs = _mm256_mul_ps(_mm256_sub_ps(ones, vt), vb);
    _mm256_storeu_ps(out + i, _mm256_add_ps(lhs, rhs));
  }
  for (; i < n; ++i) out[i] = t[i] * a[i] + (1.0f - t[i]) * b[i];
}

void mul_avx2(const float* a, const float* b, float* out, size_t n) {
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(out + i, _mm256_mul_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void conv_h_avx2(const float* in, float* out, int w, int h, const float* k, int taps) {
  const int r = taps / 2;
  for (int y = 0; y < h; ++y) {
    const float* row = in + static_cast<size_t>(y) * w;
    float* orow = out + static_cast<size_t>(y) * w;
    int x = 0;
    for (; x < r && x < w; ++x) orow[x] = conv_at_mirrored(row, w, 1, x, k, taps);
    for (; x + 8 <= w - r; x += 8) {
      __m256 acc = _mm256_mul_ps(_mm256_set1_ps(k[0]), _mm256_loadu_ps(row + x - r));
      for (int j = 1; j < taps; ++j) {
        acc = _mm256_add_ps(
            acc, _mm256_mul_ps(_mm256_set1_ps(k[j]), _mm256_loadu_ps(row + x - r + j)));
      }
      _mm256_storeu_ps(orow + x, acc);
    }
    for (; x < w - r; ++x) {
      float acc = k[0] * row[x - r];
      for (int j = 1; j < taps; ++j) acc += k[j] * row[x - r + j];
      orow[x] = acc;
    }
    for (; x < w; ++x) orow[x] = conv_at_mirrored(row, w, 1, x, k, taps);
  }
}

void conv_v_avx2(const float* in, float* out, int w, int h, const float* k, int taps) {
  const int r = taps / 2;
  for (int y = 0; y < h; ++y) {
    float* orow = out + static_cast<size_t>(y) * w;
    if (y >= r && y < h - r) {
      const float* base = in + static_cast<size_t>(y - r) * w;
      int x = 0;
      for (; x + 8 <= w; x += 8) {
        __m256 acc = _mm256_mul_ps(_mm256_set1_ps(k[0]), _mm256_loadu_ps(base + x));
        for (int j = 1; j < taps; ++j) {
          acc = _mm256_add_ps(acc, _mm256_mul_ps(_mm256_set1_ps(k[j]),
                                                 _mm256_loadu_ps(base + static_cast<size_t>(j) * w + x)));
        }
        _mm256_storeu_ps(orow + x, acc);
      }
      for (; x < w; ++x) {
        float acc = k[0] * base[x];
        for (int j = 1; j < taps; ++j) acc += k[j] * base[static_cast<size_t>(j) * w + x];
        orow[x] = acc;
      }
    } else {
      for (int x = 0; x < w; ++x) orow[x] = conv_at_mirrored(in + x, h, w, y, k, taps);
    }
  }
}

// Widens 8 floats to 2x4 doubles and accumulates into two lanesets; the
// horizontal reduction order is fixed, independent of n.
struct DoubleAcc {
  __m256d lo = _mm256_setzero_pd();
  __m256d hi = _mm256_setzero_pd();
  void add(__m256d a, __m256d b) {
    lo = _mm256_add_pd(lo, a);
    hi = _mm256_add_pd(hi, b);
  }
  double total() const {
    const __m256d s = _mm256_add_pd(lo, hi);
    alignas(32) double v[4];
    _mm256_store_pd(v, s);
    return ((v[0] + v[1]) + v[2]) + v[3];
  }
};

inline void widen(__m256 v, __m256d* a, __m256d* b) {
  *a = _mm256_cvtps_pd(_mm256_castps256_ps128(v));
  *b = _mm256_cvtps_pd(_mm256_extractf128_ps(v, 1));
}

double sum_avx2(const float* x, size_t n) {
  DoubleAcc acc;
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256d a, b;
    widen(_mm256_loadu_ps(x + i), &a, &b);
    acc.add(a, b);
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += static_cast<double>(x[i]);
  return acc.total() + tail;
}

double sum_abs_diff_avx2(const float* a, const float* b, size_t n) {
  const __m256d absmask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  DoubleAcc acc;
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256d a0, a1, b0, b1;
    widen(_mm256_loadu_ps(a + i), &a0, &a1);
    widen(_mm256_loadu_ps(b + i), &b0, &b1);
    acc.add(_mm256_and_pd(_mm256_sub_pd(a0, b0), absmask),
            _mm256_and_pd(_mm256_sub_pd(a1, b1), absmask));
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += std::fabs(static_cast<double>(a[i]) - b[i]);
  return acc.total() + tail;
}

double sum_sq_diff_avx2(const float* a, const float* b, size_t n) {
  DoubleAcc acc;
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256d a0, a1, b0, b1;
    widen(_mm256_loadu_ps(a + i), &a0, &a1);
    widen(_mm256_loadu_ps(b + i), &b0, &b1);
    const __m256d d0 = _mm256_sub_pd(a0, b0);
    const __m256d d1 = _mm256_sub_pd(a1, b1);
    acc.add(_mm256_mul_pd(d0, d0), _mm256_mul_pd(d1, d1));
  }
  double tail = 0.0;
  for (; i < n; ++i) {
    const double d = static_cast<double>(a[i]) - b[i];
    tail += d * d;
  }
  return acc.total() + tail;
}

MaskedSum sum_abs_diff_masked_avx2(const float* a, const float* b, const uint8_t* m, size_t n) {
  const __m256d absmask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  DoubleAcc acc;
  size_t count = 0;
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m128i bytes = _mm_loadl_epi64(reinterpret_cast<const __m128i*>(m + i));
    const __m256i m32 = _mm256_cvtepu8_epi32(bytes);
    const __m256i nz = _mm256_cmpgt_epi32(m32, _mm256_setzero_si256());
    const int bits = _mm256_movemask_ps(_mm256_castsi256_ps(nz));
    if (bits == 0) continue;
    count += static_cast<size_t>(__builtin_popcount(static_cast<unsigned>(bits)));
    // 0.0/1.0 gate per lane, widened to double.
    const __m256 gate = _mm256_and_ps(_mm256_castsi256_ps(nz), _mm256_set1_ps(1.0f));
    __m256d g0, g1, a0, a1, b0, b1;
    widen(gate, &g0, &g1);
    widen(_mm256_loadu_ps(a + i), &a0, &a1);
    widen(_mm256_loadu_ps(b + i), &b0, &b1);
    acc.add(_mm256_mul_pd(g0, _mm256_and_pd(_mm256_sub_pd(a0, b0), absmask)),
            _mm256_mul_pd(g1, _mm256_and_pd(_mm256_sub_pd(a1, b1), absmask)));
  }
  double tail = 0.0;
  for (; i < n; ++i) {
    if (m[i]) {
      tail += std::fabs(static_cast<double>(a[i]) - b[i]);
      ++count;
    }
  }
  return MaskedSum{acc.total() + tail, count};
}

void threshold_avx2(const float* in, uint8_t* out, size_t n, float thr) {
  const __m256 vthr = _mm256_set1_ps(thr);
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 cmp = _mm256_cmp_ps(_mm256_loadu_ps(in + i), vthr, _CMP_GE_OQ);
    const int bits = _mm256_movemask_ps(cmp);
    for (int j = 0; j < 8; ++j) out[i + j] = static_cast<uint8_t>((bits >> j) & 1);
  }
  for (; i < n; ++i) out[i] = (in[i] >= thr) ? 1 : 0;
}

void count_and_or_avx2(const uint8_t* a, const uint8_t* b, size_t n, size_t* n_and,
                       size_t* n_or) {
  const __m256i zero = _mm256_setzero_si256();
  const __m256i one = _mm256_set1_epi8(1);
  __m256i acc_and = _mm256_setzero_si256();
  __m256i acc_or = _mm256_setzero_si256();
  size_t na = 0, no = 0;
  size_t i = 0;
  size_t block = 0;  // SAD partial sums stay < 255*32 per lane; flush periodically
  for (; i + 32 <= n; i += 32) {
    const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
    const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
    // normalize arbitrary nonzero bytes to 1
    const __m256i na1 = _mm256_andnot_si256(_mm256_cmpeq_epi8(va, zero), one);
    const __m256i nb1 = _mm256_andnot_si256(_mm256_cmpeq_epi8(vb, zero), one);
    acc_and = _mm256_add_epi64(acc_and, _mm256_sad_epu8(_mm256_and_si256(na1, nb1), zero));
    acc_or = _mm256_add_epi64(acc_or, _mm256_sad_epu8(_mm256_or_si256(na1, nb1), zero));
    if (++block == 1024) {
      alignas(32) long long va4[4], vo4[4];
      _mm256_store_si256(reinterpret_cast<__m256i*>(va4), acc_and);
      _mm256_store_si256(reinterpret_cast<__m256i*>(vo4), acc_or);
      na += static_cast<size_t>(va4[0] + va4[1] + va4[2] + va4[3]);
      no += static_cast<size_t>(vo4[0] + vo4[1] + vo4[2] + vo4[3]);
      acc_and = _mm256_setzero_si256();
      acc_or = _mm256_setzero_si256();
      block = 0;
    }
  }
  alignas(32) long long va4[4], vo4[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(va4), acc_and);
  _mm256_store_si256(reinterpret_cast<__m256i*>(vo4), acc_or);
  na += static_cast<size_t>(va4[0] + va4[1] + va4[2] + va4[3]);
  no += static_cast<size_t>(vo4[0] + vo4[1] + vo4[2] + vo4[3]);
  for (; i < n; ++i) {
    na += (a[i] && b[i]) ? 1 : 0;
    no += (a[i] || b[i]) ? 1 : 0;
  }
  *n_and = na;
  *n_or = no;
}

}  // namespace

const Kernels* avx2_table() {
  if (!__builtin_cpu_supports("avx2")) return nullptr;
  static const Kernels table = {
      "avx2",
      lerp_avx2,
      mul_avx2,
      conv_h_avx2,
      conv_v_avx2,
      sum_avx2,
      sum_abs_diff_avx2,
      sum_sq_diff_avx2,
      sum_abs_diff_masked_avx2,
      threshold_avx2,
      count_and_or_avx2,
  };
  return &table;
}

}  // namespace dolly::kernels
