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

#include <array>

#include "dolly/camgeom.hpp"
#include "dolly/image.hpp"
#include "dolly/warp.hpp"

namespace dolly {

inline constexpr int kTranslationBins = 50;
inline constexpr double kTranslationRange = 0.20;  // meters, symmetric

/// 50 equally spaced horizontal translations spanning [-0.20, 0.20] m
/// inclusive (spacing 0.40/49).
struct TranslationBins {
  std::array<double, kTranslationBins> centers;
};

TranslationBins make_bins();

/// Score vector over the bins: soft targets V or predicted logits V-hat.
struct TranslationVector50 {
  std::array<double, kTranslationBins> values{};
};

/// Intersection over union of two masks thresholded at 0.5;
/// empty-over-empty is defined as 1.
double iou(const Image& a, const Image& b);

/// 1 - iou.
double iou_loss(const Image& m_w, const Image& m_t);

/// Soft labels from relative IoU deficits d_j = (max - iou_j)/(1 - max):
/// 1 when d_j <= 0.01, 0.9 when d_j <= 0.02, else 0. When the maximum IoU
/// is exactly 1 the deficit is undefined; bins with IoU 1 get 1, the rest 0.
TranslationVector50 build_target_vector(const std::array<double, kTranslationBins>& ious);

/// Softmax-weighted expectation of the bin centers (max-subtracted softmax).
double decode_translation(const TranslationVector50& v, const TranslationBins& bins);

/// Mean binary cross-entropy of logits v_hat against soft targets v plus
/// lambda times the IoU loss between the warped and target masks.
double hzt_loss(const TranslationVector50& v_hat, const TranslationVector50& v,
                const Image& m_w, const Image& m_t, double lambda);

struct SearchInputs {
  const Image* rgb = nullptr;  // unused by the mask-only scoring, kept for parity
  const DepthMap* depth = nullptr;
  const Image* mask = nullptr;
  CameraIntrinsics k1;
};

struct SearchResult {
  double best_tx = 0.0;
  double theta_at_best = 0.0;
  std::array<double, kTranslationBins> ious{};
  TranslationVector50 target_vector;
  double iou_at_zero = 0.0;
  size_t missing_px_at_0 = 0;
  size_t missing_px_at_best = 0;
};

/// Brute-force search: for every bin (plus the t_x = 0 reference) the input
/// mask is warped to the moved camera and its thresholded coverage is scored
/// with IoU against target_mask. Missing pixels are target pixels the warp
/// left uncovered. Best candidate by IoU; ties prefer smaller |t_x|, then
/// the more negative value. Note: the warped mask m_w is scored here in
/// place of a generator output mask.
SearchResult search_translation(const SearchInputs& inputs, double t_z,
                                const Image& target_mask, const TranslationBins& bins,
                                const SplatParams& splat_params = {},
                                float mask_threshold = 0.5f);

}  // namespace dolly
