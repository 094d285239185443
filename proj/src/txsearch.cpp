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

#include "dolly/txsearch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "dolly/kernels.hpp"

namespace dolly {

TranslationBins make_bins() {
  TranslationBins bins;
  const double step = 2.0 * kTranslationRange / (kTranslationBins - 1);
  for (int j = 0; j < kTranslationBins; ++j) bins.centers[j] = -kTranslationRange + step * j;
  return bins;
}

namespace {

std::vector<uint8_t> binarize(const Image& mask) {
  std::vector<uint8_t> bin(mask.pixels());
  kernels::active().threshold(mask.plane(0), bin.data(), mask.pixels(), 0.5f);
  return bin;
}

double iou_binary(const std::vector<uint8_t>& a, const std::vector<uint8_t>& b) {
  size_t n_and = 0, n_or = 0;
  kernels::active().count_and_or(a.data(), b.data(), a.size(), &n_and, &n_or);
  if (n_or == 0) return 1.0;  // empty-over-empty
  return static_cast<double>(n_and) / static_cast<double>(n_or);
}

}  // namespace

double iou(const Image& a, const Image& b) {
  require_same_size(a, b, "iou");
  return iou_binary(binarize(a), binarize(b));
}

double iou_loss(const Image& m_w, const Image& m_t) { return 1.0 - iou(m_w, m_t); }

TranslationVector50 build_target_vector(const std::array<double, kTranslationBins>& ious) {
  for (const double v : ious)
    if (!(v >= 0.0 && v <= 1.0)) fail_invalid("build_target_vector: IoU outside [0,1]");
  const double max_iou = *std::max_element(ious.begin(), ious.end());

  TranslationVector50 v;
  if (max_iou >= 1.0) {
    // The relative deficit is undefined; only the perfect bins score.
    for (int j = 0; j < kTranslationBins; ++j) v.values[j] = (ious[j] >= 1.0) ? 1.0 : 0.0;
    return v;
  }
  for (int j = 0; j < kTranslationBins; ++j) {
    const double delta = (max_iou - ious[j]) / (1.0 - max_iou);
    if (delta <= 0.01)
      v.values[j] = 1.0;
    else if (delta <= 0.02)
      v.values[j] = 0.9;
    else
      v.values[j] = 0.0;
  }
  return v;
}

double decode_translation(const TranslationVector50& v, const TranslationBins& bins) {
  double vmax = -std::numeric_limits<double>::infinity();
  for (const double x : v.values) {
    if (!std::isfinite(x)) fail_invalid("decode_translation: non-finite score");
    vmax = std::max(vmax, x);
  }
  double denom = 0.0;
  std::array<double, kTranslationBins> e;
  for (int j = 0; j < kTranslationBins; ++j) {
    e[j] = std::exp(v.values[j] - vmax);
    denom += e[j];
  }
  double t = 0.0;
  for (int j = 0; j < kTranslationBins; ++j) t += bins.centers[j] * (e[j] / denom);
  return t;
}

double hzt_loss(const TranslationVector50& v_hat, const TranslationVector50& v,
                const Image& m_w, const Image& m_t, double lambda) {
  double bce = 0.0;
  for (int j = 0; j < kTranslationBins; ++j) {
    const double x = v_hat.values[j];
    const double t = v.values[j];
    if (!std::isfinite(x)) fail_invalid("hzt_loss: non-finite logit");
    if (!(t >= 0.0 && t <= 1.0)) fail_invalid("hzt_loss: target outside [0,1]");
    // Stable BCE-with-logits for sigmoid(x) against target t.
    bce += std::max(x, 0.0) - x * t + std::log1p(std::exp(-std::abs(x)));
  }
  bce /= kTranslationBins;
  return bce + lambda * iou_loss(m_w, m_t);
}

SearchResult search_translation(const SearchInputs& inputs, double t_z,
                                const Image& target_mask, const TranslationBins& bins,
                                const SplatParams& splat_params, float mask_threshold) {
  if (!inputs.depth || !inputs.mask) fail_invalid("search_translation: missing inputs");
  const DepthMap& depth = *inputs.depth;
  const Image& mask = *inputs.mask;

  const auto [anchor_px, anchor_pt] = select_anchor_pixel(mask, depth, inputs.k1, mask_threshold);
  (void)anchor_px;
  const double z_ref = median_foreground_depth(mask, depth, mask_threshold);
  const CameraIntrinsics k2{scaled_focal(inputs.k1.f, z_ref, t_z), inputs.k1.cx, inputs.k1.cy};

  // The mask is the only attribute that matters for scoring.
  const AttributedPointCloud cloud =
      build_point_cloud(mask, depth, mask, inputs.k1, mask_threshold);
  if (cloud.size() == 0) fail_invalid("search_translation: empty foreground");

  const std::vector<uint8_t> target_bin = binarize(target_mask);
  size_t target_count = 0;
  for (const uint8_t b : target_bin) target_count += b;

  struct Candidate {
    double tx;
    double iou;
    size_t missing;
  };
  auto evaluate = [&](double tx) {
    const RigidTransform move = compose_camera_move(t_z, tx, anchor_pt);
    const WarpedBundle bundle = splat(cloud, k2, move, target_mask.width(),
                                      target_mask.height(), splat_params);
    std::vector<uint8_t> warped_bin(bundle.coverage.pixels());
    kernels::active().threshold(bundle.coverage.plane(0), warped_bin.data(),
                                bundle.coverage.pixels(), 0.5f);
    size_t n_and = 0, n_or = 0;
    kernels::active().count_and_or(target_bin.data(), warped_bin.data(), target_bin.size(),
                                   &n_and, &n_or);
    const double score = (n_or == 0) ? 1.0 : static_cast<double>(n_and) / n_or;
    return Candidate{tx, score, target_count - n_and};
  };

  SearchResult result;
  const Candidate zero = evaluate(0.0);
  result.iou_at_zero = zero.iou;
  result.missing_px_at_0 = zero.missing;

  Candidate best = zero;
  for (int j = 0; j < kTranslationBins; ++j) {
    const Candidate c = evaluate(bins.centers[j]);
    result.ious[j] = c.iou;
    const bool better =
        c.iou > best.iou ||
        (c.iou == best.iou &&
         (std::abs(c.tx) < std::abs(best.tx) ||
          (std::abs(c.tx) == std::abs(best.tx) && c.tx < best.tx)));
    if (better) best = c;
  }
  result.best_tx = best.tx;
  result.missing_px_at_best = best.missing;
  result.target_vector = build_target_vector(result.ious);
  result.theta_at_best =
      compute_theta(best.tx, Point3{anchor_pt.x, anchor_pt.y, anchor_pt.z + t_z});
  return result;
}

}  // namespace dolly
