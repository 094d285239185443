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

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "dolly/image.hpp"

namespace dolly {

/// Weights for the loss family. Defaults follow the reference training
/// configuration: alpha = (1, 0.5, 1), omega = (0.2, 1, 5), beta = 1,
/// rho = 20, lambda = 0.5.
struct LossWeights {
  double alpha1 = 1.0, alpha2 = 0.5, alpha3 = 1.0;           // depth terms
  double mu = 1.0, gamma = 1.0;                              // photometric L1 / perceptual
  double omega_all = 0.2, omega_face = 1.0, omega_missing = 5.0;
  double beta = 1.0, rho = 20.0;                             // adversarial / mask weights
  double lambda = 0.5;                                       // translation-loss IoU weight
};

/// Optional perceptual metric plugged in from outside; when absent the
/// gamma term contributes nothing.
using PerceptualHook =
    std::function<double(const Image& a, const Image& b, const Image& region_mask)>;

double depth_loss(const DepthMap& d_pred, const DepthMap& d_gt, const Image& mask,
                  const LossWeights& w);

/// Sum over strides {1,2,4,8} of the mean per-pixel |grad_x| + |grad_y| of
/// the masked depth error, forward differences normalized by the stride.
double multiscale_gradient_loss(const DepthMap& d_pred, const DepthMap& d_gt,
                                const Image& mask);

struct RegionMasks {
  Image all;
  Image face;
  Image missing;
};

double photometric_loss(const Image& i_g, const Image& i_t, const RegionMasks& regions,
                        const LossWeights& w, const PerceptualHook& hook = {},
                        bool* empty_region_warning = nullptr);

struct DiscriminatorResponse {
  Image score_map;
  Image feature_map;
};

/// E[D_f(fake) - D_f(real)] - E[D(fake)], element means.
double generator_gan_loss(const DiscriminatorResponse& d_fake,
                          const DiscriminatorResponse& d_real);

/// E[max(0, 1 + D(fake))] + E[max(0, 1 - D(real))].
double discriminator_hinge_loss(const Image& d_fake_scores, const Image& d_real_scores);

/// Mean binary cross-entropy; predictions clamped to [1e-7, 1 - 1e-7],
/// targets thresholded at 0.5.
double mask_bce_loss(const Image& m_g, const Image& m_t);

struct LossParts {
  double depth = 0.0;
  double photo = 0.0;
  double gan = 0.0;
  double mask = 0.0;
};

struct LossToggles {
  bool depth_enabled = true;
};

/// depth + photo + beta*gan + rho*mask, honoring the stage toggles.
double overall_loss(const LossParts& parts, const LossWeights& w, const LossToggles& toggles);

/// 10*log10(1/MSE) for [0,1] images; +infinity when the images are equal.
double psnr(const Image& a, const Image& b);

/// PSNR with the mean squared error restricted to mask >= 0.5 pixels.
double psnr_masked(const Image& a, const Image& b, const Image& mask);

/// Mean local SSIM, 11x11 Gaussian window sigma 1.5, K1 = 0.01, K2 = 0.03,
/// dynamic range 1; RGB converted to luma (0.299/0.587/0.114). Computed in
/// double precision over the valid (fully windowed) region.
double ssim(const Image& a, const Image& b);

struct LandmarkSet {
  std::vector<Eigen::Vector2d> points;
};

/// Least-squares similarity alignment of pred onto ref, then the mean
/// Euclidean residual divided by the image side length.
double landmark_error(const LandmarkSet& lm_pred, const LandmarkSet& lm_ref,
                      double image_size);

}  // namespace dolly
