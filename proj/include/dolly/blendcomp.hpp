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

#include <utility>
#include <vector>

#include "dolly/image.hpp"
#include "dolly/warp.hpp"

namespace dolly {

enum class PyramidKind { gaussian, laplacian };

/// Level 0 is full resolution; each next level is half size (rounded up).
/// Laplacian pyramids store residuals, so upsample-and-add from the
/// coarsest level reproduces the source within float rounding.
struct ImagePyramid {
  std::vector<Image> levels;
  PyramidKind kind = PyramidKind::gaussian;
};

/// Blur with the 5-tap binomial kernel and keep every second sample.
Image pyr_down(const Image& img);
/// Zero-stuff to the given size and blur with the doubled binomial kernel.
Image pyr_up(const Image& img, int out_w, int out_h);

ImagePyramid gaussian_pyramid(const Image& img, int n_levels);
ImagePyramid laplacian_pyramid(const Image& img, int n_levels);
Image reconstruct(const ImagePyramid& pyramid);

/// Laplacian blend: per level G_mask*L_a + (1-G_mask)*L_b, collapsed and
/// clamped to [0,1]. mask == 1 selects a.
Image blend(const Image& a, const Image& b, const Image& mask, int n_levels);

/// Gaussian filtering with reflect borders; sigma = 0 is the identity.
Image smooth_mask(const Image& mask, double sigma);

/// Binary dilation with a disc structuring element (dx^2+dy^2 <= r^2);
/// input thresholded at 0.5 first.
Image dilate_mask(const Image& mask, int radius);
/// Binary erosion with the same disc (dual of dilate_mask).
Image erode_mask(const Image& mask, int radius);

struct CompositeInputs {
  Image fg_blended;     // I_bl
  Image bg_inpainted;   // I_bg
  Image mask_smoothed;  // m_s in [0,1]
};

/// I_f = (1-m_s)*I_bg + m_s*I_bl, exact per pixel.
Image compose(const CompositeInputs& c);

struct FillResult {
  Image image;
  Image filled_mask;      // 1 where the pixel was synthesized
  bool all_missing = false;  // warning: zero coverage everywhere
};

/// Pull-push hole filling: pixels with coverage below the threshold are
/// filled from a coverage-weighted image pyramid; covered pixels are
/// returned untouched.
FillResult naive_fill(const Image& image, const Image& coverage, float coverage_threshold);
FillResult naive_fill(const WarpedBundle& bundle, float coverage_threshold);

}  // namespace dolly
