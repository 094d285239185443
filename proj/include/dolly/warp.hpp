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

#include <cstdint>
#include <optional>
#include <vector>

#include "dolly/camgeom.hpp"
#include "dolly/image.hpp"

namespace dolly {

/// Foreground pixels lifted to 3D with their attribute vectors. Struct of
/// arrays; points[i], attributes[i*channels..] and source_pixel[i] belong
/// together. All points have z > 0.
struct AttributedPointCloud {
  std::vector<Point3> points;
  std::vector<float> attributes;       // size() == points.size() * channels
  std::vector<int32_t> source_pixel;   // row-major index in the source image
  int channels = 0;

  size_t size() const { return points.size(); }
};

struct SplatParams {
  double radius = 0.5;   // tent footprint half-width is 2*radius px
  double z_eps = 0.005;  // meters; z-buffer tolerance
  int threads = 1;
};

struct SplatStats {
  size_t points_behind_camera = 0;
  size_t points_out_of_bounds = 0;
  double total_weight = 0.0;      // in-bounds footprint weight before the z test
  double discarded_weight = 0.0;  // weight dropped by the z test
};

/// Forward-warp result. Pixels with zero coverage hold zeros in `image`
/// and `zbuffer`.
struct WarpedBundle {
  Image image;     // weight-averaged attributes
  Image coverage;  // min(1, surviving weight sum), in [0,1]
  Image zbuffer;   // nearest surviving depth (meters) where coverage > 0
  SplatStats stats;
};

/// One point per pixel with mask >= mask_threshold and valid depth;
/// attributes are copied from the source pixel.
AttributedPointCloud build_point_cloud(const Image& image, const DepthMap& depth,
                                       const Image& mask, const CameraIntrinsics& k,
                                       float mask_threshold = 0.5f);

/// Splats the transformed cloud into an out_w x out_h bundle. Each point
/// deposits a separable tent footprint; per pixel, contributions more than
/// z_eps behind the nearest one are discarded and the rest are
/// weight-averaged. Accumulation happens in source-pixel order, so the
/// result is bit-identical under any point permutation and thread count.
WarpedBundle splat(const AttributedPointCloud& cloud, const CameraIntrinsics& k2,
                   const RigidTransform& m, int out_w, int out_h,
                   const SplatParams& params = {});

struct WarpFrameResult {
  WarpedBundle rgb;
  std::optional<WarpedBundle> features;
  Image warped_mask;  // splatted mask value scaled by coverage, in [0,1]
};

/// Warps RGB, optional feature maps and the mask with one shared cloud and
/// transform so all outputs have identical coverage patterns.
WarpFrameResult warp_frame(const Image& rgb, const Image* features, const Image& mask,
                           const DepthMap& depth, const CameraIntrinsics& k1,
                           const CameraIntrinsics& k2, const RigidTransform& m,
                           int out_w, int out_h, const SplatParams& params = {},
                           float mask_threshold = 0.5f);

}  // namespace dolly
