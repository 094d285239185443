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

#include "dolly/warp.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <thread>

namespace dolly {

AttributedPointCloud build_point_cloud(const Image& image, const DepthMap& depth,
                                       const Image& mask, const CameraIntrinsics& k,
                                       float mask_threshold) {
  if (image.width() != depth.width() || image.height() != depth.height() ||
      !mask.same_size(image))
    fail_invalid("build_point_cloud: dimension mismatch");
  if (!k.valid()) fail_invalid("build_point_cloud: bad intrinsics");

  AttributedPointCloud cloud;
  cloud.channels = image.channels();
  const int w = image.width(), h = image.height();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (mask.at(x, y, 0) < mask_threshold || !depth.valid(x, y)) continue;
      cloud.points.push_back(
          unproject(Pixel{static_cast<double>(x), static_cast<double>(y)}, depth.z(x, y), k));
      for (int c = 0; c < image.channels(); ++c) cloud.attributes.push_back(image.at(x, y, c));
      cloud.source_pixel.push_back(y * w + x);
    }
  }
  return cloud;
}

namespace {

struct ProjectedPoint {
  double u, v, z;
  int x0, x1, y0, y1;  // in-bounds footprint, inclusive; empty if x1 < x0 or y1 < y0
  bool in_front;
};

void run_banded(int bands, int threads, const std::function<void(int)>& body) {
  if (threads <= 1 || bands <= 1) {
    for (int b = 0; b < bands; ++b) body(b);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  const int workers = std::min(threads, bands);
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&]() {
      for (int b = next.fetch_add(1); b < bands; b = next.fetch_add(1)) body(b);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

WarpedBundle splat(const AttributedPointCloud& cloud, const CameraIntrinsics& k2,
                   const RigidTransform& m, int out_w, int out_h,
                   const SplatParams& params) {
  if (out_w <= 0 || out_h <= 0) fail_invalid("splat: non-positive output size");
  if (!(params.radius >= 0.5)) fail_invalid("splat: radius must be >= 0.5 px");
  if (!k2.valid()) fail_invalid("splat: bad intrinsics");
  const size_t n = cloud.size();
  if (cloud.attributes.size() != n * static_cast<size_t>(std::max(cloud.channels, 0)) ||
      cloud.source_pixel.size() != n)
    fail_invalid("splat: inconsistent cloud arrays");

  const int ch = cloud.channels;
  WarpedBundle out;
  out.image = Image(out_w, out_h, std::max(ch, 1));
  out.coverage = Image(out_w, out_h, 1);
  out.zbuffer = Image(out_w, out_h, 1);
  if (n == 0) return out;

  const double support = 2.0 * params.radius;

  // Transform + project every point once.
  std::vector<ProjectedPoint> proj(n);
  for (size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d q = m.apply(cloud.points[i].vec());
    ProjectedPoint& pp = proj[i];
    pp.in_front = q.z() > 0.0;
    if (!pp.in_front) {
      ++out.stats.points_behind_camera;
      continue;
    }
    pp.u = k2.f * q.x() / q.z() + k2.cx;
    pp.v = k2.f * q.y() / q.z() + k2.cy;
    pp.z = q.z();
    pp.x0 = std::max(0, static_cast<int>(std::ceil(pp.u - support)));
    pp.x1 = std::min(out_w - 1, static_cast<int>(std::floor(pp.u + support)));
    pp.y0 = std::max(0, static_cast<int>(std::ceil(pp.v - support)));
    pp.y1 = std::min(out_h - 1, static_cast<int>(std::floor(pp.v + support)));
    if (pp.x1 < pp.x0 || pp.y1 < pp.y0) ++out.stats.points_out_of_bounds;
  }

  // Row bands with per-band point lists in canonical (source-pixel) order:
  // accumulation per pixel then happens in a fixed order no matter how the
  // input cloud is permuted or how many threads run.
  const int bands = std::max(1, std::min(params.threads, out_h));
  const int band_rows = (out_h + bands - 1) / bands;
  std::vector<std::vector<int32_t>> band_points(bands);
  for (size_t i = 0; i < n; ++i) {
    const ProjectedPoint& pp = proj[i];
    if (!pp.in_front || pp.x1 < pp.x0 || pp.y1 < pp.y0) continue;
    for (int b = pp.y0 / band_rows; b <= pp.y1 / band_rows; ++b)
      band_points[b].push_back(static_cast<int32_t>(i));
  }
  for (auto& list : band_points) {
    std::sort(list.begin(), list.end(), [&](int32_t a, int32_t b) {
      if (cloud.source_pixel[a] != cloud.source_pixel[b])
        return cloud.source_pixel[a] < cloud.source_pixel[b];
      return proj[a].z < proj[b].z;
    });
  }

  const size_t npx = static_cast<size_t>(out_w) * out_h;
  std::vector<double> zmin(npx, std::numeric_limits<double>::infinity());
  std::vector<double> acc_w(npx, 0.0);
  std::vector<double> acc_attr(npx * static_cast<size_t>(std::max(ch, 1)), 0.0);

  // Footprint weight totals in point order: independent of banding and
  // thread count so the stats stay bit-identical too.
  for (size_t i = 0; i < n; ++i) {
    const ProjectedPoint& pp = proj[i];
    if (!pp.in_front || pp.x1 < pp.x0 || pp.y1 < pp.y0) continue;
    for (int y = pp.y0; y <= pp.y1; ++y) {
      const double wy = 1.0 - std::abs(y - pp.v) / support;
      if (wy <= 0.0) continue;
      for (int x = pp.x0; x <= pp.x1; ++x) {
        const double wx = 1.0 - std::abs(x - pp.u) / support;
        if (wx > 0.0) out.stats.total_weight += wx * wy;
      }
    }
  }

  auto process_band = [&](int b) {
    const int row_begin = b * band_rows;
    const int row_end = std::min(out_h, row_begin + band_rows);
    const auto& list = band_points[b];
    // Pass 1: nearest depth per pixel.
    for (const int32_t i : list) {
      const ProjectedPoint& pp = proj[i];
      for (int y = std::max(pp.y0, row_begin); y <= std::min(pp.y1, row_end - 1); ++y) {
        const double wy = 1.0 - std::abs(y - pp.v) / support;
        if (wy <= 0.0) continue;
        for (int x = pp.x0; x <= pp.x1; ++x) {
          const double wx = 1.0 - std::abs(x - pp.u) / support;
          if (wx <= 0.0) continue;
          double& zm = zmin[static_cast<size_t>(y) * out_w + x];
          zm = std::min(zm, pp.z);
        }
      }
    }
    // Pass 2: accumulate contributions that survive the z test.
    for (const int32_t i : list) {
      const ProjectedPoint& pp = proj[i];
      const float* attr = cloud.attributes.data() + static_cast<size_t>(i) * ch;
      for (int y = std::max(pp.y0, row_begin); y <= std::min(pp.y1, row_end - 1); ++y) {
        const double wy = 1.0 - std::abs(y - pp.v) / support;
        if (wy <= 0.0) continue;
        for (int x = pp.x0; x <= pp.x1; ++x) {
          const double wx = 1.0 - std::abs(x - pp.u) / support;
          if (wx <= 0.0) continue;
          const double w = wx * wy;
          const size_t px = static_cast<size_t>(y) * out_w + x;
          if (pp.z <= zmin[px] + params.z_eps) {
            acc_w[px] += w;
            double* dst = acc_attr.data() + px * static_cast<size_t>(std::max(ch, 1));
            for (int c = 0; c < ch; ++c) dst[c] += w * attr[c];
          }
        }
      }
    }
  };
  run_banded(bands, params.threads, process_band);

  // Surviving weight in pixel-major order; the z test discarded the rest.
  double surviving = 0.0;
  for (size_t px = 0; px < npx; ++px) surviving += acc_w[px];
  out.stats.discarded_weight = out.stats.total_weight - surviving;

  for (size_t px = 0; px < npx; ++px) {
    const double wsum = acc_w[px];
    if (wsum > 0.0) {
      const double* src = acc_attr.data() + px * static_cast<size_t>(std::max(ch, 1));
      for (int c = 0; c < ch; ++c)
        out.image.data()[static_cast<size_t>(c) * npx + px] =
            static_cast<float>(src[c] / wsum);
      out.coverage.data()[px] = static_cast<float>(std::min(1.0, wsum));
      out.zbuffer.data()[px] = static_cast<float>(zmin[px]);
    }
  }
  return out;
}

WarpFrameResult warp_frame(const Image& rgb, const Image* features, const Image& mask,
                           const DepthMap& depth, const CameraIntrinsics& k1,
                           const CameraIntrinsics& k2, const RigidTransform& m,
                           int out_w, int out_h, const SplatParams& params,
                           float mask_threshold) {
  if (features && !features->same_size(rgb))
    fail_invalid("warp_frame: feature map dimension mismatch");

  // One cloud carries [rgb | features | mask] so every output shares the
  // same footprint and z decisions.
  const int fc = features ? features->channels() : 0;
  Image stacked(rgb.width(), rgb.height(), rgb.channels() + fc + 1);
  for (int c = 0; c < rgb.channels(); ++c)
    std::copy_n(rgb.plane(c), rgb.pixels(), stacked.plane(c));
  for (int c = 0; c < fc; ++c)
    std::copy_n(features->plane(c), rgb.pixels(), stacked.plane(rgb.channels() + c));
  std::copy_n(mask.plane(0), rgb.pixels(), stacked.plane(rgb.channels() + fc));

  const AttributedPointCloud cloud =
      build_point_cloud(stacked, depth, mask, k1, mask_threshold);
  WarpedBundle all = splat(cloud, k2, m, out_w, out_h, params);

  WarpFrameResult result;
  const size_t npx = static_cast<size_t>(out_w) * out_h;

  result.rgb.image = Image(out_w, out_h, rgb.channels());
  for (int c = 0; c < rgb.channels(); ++c)
    std::copy_n(all.image.plane(c), npx, result.rgb.image.plane(c));
  result.rgb.coverage = all.coverage;
  result.rgb.zbuffer = all.zbuffer;
  result.rgb.stats = all.stats;

  if (features) {
    WarpedBundle fb;
    fb.image = Image(out_w, out_h, fc);
    for (int c = 0; c < fc; ++c)
      std::copy_n(all.image.plane(rgb.channels() + c), npx, fb.image.plane(c));
    fb.coverage = all.coverage;
    fb.zbuffer = all.zbuffer;
    fb.stats = all.stats;
    result.features = std::move(fb);
  }

  // Warped mask: splatted mask value damped by how completely the pixel was
  // covered; 0 = missing, fractional = partial, 1 = present.
  result.warped_mask = Image(out_w, out_h, 1);
  const float* mv = all.image.plane(rgb.channels() + fc);
  const float* cov = all.coverage.plane(0);
  for (size_t i = 0; i < npx; ++i)
    result.warped_mask.data()[i] = std::clamp(mv[i] * cov[i], 0.0f, 1.0f);
  return result;
}

}  // namespace dolly
