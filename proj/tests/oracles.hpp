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

// Brute-force reference implementations used only by tests. They stay
// independent of the library code paths they check.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "dolly/camgeom.hpp"
#include "dolly/image.hpp"
#include "dolly/warp.hpp"

namespace oracles {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + u * (hi - lo);
}

// ------------------------------------------------------------- IoU

inline double iou_double_loop(const dolly::Image& a, const dolly::Image& b) {
  size_t inter = 0, uni = 0;
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x) {
      const bool va = a.at(x, y, 0) >= 0.5f;
      const bool vb = b.at(x, y, 0) >= 0.5f;
      if (va && vb) ++inter;
      if (va || vb) ++uni;
    }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

// ------------------------------------------------- disc dilation

inline dolly::Image dilate_double_loop(const dolly::Image& mask, int radius) {
  dolly::Image out(mask.width(), mask.height(), 1);
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x) {
      bool hit = false;
      for (int dy = -radius; dy <= radius && !hit; ++dy)
        for (int dx = -radius; dx <= radius && !hit; ++dx) {
          if (dx * dx + dy * dy > radius * radius) continue;
          const int xx = x + dx, yy = y + dy;
          if (xx < 0 || yy < 0 || xx >= mask.width() || yy >= mask.height()) continue;
          if (mask.at(xx, yy, 0) >= 0.5f) hit = true;
        }
      out.at(x, y, 0) = hit ? 1.0f : 0.0f;
    }
  return out;
}

// ------------------------------------------- brute-force splatter
//
// Gathers every (pixel, point) pair directly: O(n_points * n_pixels).
// Shares only the footprint definition with the library.

struct NaiveSplatResult {
  dolly::Image image;
  dolly::Image coverage;
  double total_weight = 0.0;
  double discarded_weight = 0.0;
  double surviving_weight = 0.0;  // unclamped sum of deposited weight
};

inline NaiveSplatResult splat_naive(const dolly::AttributedPointCloud& cloud,
                                    const dolly::CameraIntrinsics& k2,
                                    const dolly::RigidTransform& m, int out_w, int out_h,
                                    double radius, double z_eps) {
  const double support = 2.0 * radius;
  const int ch = cloud.channels;
  NaiveSplatResult res;
  res.image = dolly::Image(out_w, out_h, ch);
  res.coverage = dolly::Image(out_w, out_h, 1);

  struct P {
    double u, v, z;
    bool ok;
  };
  std::vector<P> proj(cloud.size());
  for (size_t i = 0; i < cloud.size(); ++i) {
    const Eigen::Vector3d q = m.apply(cloud.points[i].vec());
    proj[i].ok = q.z() > 0.0;
    if (!proj[i].ok) continue;
    proj[i].u = k2.f * q.x() / q.z() + k2.cx;
    proj[i].v = k2.f * q.y() / q.z() + k2.cy;
    proj[i].z = q.z();
  }

  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      double zmin = std::numeric_limits<double>::infinity();
      for (size_t i = 0; i < cloud.size(); ++i) {
        if (!proj[i].ok) continue;
        const double wx = 1.0 - std::abs(x - proj[i].u) / support;
        const double wy = 1.0 - std::abs(y - proj[i].v) / support;
        if (wx <= 0.0 || wy <= 0.0) continue;
        zmin = std::min(zmin, proj[i].z);
      }
      double wsum = 0.0;
      std::vector<double> acc(ch, 0.0);
      for (size_t i = 0; i < cloud.size(); ++i) {
        if (!proj[i].ok) continue;
        const double wx = 1.0 - std::abs(x - proj[i].u) / support;
        const double wy = 1.0 - std::abs(y - proj[i].v) / support;
        if (wx <= 0.0 || wy <= 0.0) continue;
        const double w = wx * wy;
        res.total_weight += w;
        if (proj[i].z <= zmin + z_eps) {
          wsum += w;
          for (int c = 0; c < ch; ++c)
            acc[c] += w * cloud.attributes[i * static_cast<size_t>(ch) + c];
        } else {
          res.discarded_weight += w;
        }
      }
      res.surviving_weight += wsum;
      if (wsum > 0.0) {
        for (int c = 0; c < ch; ++c)
          res.image.at(x, y, c) = static_cast<float>(acc[c] / wsum);
        res.coverage.at(x, y, 0) = static_cast<float>(std::min(1.0, wsum));
      }
    }
  }
  return res;
}

// -------------------------------- similarity fit (normal equations)
//
// Least-squares fit of p' = [a -b; b a] p + t by solving the 4x4 normal
// equations directly; independent of the SVD-based path under test.

struct SimilarityFit {
  double a, b, tx, ty;
};

inline SimilarityFit fit_similarity_normal_equations(
    const std::vector<Eigen::Vector2d>& src, const std::vector<Eigen::Vector2d>& dst) {
  Eigen::Matrix4d ata = Eigen::Matrix4d::Zero();
  Eigen::Vector4d atb = Eigen::Vector4d::Zero();
  for (size_t i = 0; i < src.size(); ++i) {
    const double x = src[i].x(), y = src[i].y();
    // Rows: [x, -y, 1, 0] -> dst.x ; [y, x, 0, 1] -> dst.y
    Eigen::Matrix<double, 2, 4> j;
    j << x, -y, 1, 0, y, x, 0, 1;
    ata += j.transpose() * j;
    atb += j.transpose() * dst[i];
  }
  const Eigen::Vector4d sol = ata.ldlt().solve(atb);
  return {sol(0), sol(1), sol(2), sol(3)};
}

inline double landmark_error_oracle(const std::vector<Eigen::Vector2d>& src,
                                    const std::vector<Eigen::Vector2d>& dst,
                                    double image_size) {
  const SimilarityFit f = fit_similarity_normal_equations(src, dst);
  double total = 0.0;
  for (size_t i = 0; i < src.size(); ++i) {
    const Eigen::Vector2d p(f.a * src[i].x() - f.b * src[i].y() + f.tx,
                            f.b * src[i].x() + f.a * src[i].y() + f.ty);
    total += (p - dst[i]).norm();
  }
  return total / static_cast<double>(src.size()) / image_size;
}

}  // namespace oracles
