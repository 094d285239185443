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

#include "dolly/camgeom.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace dolly {

RigidTransform RigidTransform::from(const Eigen::Matrix3d& r, const Eigen::Vector3d& t) {
  const double ortho = (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (!(ortho < 1e-9)) fail_invalid("RigidTransform: rotation not orthonormal");
  if (!(std::abs(r.determinant() - 1.0) < 1e-9))
    fail_invalid("RigidTransform: rotation determinant != 1");
  if (!t.allFinite()) fail_invalid("RigidTransform: non-finite translation");
  return RigidTransform(r, t);
}

RigidTransform RigidTransform::translation(const Eigen::Vector3d& t) {
  return RigidTransform(Eigen::Matrix3d::Identity(), t);
}

RigidTransform RigidTransform::compose(const RigidTransform& other) const {
  return RigidTransform(r_ * other.r_, r_ * other.t_ + t_);
}

RigidTransform RigidTransform::inverse() const {
  const Eigen::Matrix3d rt = r_.transpose();
  return RigidTransform(rt, -(rt * t_));
}

Point3 unproject(const Pixel& p, double depth, const CameraIntrinsics& k) {
  if (!k.valid()) fail_invalid("unproject: bad intrinsics");
  if (!(std::isfinite(depth) && depth > 0.0)) fail_invalid("unproject: non-positive depth");
  if (!(std::isfinite(p.u) && std::isfinite(p.v))) fail_invalid("unproject: non-finite pixel");
  return {depth * (p.u - k.cx) / k.f, depth * (p.v - k.cy) / k.f, depth};
}

std::pair<Pixel, double> project(const Point3& q, const CameraIntrinsics& k) {
  if (!k.valid()) fail_invalid("project: bad intrinsics");
  if (!(q.z > 0.0)) fail_geometry("project: point behind camera");
  return {Pixel{k.f * q.x / q.z + k.cx, k.f * q.y / q.z + k.cy}, q.z};
}

std::pair<Pixel, double> reproject_pixel(const Pixel& p, double depth,
                                         const CameraIntrinsics& k1,
                                         const CameraIntrinsics& k2,
                                         const RigidTransform& m) {
  return project(m.apply(unproject(p, depth, k1)), k2);
}

double scaled_focal(double f1, double z_ref, double t_z) {
  if (!(f1 > 0.0)) fail_invalid("scaled_focal: f1 must be positive");
  if (!(z_ref > 0.0)) fail_invalid("scaled_focal: z_ref must be positive");
  if (!(z_ref + t_z > 0.0)) fail_invalid("scaled_focal: z_ref + t_z must be positive");
  return f1 * (z_ref + t_z) / z_ref;
}

double compute_theta(double t_x, const Point3& anchor_c2) {
  if (!(anchor_c2.z > 0.0)) fail_geometry("compute_theta: anchor behind camera");
  const double zz = anchor_c2.z, xx = anchor_c2.x;
  const double denom = zz * zz + xx * xx - t_x * xx;
  if (std::abs(denom) < 1e-12) fail_geometry("compute_theta: degenerate anchor geometry");
  return std::atan(-t_x * zz / denom);
}

RigidTransform make_hzt_transform(double t_x, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  Eigen::Matrix3d r;
  r << c, 0.0, s,  //
      0.0, 1.0, 0.0,  //
      -s, 0.0, c;
  return RigidTransform::from(r, Eigen::Vector3d(t_x, 0.0, 0.0));
}

RigidTransform compose_camera_move(double t_z, double t_x, const Point3& anchor_c1) {
  // Anchor expressed in the straight-back frame.
  const Point3 anchor_c2{anchor_c1.x, anchor_c1.y, anchor_c1.z + t_z};
  const double theta = compute_theta(t_x, anchor_c2);
  const RigidTransform back = RigidTransform::translation({0.0, 0.0, t_z});
  // make_hzt_transform gives the new camera's pose in the straight-back
  // frame; point coordinates move by its inverse.
  return make_hzt_transform(t_x, theta).inverse().compose(back);
}

std::pair<Pixel, Point3> select_anchor_pixel(const Image& mask, const DepthMap& depth,
                                             const CameraIntrinsics& k,
                                             float mask_threshold) {
  if (mask.width() != depth.width() || mask.height() != depth.height())
    fail_invalid("select_anchor_pixel: mask/depth dimension mismatch");
  const int w = mask.width(), h = mask.height();

  auto fg = [&](int x, int y) {
    return mask.at(x, y, 0) >= mask_threshold && depth.valid(x, y);
  };

  int min_x = w, max_x = -1;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (fg(x, y)) {
        min_x = std::min(min_x, x);
        max_x = std::max(max_x, x);
      }
    }
  }
  if (max_x < 0) fail_invalid("select_anchor_pixel: empty foreground");

  // Side whose bounding-box edge is nearer its image edge; ties go left.
  const int left_gap = min_x;
  const int right_gap = (w - 1) - max_x;
  const bool use_left = left_gap <= right_gap;
  const int col = use_left ? min_x : max_x;

  int row_lo = h, row_hi = -1;
  for (int y = 0; y < h; ++y) {
    if (fg(col, y)) {
      row_lo = std::min(row_lo, y);
      row_hi = std::max(row_hi, y);
    }
  }
  const int row = (row_lo + row_hi) / 2;

  // Depth at the boundary pixel, else the nearest valid foreground depth in
  // the same row.
  double d = 0.0;
  if (fg(col, row)) {
    d = depth.z(col, row);
  } else {
    int best_dx = w + 1;
    for (int x = 0; x < w; ++x) {
      if (fg(x, row) && std::abs(x - col) < best_dx) {
        best_dx = std::abs(x - col);
        d = depth.z(x, row);
      }
    }
    if (best_dx > w) fail_invalid("select_anchor_pixel: no valid depth in anchor row");
  }

  const Pixel p{static_cast<double>(col), static_cast<double>(row)};
  return {p, unproject(p, d, k)};
}

double median_foreground_depth(const Image& mask, const DepthMap& depth,
                               float mask_threshold) {
  if (mask.width() != depth.width() || mask.height() != depth.height())
    fail_invalid("median_foreground_depth: mask/depth dimension mismatch");
  std::vector<double> zs;
  zs.reserve(depth.pixels());
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      if (mask.at(x, y, 0) >= mask_threshold && depth.valid(x, y)) zs.push_back(depth.z(x, y));
    }
  }
  if (zs.empty()) fail_invalid("median_foreground_depth: empty foreground");
  const size_t mid = zs.size() / 2;
  std::nth_element(zs.begin(), zs.begin() + mid, zs.end());
  return zs[mid];
}

}  // namespace dolly
