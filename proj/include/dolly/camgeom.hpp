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
#include <utility>

#include "dolly/error.hpp"
#include "dolly/image.hpp"

namespace dolly {

// Coordinate convention: right-handed camera frame, +Z into the scene,
// +X right, +Y down (image row/col growth). Units are meters everywhere.
// Continuous pixel coordinates coincide with integer sample indices (the
// sample at column u, row v sits at exactly (u, v)).

struct Pixel {
  double u = 0.0;
  double v = 0.0;
};

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Eigen::Vector3d vec() const { return {x, y, z}; }
  static Point3 from(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }
};

/// Pinhole intrinsics: focal length and principal point, both in pixels.
struct CameraIntrinsics {
  double f = 0.0;
  double cx = 0.0;
  double cy = 0.0;

  bool valid() const {
    return f > 0.0 && std::isfinite(f) && std::isfinite(cx) && std::isfinite(cy);
  }
};

/// Rotation + translation mapping points between camera frames:
/// apply(p) = r*p + t. Factory functions validate orthonormality.
class RigidTransform {
 public:
  RigidTransform() : r_(Eigen::Matrix3d::Identity()), t_(Eigen::Vector3d::Zero()) {}

  static RigidTransform identity() { return {}; }
  /// Throws invalid-input unless r is a proper rotation (within 1e-9).
  static RigidTransform from(const Eigen::Matrix3d& r, const Eigen::Vector3d& t);
  static RigidTransform translation(const Eigen::Vector3d& t);

  const Eigen::Matrix3d& rotation() const { return r_; }
  const Eigen::Vector3d& translation_vec() const { return t_; }

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return r_ * p + t_; }
  Point3 apply(const Point3& p) const { return Point3::from(apply(p.vec())); }

  /// this ∘ other: applies `other` first.
  RigidTransform compose(const RigidTransform& other) const;
  RigidTransform inverse() const;

 private:
  RigidTransform(const Eigen::Matrix3d& r, const Eigen::Vector3d& t) : r_(r), t_(t) {}
  Eigen::Matrix3d r_;
  Eigen::Vector3d t_;
};

/// Back-projects a pixel at known depth: (d*(u-cx)/f, d*(v-cy)/f, d).
Point3 unproject(const Pixel& p, double depth, const CameraIntrinsics& k);

/// Projects a camera-frame point; returns the pixel and its depth (z).
/// Throws degenerate-geometry when z <= 0 (behind the camera).
std::pair<Pixel, double> project(const Point3& q, const CameraIntrinsics& k);

/// project(m.apply(unproject(p, d, k1)), k2).
std::pair<Pixel, double> reproject_pixel(const Pixel& p, double depth,
                                         const CameraIntrinsics& k1,
                                         const CameraIntrinsics& k2,
                                         const RigidTransform& m);

/// Focal length that keeps subject scale when pulling back: f1*(z_ref+t_z)/z_ref.
double scaled_focal(double f1, double z_ref, double t_z);

/// Compensating Y-rotation for a horizontal camera shift t_x such that the
/// anchor (given in the straight-back camera frame) keeps its u-coordinate:
/// theta = atan(-t_x*Z / (Z^2 + X^2 - t_x*X)).
double compute_theta(double t_x, const Point3& anchor_c2);

/// Y-rotation by theta with translation [t_x, 0, 0]; this is the pose of the
/// shifted camera expressed in the straight-back frame. Warping applies its
/// inverse to points.
RigidTransform make_hzt_transform(double t_x, double theta);

/// Full camera move: straight back by t_z, then sideways by t_x with the
/// compensating rotation. Maps source-frame points to the new camera frame.
/// The anchor is given in the source (input camera) frame.
RigidTransform compose_camera_move(double t_z, double t_x, const Point3& anchor_c1);

/// Anchor pixel on the face boundary per the side of the image the subject
/// is nearer to (left boundary on ties), with its unprojected 3D point.
/// Foreground = mask >= mask_threshold with valid depth.
std::pair<Pixel, Point3> select_anchor_pixel(const Image& mask, const DepthMap& depth,
                                             const CameraIntrinsics& k,
                                             float mask_threshold = 0.5f);

/// Median of valid foreground depths (upper median for even counts).
double median_foreground_depth(const Image& mask, const DepthMap& depth,
                               float mask_threshold = 0.5f);

}  // namespace dolly
