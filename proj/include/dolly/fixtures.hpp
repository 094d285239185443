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
#include <cstdint>
#include <optional>

#include "dolly/camgeom.hpp"
#include "dolly/image.hpp"
#include "dolly/io.hpp"
#include "dolly/warp.hpp"

namespace dolly::fixtures {

/// Analytic RGB-D test scenes: exact depth and silhouettes from primitive
/// ray intersections stand in for a rendered-character dataset. The scene
/// lives in the close camera's frame (+Z into the scene, +Y down).

enum class TextureKind { smooth, checker };

struct Material {
  TextureKind kind = TextureKind::smooth;
  Eigen::Vector3d color_a{0.8, 0.6, 0.5};
  Eigen::Vector3d color_b{0.4, 0.3, 0.25};
  double scale = 0.03;  // texture wavelength / checker pitch in meters
};

struct Ellipsoid {
  Eigen::Vector3d center{0, 0, 0.6};
  Eigen::Vector3d semi_axes{0.08, 0.11, 0.09};
  Eigen::Matrix3d rot = Eigen::Matrix3d::Identity();  // local -> world
};

struct Sphere {
  Eigen::Vector3d center{0, 0, 0.5};
  double radius = 0.02;
};

struct ProceduralScene {
  Ellipsoid head;
  Material head_mat;
  Sphere nose;  // protrudes toward the camera, rides with the head pose
  Material nose_mat;
  std::array<Sphere, 2> ears;  // self-occluded from oblique views
  Material ear_mat;
  Ellipsoid torso;
  Material torso_mat;
  double bg_plane_z = 3.0;
  Material bg_mat;
  Eigen::Vector3d light_dir{0.3, -0.5, 0.8};  // direction light travels, unit
  double ambient = 0.35;
  double diffuse = 0.65;
};

struct SceneParams {
  double head_depth_min = 0.4, head_depth_max = 0.8;
  double head_shift_max = 0.10;   // lateral head offset in meters
  double yaw_max_deg = 35.0;
  double pitch_max_deg = 12.0;
  double roll_max_deg = 8.0;
  std::optional<TextureKind> texture;  // unset: mixed per seed
  std::optional<double> forced_shift_x;  // pins the lateral offset when set
  std::optional<double> forced_yaw_deg;
};

/// Deterministic for a given (seed, params).
ProceduralScene gen_scene(uint64_t seed, const SceneParams& params = {});

/// Selfie-style close camera: a 26mm-equivalent focal length mapped onto a
/// 36mm-wide reference frame, f_px = width * 26/36, principal point at the
/// image center.
CameraSpec default_close_camera(int width, int height);

struct RenderResult {
  Image rgb;
  DepthMap depth;  // valid on subject pixels only, exact z-depth
  Image mask;      // 1 on subject primitives, 0 elsewhere
};

RenderResult render(const ProceduralScene& scene, const CameraIntrinsics& k,
                    const RigidTransform& world_to_cam, int width, int height,
                    int threads = 1);

/// Lowest positive ray parameter against the subject or background, the way
/// render() computes it. Exposed so tests can recompute depth independently
/// per pixel. Returns false when nothing is hit.
struct RayHit {
  double t = 0.0;
  bool is_subject = false;
  Eigen::Vector3d normal{0, 0, -1};
  Eigen::Vector3d albedo{0, 0, 0};
};
bool trace(const ProceduralScene& scene, const Eigen::Vector3d& origin,
           const Eigen::Vector3d& dir, RayHit* hit);

struct Capture {
  Image rgb;
  DepthMap depth;
  Image mask;
  CameraSpec camera;
  RigidTransform pose;  // world (close frame) -> this camera
};

enum RearView { kRearLeft = 0, kRearRight = 1, kRearTop = 2, kRearCentre = 3 };

struct CapturePair {
  Capture close;
  Capture far;
  double z_ref = 0.0;  // head-center depth used as the pull-back reference
  double t_z = 0.0;    // far-camera pull-back distance
  std::optional<std::array<Capture, 4>> rear;  // indexed by RearView
};

/// Far camera pulled straight back so the head-center depth scales by
/// `distance_multiplier`, focal scaled by the same factor. Optional rear rig:
/// left/right offset by +-rig_offset m, top raised by rig_offset, all
/// re-aimed at the head center. Throws when the subject leaves a frustum.
CapturePair capture_pair(const ProceduralScene& scene, const CameraSpec& close_cam,
                         double distance_multiplier = 3.0, bool with_rear = false,
                         double rig_offset = 0.25, int threads = 1);

struct MultiviewTarget {
  Image rgb;
  Image mask;            // union silhouette, binary
  Image residual_holes;  // centre-view pixels no view could confidently fill
  size_t residual_hole_count = 0;
};

/// Ground-truth target at the pose implied by (t_x, theta(t_x), t_z): the
/// rear centre view warped there, holes filled from the side view nearer
/// the sign of t_x, then the other side, then the top view.
MultiviewTarget synthesize_multiview_target(const std::array<Capture, 4>& rear, double t_x,
                                            double t_z, const CameraIntrinsics& k2,
                                            const SplatParams& params = {});

}  // namespace dolly::fixtures
