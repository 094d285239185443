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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstring>
#include <random>

#include "doctest.h"
#include "dolly/fixtures.hpp"
#include "dolly/lossmetrics.hpp"
#include "oracles.hpp"

using namespace dolly;
using namespace dolly::fixtures;

namespace {

const CameraSpec kSmallCam = default_close_camera(160, 120);

// A bare sphere: auxiliary primitives parked far behind the background
// plane so only the head and the plane are visible.
ProceduralScene bare_sphere_scene(double z, double r) {
  ProceduralScene s;
  s.head.center = {0.0, 0.0, z};
  s.head.semi_axes = {r, r, r};
  s.head.rot = Eigen::Matrix3d::Identity();
  s.nose.center = {0.0, 0.0, 50.0};
  s.nose.radius = 0.01;
  s.ears[0] = {{0.0, 0.0, 50.0}, 0.01};
  s.ears[1] = {{0.0, 0.0, 50.0}, 0.01};
  s.torso.center = {0.0, 0.0, 50.0};
  s.torso.semi_axes = {0.01, 0.01, 0.01};
  s.bg_plane_z = 3.0;
  return s;
}

// Independent quadratic intersection used to recheck rendered depth.
bool ellipsoid_depth_oracle(const Ellipsoid& e, const Eigen::Vector3d& o,
                            const Eigen::Vector3d& d, double* t_out) {
  const Eigen::Matrix3d m = e.semi_axes.cwiseInverse().asDiagonal() * e.rot.transpose();
  const Eigen::Vector3d p0 = m * (o - e.center);
  const Eigen::Vector3d pd = m * d;
  const double a = pd.dot(pd), b = 2.0 * p0.dot(pd), c = p0.dot(p0) - 1.0;
  const double disc = b * b - 4 * a * c;
  if (disc < 0) return false;
  const double t1 = (-b - std::sqrt(disc)) / (2 * a);
  const double t2 = (-b + std::sqrt(disc)) / (2 * a);
  const double t = t1 > 1e-9 ? t1 : t2;
  if (t <= 1e-9) return false;
  *t_out = t;
  return true;
}

bool sphere_depth_oracle(const Sphere& s, const Eigen::Vector3d& o, const Eigen::Vector3d& d,
                         double* t_out) {
  Ellipsoid e;
  e.center = s.center;
  e.semi_axes = {s.radius, s.radius, s.radius};
  e.rot = Eigen::Matrix3d::Identity();
  return ellipsoid_depth_oracle(e, o, d, t_out);
}

double subject_depth_oracle(const ProceduralScene& s, const Eigen::Vector3d& o,
                            const Eigen::Vector3d& d) {
  double best = std::numeric_limits<double>::infinity();
  double t;
  if (ellipsoid_depth_oracle(s.head, o, d, &t)) best = std::min(best, t);
  if (sphere_depth_oracle(s.nose, o, d, &t)) best = std::min(best, t);
  if (sphere_depth_oracle(s.ears[0], o, d, &t)) best = std::min(best, t);
  if (sphere_depth_oracle(s.ears[1], o, d, &t)) best = std::min(best, t);
  if (ellipsoid_depth_oracle(s.torso, o, d, &t)) best = std::min(best, t);
  return best;
}

}  // namespace

TEST_CASE("gen_scene is deterministic and respects ranges") {
  const ProceduralScene a = gen_scene(42);
  const ProceduralScene b = gen_scene(42);
  CHECK(a.head.center == b.head.center);
  CHECK(a.head.semi_axes == b.head.semi_axes);
  CHECK((a.head.rot - b.head.rot).norm() == 0.0);
  CHECK(a.bg_plane_z == b.bg_plane_z);

  const RenderResult ra = render(a, kSmallCam.k, RigidTransform::identity(), 160, 120);
  const RenderResult rb = render(b, kSmallCam.k, RigidTransform::identity(), 160, 120);
  CHECK(std::memcmp(ra.rgb.data(), rb.rgb.data(), ra.rgb.size() * sizeof(float)) == 0);

  double yaw_min = 1e9, yaw_max = -1e9;
  for (uint64_t seed = 0; seed < 100; ++seed) {
    const ProceduralScene s = gen_scene(seed);
    CHECK(s.head.center.z() >= 0.4);
    CHECK(s.head.center.z() <= 0.8);
    // Yaw recovered from the rotation matrix (rot_y * rot_x * rot_z).
    const double yaw = std::atan2(s.head.rot(0, 2), s.head.rot(2, 2));
    yaw_min = std::min(yaw_min, yaw);
    yaw_max = std::max(yaw_max, yaw);
  }
  CHECK(yaw_min < -20.0 * M_PI / 180.0);
  CHECK(yaw_max > 20.0 * M_PI / 180.0);
}

TEST_CASE("render of an on-axis sphere matches the analytic silhouette") {
  const ProceduralScene s = bare_sphere_scene(0.6, 0.1);
  const CameraIntrinsics k{800.0, 320.0, 240.0};
  const RenderResult r = render(s, k, RigidTransform::identity(), 640, 480);

  REQUIRE(r.mask.at(320, 240, 0) == 1.0f);
  CHECK(r.depth.z(320, 240) == doctest::Approx(0.5).epsilon(1e-12));

  // Silhouette half-width in the center row: f*r/sqrt(d^2 - r^2) = 135.22 px
  // -> 271 mask pixels across.
  int count = 0;
  for (int x = 0; x < 640; ++x) count += r.mask.at(x, 240, 0) >= 0.5f;
  const double radius_px = 800.0 * 0.1 / std::sqrt(0.6 * 0.6 - 0.1 * 0.1);
  CHECK(radius_px == doctest::Approx(135.22).epsilon(1e-3));
  CHECK(count == 2 * static_cast<int>(radius_px) + 1);

  // Background: mask 0 and invalid (background) depth.
  CHECK(r.mask.at(5, 5, 0) == 0.0f);
  CHECK_FALSE(r.depth.valid(5, 5));
  CHECK(r.rgb.at(5, 5, 0) >= 0.0f);
}

TEST_CASE("rendered depth matches independent ray recomputation to 1e-9") {
  std::mt19937_64 rng(13);
  for (const uint64_t seed : {1u, 2u, 3u}) {
    const ProceduralScene s = gen_scene(seed);
    const RenderResult r = render(s, kSmallCam.k, RigidTransform::identity(), 160, 120);
    int checked = 0;
    for (int tries = 0; tries < 4000 && checked < 200; ++tries) {
      const int x = static_cast<int>(rng() % 160);
      const int y = static_cast<int>(rng() % 120);
      if (!r.depth.valid(x, y)) continue;
      const Eigen::Vector3d dir((x - kSmallCam.k.cx) / kSmallCam.k.f,
                                (y - kSmallCam.k.cy) / kSmallCam.k.f, 1.0);
      const double expect = subject_depth_oracle(s, Eigen::Vector3d::Zero(), dir);
      CHECK(std::abs(r.depth.z(x, y) - expect) < 1e-9);
      ++checked;
    }
    CHECK(checked == 200);
  }
}

TEST_CASE("render is deterministic across thread counts") {
  const ProceduralScene s = gen_scene(5);
  const RenderResult r1 = render(s, kSmallCam.k, RigidTransform::identity(), 160, 120, 1);
  const RenderResult r4 = render(s, kSmallCam.k, RigidTransform::identity(), 160, 120, 4);
  CHECK(std::memcmp(r1.rgb.data(), r4.rgb.data(), r1.rgb.size() * sizeof(float)) == 0);
  CHECK(r1.depth.values() == r4.depth.values());
}

TEST_CASE("capture_pair applies the 3x distance and zoom rule") {
  SceneParams params;
  params.forced_shift_x = 0.0;
  params.forced_yaw_deg = 10.0;
  const ProceduralScene s = gen_scene(7, params);
  const CapturePair pair = capture_pair(s, kSmallCam, 3.0);

  CHECK(pair.z_ref == s.head.center.z());
  CHECK(pair.t_z == doctest::Approx(2.0 * pair.z_ref).epsilon(1e-15));
  CHECK(pair.far.camera.k.f == 3.0 * kSmallCam.k.f);

  // On-axis subject point: far depth = close depth + t_z.
  const int cx = static_cast<int>(kSmallCam.k.cx), cy = static_cast<int>(kSmallCam.k.cy);
  REQUIRE(pair.close.depth.valid(cx, cy));
  REQUIRE(pair.far.depth.valid(cx, cy));
  CHECK(pair.far.depth.z(cx, cy) ==
        doctest::Approx(pair.close.depth.z(cx, cy) + pair.t_z).epsilon(1e-9));

}

TEST_CASE("zoom compensation preserves the face scale across the pair") {
  // Head-only scene so silhouette heights are clean to measure (the torso
  // may exit the close frame like a real portrait).
  const ProceduralScene s = bare_sphere_scene(0.6, 0.1);
  const CapturePair pair = capture_pair(s, kSmallCam, 3.0);
  auto mask_height = [](const Image& m) {
    int lo = 1 << 30, hi = -1;
    for (int y = 0; y < m.height(); ++y)
      for (int x = 0; x < m.width(); ++x)
        if (m.at(x, y, 0) >= 0.5f) {
          lo = std::min(lo, y);
          hi = std::max(hi, y);
        }
    return hi - lo + 1;
  };
  const double ratio = static_cast<double>(mask_height(pair.close.mask)) /
                       mask_height(pair.far.mask);
  CHECK(ratio > 0.95);
  CHECK(ratio < 1.05);
}

TEST_CASE("capture_pair frustum violation raises a geometry error") {
  SceneParams params;
  params.forced_shift_x = 0.45;  // far outside the close frustum
  const ProceduralScene s = gen_scene(8, params);
  CHECK_THROWS_AS(capture_pair(s, kSmallCam, 3.0), Error);
}

TEST_CASE("close-to-far warp with exact depth reproduces the far render") {
  SceneParams params;
  params.texture = TextureKind::smooth;
  for (const uint64_t seed : {11u, 12u, 13u}) {
    const ProceduralScene s = gen_scene(seed, params);
    const CapturePair pair = capture_pair(s, kSmallCam, 3.0);

    const auto wf = warp_frame(pair.close.rgb, nullptr, pair.close.mask, pair.close.depth,
                               pair.close.camera.k, pair.far.camera.k, pair.far.pose,
                               160, 120);

    // Mutually visible: solidly covered, far foreground, depth agreement.
    double se = 0.0;
    size_t n = 0;
    for (int y = 0; y < 120; ++y)
      for (int x = 0; x < 160; ++x) {
        if (pair.far.mask.at(x, y, 0) < 0.5f) continue;
        if (wf.rgb.coverage.at(x, y, 0) < 0.999f) continue;
        if (!pair.far.depth.valid(x, y)) continue;
        if (std::abs(wf.rgb.zbuffer.at(x, y, 0) - pair.far.depth.z(x, y)) > 0.005) continue;
        for (int c = 0; c < 3; ++c) {
          const double d = wf.rgb.image.at(x, y, c) - pair.far.rgb.at(x, y, c);
          se += d * d;
          ++n;
        }
      }
    REQUIRE(n > 1000);
    const double psnr_db = 10.0 * std::log10(1.0 / (se / n));
    CHECK(psnr_db > 30.0);

    // Per-pixel reprojection: far pixel -> close surface -> back to far.
    const RigidTransform far_to_world = pair.far.pose.inverse();
    std::mt19937_64 rng(seed);
    int checked = 0;
    double worst = 0.0;
    for (int tries = 0; tries < 20000 && checked < 300; ++tries) {
      const int x = static_cast<int>(rng() % 160);
      const int y = static_cast<int>(rng() % 120);
      if (!pair.far.depth.valid(x, y)) continue;
      const Point3 p_far = unproject({static_cast<double>(x), static_cast<double>(y)},
                                     pair.far.depth.z(x, y), pair.far.camera.k);
      const Eigen::Vector3d p_world = far_to_world.apply(p_far.vec());
      // world == close frame
      if (p_world.z() <= 0) continue;
      const auto [pc, zc] = project(Point3::from(p_world), pair.close.camera.k);
      const int x0 = static_cast<int>(std::floor(pc.u)), y0 = static_cast<int>(std::floor(pc.v));
      if (x0 < 0 || y0 < 0 || x0 + 1 >= 160 || y0 + 1 >= 120) continue;
      // All four neighbors valid and smooth: excludes occlusion boundaries.
      if (!pair.close.depth.valid(x0, y0) || !pair.close.depth.valid(x0 + 1, y0) ||
          !pair.close.depth.valid(x0, y0 + 1) || !pair.close.depth.valid(x0 + 1, y0 + 1))
        continue;
      const double z00 = pair.close.depth.z(x0, y0), z10 = pair.close.depth.z(x0 + 1, y0);
      const double z01 = pair.close.depth.z(x0, y0 + 1), z11 = pair.close.depth.z(x0 + 1, y0 + 1);
      const double zmin = std::min({z00, z10, z01, z11});
      const double zmax = std::max({z00, z10, z01, z11});
      if (zmax - zmin > 0.01) continue;
      const double ax = pc.u - x0, ay = pc.v - y0;
      const double z_interp = (1 - ay) * ((1 - ax) * z00 + ax * z10) +
                              ay * ((1 - ax) * z01 + ax * z11);
      if (std::abs(z_interp - zc) > 0.005) continue;  // not mutually visible
      const auto [p_back, zb] =
          reproject_pixel(pc, z_interp, pair.close.camera.k, pair.far.camera.k, pair.far.pose);
      const double err = std::hypot(p_back.u - x, p_back.v - y);
      worst = std::max(worst, err);
      ++checked;
    }
    REQUIRE(checked == 300);
    CHECK(worst < 0.5);
  }
}

TEST_CASE("multiview synthesis at the centre pose is the identity") {
  SceneParams params;
  params.texture = TextureKind::smooth;
  const ProceduralScene s = gen_scene(21, params);
  const CapturePair pair = capture_pair(s, kSmallCam, 3.0, /*with_rear=*/true);
  REQUIRE(pair.rear.has_value());

  const MultiviewTarget target =
      synthesize_multiview_target(*pair.rear, 0.0, pair.t_z, pair.far.camera.k);
  const Capture& centre = (*pair.rear)[kRearCentre];

  size_t compared = 0;
  for (int y = 0; y < 120; ++y)
    for (int x = 0; x < 160; ++x) {
      if (centre.mask.at(x, y, 0) < 0.5f) continue;
      if (target.mask.at(x, y, 0) < 0.5f) continue;
      for (int c = 0; c < 3; ++c)
        CHECK(std::abs(target.rgb.at(x, y, c) - centre.rgb.at(x, y, c)) < 1e-3);
      ++compared;
    }
  CHECK(compared > 500);
}

TEST_CASE("side views fill holes the centre view cannot cover") {
  SceneParams params;
  params.forced_shift_x = -0.06;
  params.forced_yaw_deg = 25.0;
  params.texture = TextureKind::smooth;
  const ProceduralScene s = gen_scene(22, params);
  const CapturePair pair = capture_pair(s, kSmallCam, 3.0, /*with_rear=*/true);
  REQUIRE(pair.rear.has_value());

  const double t_x = -0.1;
  const MultiviewTarget target =
      synthesize_multiview_target(*pair.rear, t_x, pair.t_z, pair.far.camera.k);

  // Centre-only residual: warp just the centre view to the same pose and
  // count its under-covered pixels.
  const Capture& centre = (*pair.rear)[kRearCentre];
  const auto [apx, apt] = select_anchor_pixel(centre.mask, centre.depth, centre.camera.k);
  (void)apx;
  const Eigen::Vector3d anchor_world = centre.pose.inverse().apply(apt.vec());
  const double theta =
      compute_theta(t_x, Point3::from(anchor_world + Eigen::Vector3d(0, 0, pair.t_z)));
  const RigidTransform target_pose =
      make_hzt_transform(t_x, theta).inverse().compose(
          RigidTransform::translation({0, 0, pair.t_z}));
  const RigidTransform rel = target_pose.compose(centre.pose.inverse());
  const auto wf = warp_frame(centre.rgb, nullptr, centre.mask, centre.depth,
                             centre.camera.k, pair.far.camera.k, rel, 160, 120);
  size_t centre_only = 0;
  for (int y = 0; y < 120; ++y)
    for (int x = 0; x < 160; ++x) {
      const float cc = wf.rgb.coverage.at(x, y, 0);
      if (cc > 0.0f && cc < 0.5f) ++centre_only;
    }
  CHECK(target.residual_hole_count < centre_only);
}

TEST_CASE("multiview mask approximates a direct render at the target pose") {
  SceneParams params;
  params.texture = TextureKind::smooth;
  const ProceduralScene s = gen_scene(23, params);
  const CapturePair pair = capture_pair(s, kSmallCam, 3.0, /*with_rear=*/true);
  REQUIRE(pair.rear.has_value());

  const double t_x = 0.02;
  const MultiviewTarget target =
      synthesize_multiview_target(*pair.rear, t_x, pair.t_z, pair.far.camera.k);

  // Oracle available only here: render the scene at the target pose.
  const Capture& centre = (*pair.rear)[kRearCentre];
  const auto [apx, apt] = select_anchor_pixel(centre.mask, centre.depth, centre.camera.k);
  (void)apx;
  const Eigen::Vector3d anchor_world = centre.pose.inverse().apply(apt.vec());
  const double theta =
      compute_theta(t_x, Point3::from(anchor_world + Eigen::Vector3d(0, 0, pair.t_z)));
  const RigidTransform target_pose =
      make_hzt_transform(t_x, theta).inverse().compose(
          RigidTransform::translation({0, 0, pair.t_z}));
  const RenderResult direct = render(s, pair.far.camera.k, target_pose, 160, 120);

  size_t xor_count = 0, union_count = 0;
  for (int y = 0; y < 120; ++y)
    for (int x = 0; x < 160; ++x) {
      const bool a = target.mask.at(x, y, 0) >= 0.5f;
      const bool b = direct.mask.at(x, y, 0) >= 0.5f;
      if (a != b) ++xor_count;
      if (a || b) ++union_count;
    }
  REQUIRE(union_count > 0);
  CHECK(static_cast<double>(xor_count) / union_count < 0.01);
}
