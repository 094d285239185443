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

#include "dolly/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <thread>
#include <vector>

namespace dolly::fixtures {
namespace {

constexpr double kPi = 3.14159265358979323846;

/// Uniform double in [lo, hi) from the standardized mt19937_64 stream;
/// avoids std::uniform_real_distribution, whose output is
/// implementation-defined.
double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + u * (hi - lo);
}

Eigen::Matrix3d rot_y(double a) {
  Eigen::Matrix3d r;
  r << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
  return r;
}
Eigen::Matrix3d rot_x(double a) {
  Eigen::Matrix3d r;
  r << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
  return r;
}
Eigen::Matrix3d rot_z(double a) {
  Eigen::Matrix3d r;
  r << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return r;
}

Eigen::Vector3d eval_albedo(const Material& m, const Eigen::Vector3d& local) {
  if (m.kind == TextureKind::checker) {
    const long ix = static_cast<long>(std::floor(local.x() / m.scale));
    const long iy = static_cast<long>(std::floor(local.y() / m.scale));
    const long iz = static_cast<long>(std::floor(local.z() / m.scale));
    return ((ix + iy + iz) & 1) ? m.color_b : m.color_a;
  }
  const double s = 2.0 * kPi / m.scale;
  const double wave = 0.5 + 0.5 * std::sin(s * local.x()) * std::sin(s * local.y() + 1.3) *
                                std::cos(0.7 * s * local.z());
  return m.color_a + (m.color_b - m.color_a) * wave;
}

struct PrimitiveHit {
  double t = 0.0;
  Eigen::Vector3d normal;
  Eigen::Vector3d local;
};

constexpr double kTMin = 1e-9;

bool intersect_ellipsoid(const Ellipsoid& e, const Eigen::Vector3d& o,
                         const Eigen::Vector3d& d, PrimitiveHit* hit) {
  const Eigen::Vector3d lo = e.rot.transpose() * (o - e.center);
  const Eigen::Vector3d ld = e.rot.transpose() * d;
  const Eigen::Vector3d q = lo.cwiseQuotient(e.semi_axes);
  const Eigen::Vector3d v = ld.cwiseQuotient(e.semi_axes);
  const double a = v.squaredNorm();
  const double b = 2.0 * q.dot(v);
  const double c = q.squaredNorm() - 1.0;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0 || a <= 0.0) return false;
  const double sq = std::sqrt(disc);
  double t = (-b - sq) / (2.0 * a);
  if (t < kTMin) t = (-b + sq) / (2.0 * a);
  if (t < kTMin) return false;
  const Eigen::Vector3d lp = lo + t * ld;
  const Eigen::Vector3d ln = lp.cwiseQuotient(e.semi_axes.cwiseProduct(e.semi_axes));
  hit->t = t;
  hit->normal = (e.rot * ln).normalized();
  hit->local = lp;
  return true;
}

bool intersect_sphere(const Sphere& s, const Eigen::Vector3d& o, const Eigen::Vector3d& d,
                      PrimitiveHit* hit) {
  const Eigen::Vector3d oc = o - s.center;
  const double a = d.squaredNorm();
  const double b = 2.0 * oc.dot(d);
  const double c = oc.squaredNorm() - s.radius * s.radius;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return false;
  const double sq = std::sqrt(disc);
  double t = (-b - sq) / (2.0 * a);
  if (t < kTMin) t = (-b + sq) / (2.0 * a);
  if (t < kTMin) return false;
  const Eigen::Vector3d p = o + t * d;
  hit->t = t;
  hit->normal = (p - s.center).normalized();
  hit->local = p - s.center;
  return true;
}

}  // namespace

bool trace(const ProceduralScene& scene, const Eigen::Vector3d& origin,
           const Eigen::Vector3d& dir, RayHit* hit) {
  double best_t = std::numeric_limits<double>::infinity();
  bool found = false;
  bool subject = false;
  PrimitiveHit ph;
  Eigen::Vector3d albedo{0, 0, 0};
  Eigen::Vector3d normal{0, 0, -1};

  auto consider = [&](bool ok, const PrimitiveHit& h, const Material& m, bool is_subject) {
    if (!ok || h.t >= best_t) return;
    best_t = h.t;
    found = true;
    subject = is_subject;
    normal = h.normal;
    albedo = eval_albedo(m, h.local);
  };

  consider(intersect_ellipsoid(scene.head, origin, dir, &ph), ph, scene.head_mat, true);
  consider(intersect_sphere(scene.nose, origin, dir, &ph), ph, scene.nose_mat, true);
  consider(intersect_sphere(scene.ears[0], origin, dir, &ph), ph, scene.ear_mat, true);
  consider(intersect_sphere(scene.ears[1], origin, dir, &ph), ph, scene.ear_mat, true);
  consider(intersect_ellipsoid(scene.torso, origin, dir, &ph), ph, scene.torso_mat, true);

  // Background plane z = bg_plane_z (world frame).
  if (std::abs(dir.z()) > 1e-15) {
    const double t = (scene.bg_plane_z - origin.z()) / dir.z();
    if (t >= kTMin && t < best_t) {
      PrimitiveHit bh;
      bh.t = t;
      bh.normal = Eigen::Vector3d(0, 0, -1);
      bh.local = origin + t * dir;
      consider(true, bh, scene.bg_mat, false);
    }
  }

  if (!found) return false;
  hit->t = best_t;
  hit->is_subject = subject;
  hit->normal = normal;
  hit->albedo = albedo;
  return true;
}

ProceduralScene gen_scene(uint64_t seed, const SceneParams& params) {
  std::mt19937_64 rng(seed);
  ProceduralScene s;

  const double depth = uniform(rng, params.head_depth_min, params.head_depth_max);
  double shift_x = uniform(rng, -params.head_shift_max, params.head_shift_max);
  const double shift_y = uniform(rng, -0.03, 0.03);
  double yaw = uniform(rng, -params.yaw_max_deg, params.yaw_max_deg) * kPi / 180.0;
  const double pitch = uniform(rng, -params.pitch_max_deg, params.pitch_max_deg) * kPi / 180.0;
  const double roll = uniform(rng, -params.roll_max_deg, params.roll_max_deg) * kPi / 180.0;
  if (params.forced_shift_x) shift_x = *params.forced_shift_x;
  if (params.forced_yaw_deg) yaw = *params.forced_yaw_deg * kPi / 180.0;

  s.head.center = Eigen::Vector3d(shift_x, shift_y, depth);
  s.head.semi_axes = Eigen::Vector3d(uniform(rng, 0.075, 0.09), uniform(rng, 0.10, 0.12),
                                     uniform(rng, 0.085, 0.10));
  s.head.rot = rot_y(yaw) * rot_x(pitch) * rot_z(roll);

  // Nose and ears ride in the head frame.
  const Eigen::Vector3d nose_local(0.0, 0.01, -(s.head.semi_axes.z() + 0.008));
  s.nose.center = s.head.center + s.head.rot * nose_local;
  s.nose.radius = uniform(rng, 0.016, 0.021);

  const double ear_r = uniform(rng, 0.020, 0.026);
  const Eigen::Vector3d earl_local(-(s.head.semi_axes.x() + 0.004), 0.005, 0.01);
  const Eigen::Vector3d earr_local(+(s.head.semi_axes.x() + 0.004), 0.005, 0.01);
  s.ears[0].center = s.head.center + s.head.rot * earl_local;
  s.ears[0].radius = ear_r;
  s.ears[1].center = s.head.center + s.head.rot * earr_local;
  s.ears[1].radius = ear_r;

  s.torso.center = s.head.center + Eigen::Vector3d(0.0, s.head.semi_axes.y() + 0.13, 0.04);
  s.torso.semi_axes = Eigen::Vector3d(uniform(rng, 0.15, 0.18), uniform(rng, 0.13, 0.16),
                                      uniform(rng, 0.09, 0.11));
  s.torso.rot = rot_y(yaw * 0.4);

  s.bg_plane_z = uniform(rng, 2.5, 4.0);
  s.light_dir = Eigen::Vector3d(uniform(rng, -0.5, 0.5), uniform(rng, -0.6, -0.1),
                                uniform(rng, 0.6, 1.0))
                    .normalized();

  const TextureKind kind =
      params.texture ? *params.texture
                     : (uniform(rng, 0.0, 1.0) < 0.5 ? TextureKind::smooth : TextureKind::checker);
  auto pick_colors = [&](Material* m, double scale) {
    m->kind = kind;
    m->color_a = Eigen::Vector3d(uniform(rng, 0.55, 0.9), uniform(rng, 0.45, 0.75),
                                 uniform(rng, 0.35, 0.65));
    m->color_b = m->color_a * uniform(rng, 0.45, 0.7);
    m->scale = scale;
  };
  pick_colors(&s.head_mat, uniform(rng, 0.035, 0.06));
  pick_colors(&s.nose_mat, 0.02);
  pick_colors(&s.ear_mat, 0.02);
  pick_colors(&s.torso_mat, uniform(rng, 0.05, 0.09));
  s.bg_mat.kind = kind;
  s.bg_mat.color_a = Eigen::Vector3d(uniform(rng, 0.15, 0.4), uniform(rng, 0.2, 0.5),
                                     uniform(rng, 0.3, 0.6));
  s.bg_mat.color_b = s.bg_mat.color_a * 0.6;
  s.bg_mat.scale = uniform(rng, 0.25, 0.5);
  return s;
}

CameraSpec default_close_camera(int width, int height) {
  CameraSpec spec;
  spec.k.f = width * 26.0 / 36.0;
  spec.k.cx = width / 2.0;
  spec.k.cy = height / 2.0;
  spec.width = width;
  spec.height = height;
  return spec;
}

RenderResult render(const ProceduralScene& scene, const CameraIntrinsics& k,
                    const RigidTransform& world_to_cam, int width, int height, int threads) {
  if (!k.valid() || width <= 0 || height <= 0) fail_invalid("render: bad camera or size");
  RenderResult out;
  out.rgb = Image(width, height, 3);
  out.depth = DepthMap(width, height);
  out.mask = Image(width, height, 1);

  const RigidTransform cam_to_world = world_to_cam.inverse();
  const Eigen::Vector3d origin = cam_to_world.translation_vec();
  const Eigen::Matrix3d basis = cam_to_world.rotation();

  auto render_rows = [&](int y0, int y1) {
    for (int y = y0; y < y1; ++y) {
      for (int x = 0; x < width; ++x) {
        // Unit-z camera ray: the hit parameter equals the camera z-depth.
        const Eigen::Vector3d dir_cam((x - k.cx) / k.f, (y - k.cy) / k.f, 1.0);
        const Eigen::Vector3d dir = basis * dir_cam;
        RayHit hit;
        if (!trace(scene, origin, dir, &hit)) continue;
        const double lit =
            scene.ambient + scene.diffuse * std::max(0.0, hit.normal.dot(-scene.light_dir));
        for (int c = 0; c < 3; ++c)
          out.rgb.at(x, y, c) =
              static_cast<float>(std::clamp(hit.albedo[c] * lit, 0.0, 1.0));
        if (hit.is_subject) {
          out.mask.at(x, y, 0) = 1.0f;
          out.depth.set(x, y, hit.t);
        }
      }
    }
  };

  const int nthreads = std::clamp(threads, 1, height);
  if (nthreads <= 1) {
    render_rows(0, height);
  } else {
    std::vector<std::thread> pool;
    const int rows = (height + nthreads - 1) / nthreads;
    for (int t = 0; t < nthreads; ++t) {
      const int y0 = t * rows, y1 = std::min(height, y0 + rows);
      if (y0 < y1) pool.emplace_back(render_rows, y0, y1);
    }
    for (auto& th : pool) th.join();
  }
  return out;
}

namespace {

RigidTransform look_at(const Eigen::Vector3d& pos, const Eigen::Vector3d& target) {
  const Eigen::Vector3d z = (target - pos).normalized();
  const Eigen::Vector3d up_world(0.0, -1.0, 0.0);  // +Y points down
  Eigen::Vector3d x = z.cross(up_world);
  if (x.norm() < 1e-12) fail_geometry("look_at: target along the vertical axis");
  x.normalize();
  const Eigen::Vector3d y = z.cross(x);
  Eigen::Matrix3d cam_to_world;
  cam_to_world.col(0) = x;
  cam_to_world.col(1) = y;
  cam_to_world.col(2) = z;
  return RigidTransform::from(cam_to_world.transpose(), -(cam_to_world.transpose() * pos));
}

// The head (the face analogue) must stay inside every frustum; the torso is
// allowed to exit the frame bottom like a real portrait.
void require_head_in_frustum(const ProceduralScene& scene, const CameraSpec& cam,
                             const RigidTransform& pose, const char* which) {
  std::vector<Eigen::Vector3d> pts;
  const Eigen::Vector3d& ax = scene.head.semi_axes;
  for (int i = 0; i < 8; ++i) {
    const Eigen::Vector3d corner(i & 1 ? ax.x() : -ax.x(), i & 2 ? ax.y() : -ax.y(),
                                 i & 4 ? ax.z() : -ax.z());
    pts.push_back(scene.head.center + scene.head.rot * corner);
  }
  pts.push_back(scene.nose.center + Eigen::Vector3d(0, 0, -scene.nose.radius));
  for (const auto& p : pts) {
    const Eigen::Vector3d q = pose.apply(p);
    if (q.z() <= 0.05)
      fail_geometry(std::string("capture_pair: head behind the ") + which + " camera");
    const double u = cam.k.f * q.x() / q.z() + cam.k.cx;
    const double v = cam.k.f * q.y() / q.z() + cam.k.cy;
    if (u < 1.0 || v < 1.0 || u > cam.width - 2.0 || v > cam.height - 2.0)
      fail_geometry(std::string("capture_pair: head leaves the ") + which + " frustum");
  }
}

}  // namespace

CapturePair capture_pair(const ProceduralScene& scene, const CameraSpec& close_cam,
                         double distance_multiplier, bool with_rear, double rig_offset,
                         int threads) {
  if (!(distance_multiplier > 1.0)) fail_invalid("capture_pair: multiplier must exceed 1");
  CapturePair pair;
  pair.z_ref = scene.head.center.z();
  pair.t_z = (distance_multiplier - 1.0) * pair.z_ref;

  pair.close.camera = close_cam;
  pair.close.pose = RigidTransform::identity();
  RenderResult r = render(scene, close_cam.k, pair.close.pose, close_cam.width,
                          close_cam.height, threads);
  pair.close.rgb = std::move(r.rgb);
  pair.close.depth = std::move(r.depth);
  pair.close.mask = std::move(r.mask);
  require_head_in_frustum(scene, close_cam, pair.close.pose, "close");

  CameraSpec far_cam = close_cam;
  far_cam.k.f = close_cam.k.f * distance_multiplier;
  pair.far.camera = far_cam;
  pair.far.pose = RigidTransform::translation({0.0, 0.0, pair.t_z});
  r = render(scene, far_cam.k, pair.far.pose, far_cam.width, far_cam.height, threads);
  pair.far.rgb = std::move(r.rgb);
  pair.far.depth = std::move(r.depth);
  pair.far.mask = std::move(r.mask);
  require_head_in_frustum(scene, far_cam, pair.far.pose, "far");

  if (with_rear) {
    const Eigen::Vector3d centre_pos(0.0, 0.0, -pair.t_z);
    const Eigen::Vector3d target = scene.head.center;
    std::array<Capture, 4> rear;
    const std::array<Eigen::Vector3d, 4> positions = {
        centre_pos + Eigen::Vector3d(-rig_offset, 0, 0),  // left
        centre_pos + Eigen::Vector3d(+rig_offset, 0, 0),  // right
        centre_pos + Eigen::Vector3d(0, -rig_offset, 0),  // top (+Y is down)
        centre_pos,                                       // centre
    };
    const char* names[4] = {"rear-left", "rear-right", "rear-top", "rear-centre"};
    for (int i = 0; i < 4; ++i) {
      rear[i].camera = far_cam;
      rear[i].pose = (i == kRearCentre) ? pair.far.pose : look_at(positions[i], target);
      require_head_in_frustum(scene, far_cam, rear[i].pose, names[i]);
      RenderResult rr =
          render(scene, far_cam.k, rear[i].pose, far_cam.width, far_cam.height, threads);
      rear[i].rgb = std::move(rr.rgb);
      rear[i].depth = std::move(rr.depth);
      rear[i].mask = std::move(rr.mask);
    }
    pair.rear = std::move(rear);
  }
  return pair;
}

MultiviewTarget synthesize_multiview_target(const std::array<Capture, 4>& rear, double t_x,
                                            double t_z, const CameraIntrinsics& k2,
                                            const SplatParams& params) {
  const Capture& centre = rear[kRearCentre];
  const int w = centre.camera.width, h = centre.camera.height;

  // Anchor selected on the centre view, expressed in the straight-back
  // frame of the requested t_z.
  const auto [anchor_px, anchor_centre] =
      select_anchor_pixel(centre.mask, centre.depth, centre.camera.k);
  (void)anchor_px;
  const Eigen::Vector3d anchor_world =
      centre.pose.inverse().apply(anchor_centre.vec());
  const Point3 anchor_c2 = Point3::from(anchor_world + Eigen::Vector3d(0, 0, t_z));
  const double theta = compute_theta(t_x, anchor_c2);
  const RigidTransform target_pose = make_hzt_transform(t_x, theta)
                                         .inverse()
                                         .compose(RigidTransform::translation({0, 0, t_z}));

  // Fill priority: centre, the side nearer the sign of t_x, the other side,
  // then top.
  std::array<int, 4> order;
  if (t_x >= 0.0)
    order = {kRearCentre, kRearRight, kRearLeft, kRearTop};
  else
    order = {kRearCentre, kRearLeft, kRearRight, kRearTop};

  MultiviewTarget out;
  out.rgb = Image(w, h, 3);
  out.mask = Image(w, h, 1);
  out.residual_holes = Image(w, h, 1);

  std::vector<uint8_t> taken(static_cast<size_t>(w) * h, 0);
  Image centre_coverage;
  for (int oi = 0; oi < 4; ++oi) {
    const Capture& view = rear[order[oi]];
    const RigidTransform rel = target_pose.compose(view.pose.inverse());
    const WarpFrameResult wf = warp_frame(view.rgb, nullptr, view.mask, view.depth,
                                          view.camera.k, k2, rel, w, h, params);
    if (order[oi] == kRearCentre) centre_coverage = wf.rgb.coverage;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const size_t i = static_cast<size_t>(y) * w + x;
        if (taken[i] || wf.rgb.coverage.at(x, y, 0) < 0.5f) continue;
        taken[i] = 1;
        for (int c = 0; c < 3; ++c) out.rgb.at(x, y, c) = wf.rgb.image.at(x, y, c);
        out.mask.at(x, y, 0) = 1.0f;
      }
    }
  }

  // Residual holes: centre-view pixels with partial coverage that no view
  // could confidently fill.
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const size_t i = static_cast<size_t>(y) * w + x;
      const float cc = centre_coverage.at(x, y, 0);
      if (!taken[i] && cc > 0.0f && cc < 0.5f) {
        out.residual_holes.at(x, y, 0) = 1.0f;
        ++out.residual_hole_count;
      }
    }
  }
  return out;
}

}  // namespace dolly::fixtures
