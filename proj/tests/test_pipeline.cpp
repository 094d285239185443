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
#include <cstring>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "dolly/fixtures.hpp"
#include "dolly/pipeline.hpp"
#include "oracles.hpp"

using namespace dolly;
using namespace dolly::fixtures;
namespace fs = std::filesystem;

namespace {

const CameraSpec kCam = default_close_camera(320, 240);

RectifyInputs inputs_from_capture(const Capture& c) {
  RectifyInputs in;
  in.rgb = c.rgb;
  in.depth = c.depth;
  in.mask = c.mask;
  in.camera = c.camera;
  return in;
}

bool images_bit_equal(const Image& a, const Image& b) {
  return a.same_shape(b) &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("dolly_pipe_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("identity pipeline reproduces the input foreground") {
  SceneParams params;
  params.texture = TextureKind::smooth;
  params.forced_shift_x = 0.0;
  const ProceduralScene scene = gen_scene(31, params);
  const CapturePair pair = capture_pair(scene, kCam, 3.0);

  RectifyInputs in = inputs_from_capture(pair.close);
  PipelineConfig cfg;
  cfg.tz_auto = false;
  cfg.tz_m = 0.0;
  cfg.tx_mode = TxMode::zero;
  cfg.collect_timings = false;

  RectifyArtifacts art;
  const RunReport report = rectify_run(in, cfg, &art);
  CHECK(report.t_x_m == 0.0);
  CHECK(report.theta_rad == 0.0);
  CHECK(report.f2_px == kCam.k.f);

  // Compare deep inside the foreground, past the mask-feathering band
  // (sigma 3 plus closing), where the composite must be the input.
  const Image eroded = erode_mask(in.mask, 12);
  size_t compared = 0;
  for (int y = 0; y < 240; ++y)
    for (int x = 0; x < 320; ++x) {
      if (eroded.at(x, y, 0) < 0.5f) continue;
      for (int c = 0; c < 3; ++c)
        CHECK(std::abs(art.final_image.at(x, y, c) - in.rgb.at(x, y, c)) < 1e-3);
      ++compared;
    }
  CHECK(compared > 2000);
}

TEST_CASE("3x pull-back reproduces the far render within the face mask") {
  SceneParams params;
  params.texture = TextureKind::smooth;
  for (const uint64_t seed : {33u, 34u}) {
    const ProceduralScene scene = gen_scene(seed, params);
    const CapturePair pair = capture_pair(scene, kCam, 3.0);

    RectifyInputs in = inputs_from_capture(pair.close);
    PipelineConfig cfg;
    cfg.tz_auto = false;
    cfg.tz_m = pair.t_z;
    cfg.tx_mode = TxMode::zero;
    cfg.collect_timings = false;

    RectifyArtifacts art;
    rectify_run(in, cfg, &art);

    // Interior of the ground-truth silhouette; the outer ring belongs to
    // the composition feather.
    const Image region = erode_mask(pair.far.mask, 8);
    const double db = psnr_masked(art.final_image, pair.far.rgb, region);
    CAPTURE(seed);
    CHECK(db > 25.0);
  }
}

TEST_CASE("search mode surfaces the translation profile end to end") {
  SceneParams params;
  params.forced_shift_x = -0.06;
  params.forced_yaw_deg = 25.0;
  params.texture = TextureKind::smooth;
  const ProceduralScene scene = gen_scene(35, params);
  const CapturePair pair = capture_pair(scene, kCam, 3.0);

  RectifyInputs in = inputs_from_capture(pair.close);
  in.target_mask = pair.far.mask;
  PipelineConfig cfg;
  cfg.tz_auto = false;
  cfg.tz_m = pair.t_z;
  cfg.tx_mode = TxMode::search;
  cfg.collect_timings = false;

  RectifyArtifacts art;
  const RunReport report = rectify_run(in, cfg, &art);
  REQUIRE(report.search.has_value());
  CHECK(report.t_x_m == report.search->best_tx);
  CHECK(report.missing_px_at_best <= report.missing_px_at_0);

  // Report JSON carries the search schema.
  const std::string j = report.to_json(make_bins());
  CHECK(j.find("\"bins_m\"") != std::string::npos);
  CHECK(j.find("\"target_vector\"") != std::string::npos);
  CHECK(j.find("\"best_tx_m\"") != std::string::npos);

  // Search without a target mask is an input error.
  RectifyInputs bad = inputs_from_capture(pair.close);
  PipelineConfig bad_cfg = cfg;
  CHECK_THROWS_AS(rectify_run(bad, bad_cfg, nullptr), Error);
}

TEST_CASE("pipeline is deterministic across reruns and thread counts") {
  SceneParams params;
  params.texture = TextureKind::checker;
  const ProceduralScene scene = gen_scene(36, params);
  const CapturePair pair = capture_pair(scene, kCam, 3.0);

  RectifyInputs in = inputs_from_capture(pair.close);
  PipelineConfig cfg;
  cfg.tz_auto = true;
  cfg.tx_mode = TxMode::zero;
  cfg.collect_timings = false;

  RectifyArtifacts a1, a2, a4;
  const RunReport r1 = rectify_run(in, cfg, &a1);
  const RunReport r2 = rectify_run(in, cfg, &a2);
  CHECK(images_bit_equal(a1.final_image, a2.final_image));
  CHECK(r1.to_json(make_bins()) == r2.to_json(make_bins()));

  PipelineConfig cfg4 = cfg;
  cfg4.threads = 4;
  const RunReport r4 = rectify_run(in, cfg4, &a4);
  CHECK(images_bit_equal(a1.final_image, a4.final_image));
  CHECK(r1.to_json(make_bins()) == r4.to_json(make_bins()));
}

TEST_CASE("debug dumps equal a module-level recomputation") {
  TempDir tmp;
  SceneParams params;
  params.texture = TextureKind::smooth;
  const ProceduralScene scene = gen_scene(37, params);
  const CapturePair pair = capture_pair(scene, kCam, 3.0);

  // Materialize the inputs the way a user would supply them.
  write_png8(tmp.file("rgb.png"), pair.close.rgb);
  write_pfm(tmp.file("depth.pfm"), pair.close.depth);
  write_png8(tmp.file("mask.png"), pair.close.mask);
  write_camera_json(tmp.file("cam.json"), pair.close.camera);

  PipelineConfig cfg;
  cfg.rgb_path = tmp.file("rgb.png");
  cfg.depth_path = tmp.file("depth.pfm");
  cfg.mask_path = tmp.file("mask.png");
  cfg.camera_path = tmp.file("cam.json");
  cfg.out_image_path = tmp.file("out.png");
  cfg.report_path = tmp.file("report.json");
  cfg.debug_dir = tmp.file("debug");
  cfg.tz_auto = true;
  cfg.tx_mode = TxMode::zero;
  cfg.collect_timings = false;
  rectify(cfg);

  // Recompute from the same files through the in-memory path.
  RectifyInputs in;
  in.rgb = read_png(cfg.rgb_path);
  in.depth = read_depth_any(cfg.depth_path);
  in.mask = read_png(cfg.mask_path);
  in.camera = read_camera_json(cfg.camera_path);
  RectifyArtifacts art;
  rectify_run(in, cfg, &art);

  CHECK(images_bit_equal(read_tensor(tmp.file("debug/warped_rgb.tensor")),
                         art.warped.rgb.image));
  CHECK(images_bit_equal(read_tensor(tmp.file("debug/coverage.tensor")),
                         art.warped.rgb.coverage));
  CHECK(images_bit_equal(read_tensor(tmp.file("debug/warped_mask.tensor")),
                         art.warped.warped_mask));
  CHECK(images_bit_equal(read_tensor(tmp.file("debug/filled.tensor")), art.fg_fill.image));
  CHECK(images_bit_equal(read_tensor(tmp.file("debug/blended.tensor")), art.blended));
  CHECK(images_bit_equal(read_tensor(tmp.file("debug/bg_filled.tensor")), art.bg_filled));
  CHECK(images_bit_equal(read_tensor(tmp.file("debug/mask_smoothed.tensor")),
                         art.mask_smoothed));

  // The written PNG decodes to the quantized final image.
  const Image final_png = read_png(tmp.file("out.png"));
  for (size_t i = 0; i < final_png.size(); ++i) {
    const float q = std::round(std::clamp(art.final_image.data()[i], 0.0f, 1.0f) * 255.0f) / 255.0f;
    CHECK(final_png.data()[i] == doctest::Approx(q).epsilon(1e-9));
  }
}

TEST_CASE("config validation") {
  RectifyInputs in;
  in.rgb = Image(8, 8, 3, 0.5f);
  in.mask = Image(8, 8, 1, 1.0f);
  in.depth = DepthMap(8, 8);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) in.depth.set(x, y, 0.5);
  in.camera = CameraSpec{CameraIntrinsics{10, 4, 4}, 8, 8};

  PipelineConfig cfg;
  cfg.bins_count = 49;
  CHECK_THROWS_AS(rectify_run(in, cfg, nullptr), Error);

  PipelineConfig cfg2;
  in.camera.width = 9;
  CHECK_THROWS_AS(rectify_run(in, cfg2, nullptr), Error);
}
