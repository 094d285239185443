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

#include "dolly/pipeline.hpp"

#include <chrono>
#include <filesystem>

#include "json.hpp"

namespace dolly {
namespace {

using json = nlohmann::json;

class StageTimer {
 public:
  StageTimer(bool enabled, std::map<std::string, double>* sink)
      : enabled_(enabled), sink_(sink) {}
  template <typename F>
  auto run(const std::string& stage, F&& f) {
    if (!enabled_) return f();
    const auto t0 = std::chrono::steady_clock::now();
    auto cleanup = [&, t0]() {
      const auto t1 = std::chrono::steady_clock::now();
      (*sink_)[stage] = std::chrono::duration<double, std::milli>(t1 - t0).count();
    };
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      cleanup();
    } else {
      auto r = f();
      cleanup();
      return r;
    }
  }

 private:
  bool enabled_;
  std::map<std::string, double>* sink_;
};

/// Count of hole pixels the fill stage would synthesize inside the closed
/// output mask for a given horizontal translation.
size_t missing_pixels_for_tx(const RectifyInputs& inputs, const PipelineConfig& config,
                             double t_z, double t_x, const Point3& anchor,
                             const CameraIntrinsics& k2) {
  SplatParams sp;
  sp.radius = config.splat_radius;
  sp.z_eps = config.z_eps;
  sp.threads = config.threads;
  const RigidTransform move = compose_camera_move(t_z, t_x, anchor);
  const AttributedPointCloud cloud =
      build_point_cloud(inputs.mask, inputs.depth, inputs.mask, inputs.camera.k,
                        config.mask_threshold);
  const WarpedBundle bundle = splat(cloud, k2, move, inputs.rgb.width(), inputs.rgb.height(), sp);
  Image cov_mask(bundle.coverage.width(), bundle.coverage.height(), 1);
  for (size_t i = 0; i < bundle.coverage.size(); ++i)
    cov_mask.data()[i] = bundle.coverage.data()[i] >= config.coverage_threshold ? 1.0f : 0.0f;
  const Image closed = erode_mask(dilate_mask(cov_mask, config.mask_close_radius),
                                  config.mask_close_radius);
  size_t missing = 0;
  for (size_t i = 0; i < closed.size(); ++i)
    if (closed.data()[i] >= 0.5f && cov_mask.data()[i] < 0.5f) ++missing;
  return missing;
}

}  // namespace

std::string RunReport::to_json(const TranslationBins& bins) const {
  json j;
  j["report_version"] = report_version;
  j["tx_mode"] = tx_mode;
  j["t_z_m"] = t_z_m;
  j["t_x_m"] = t_x_m;
  j["theta_rad"] = theta_rad;
  j["z_ref_m"] = z_ref_m;
  j["f2_px"] = f2_px;
  j["missing_px_at_0"] = missing_px_at_0;
  j["missing_px_at_best"] = missing_px_at_best;
  j["warp"] = {{"points_behind_camera", warp_stats.points_behind_camera},
               {"points_out_of_bounds", warp_stats.points_out_of_bounds},
               {"total_weight", warp_stats.total_weight},
               {"discarded_weight", warp_stats.discarded_weight}};
  if (search) {
    json s;
    s["bins_m"] = std::vector<double>(bins.centers.begin(), bins.centers.end());
    s["iou"] = std::vector<double>(search->ious.begin(), search->ious.end());
    s["target_vector"] =
        std::vector<double>(search->target_vector.values.begin(),
                            search->target_vector.values.end());
    s["best_tx_m"] = search->best_tx;
    s["missing_px_at_0"] = search->missing_px_at_0;
    s["missing_px_at_best"] = search->missing_px_at_best;
    s["scored_mask"] = "warped input mask (m_w) substituted for generator output (m_g)";
    j["search"] = s;
  }
  if (psnr_db) {
    j["metrics"]["psnr_db"] = std::isinf(*psnr_db) ? json("inf") : json(*psnr_db);
    j["metrics"]["ssim"] = *ssim_val;
  }
  if (!timings_ms.empty()) j["timings_ms"] = timings_ms;
  return j.dump(2) + "\n";
}

RunReport rectify_run(const RectifyInputs& inputs, const PipelineConfig& config,
                      RectifyArtifacts* artifacts) {
  if (inputs.rgb.empty() || inputs.mask.empty() || inputs.depth.empty())
    fail_invalid("rectify: rgb, depth and mask are required");
  if (inputs.rgb.width() != inputs.camera.width ||
      inputs.rgb.height() != inputs.camera.height)
    fail_invalid("rectify: image size does not match the camera document");
  require_same_size(inputs.rgb, inputs.mask, "rectify");
  if (inputs.depth.width() != inputs.rgb.width() || inputs.depth.height() != inputs.rgb.height())
    fail_invalid("rectify: depth dimension mismatch");
  if (config.bins_count != kTranslationBins)
    fail_invalid("rectify: the translation discretization is fixed at 50 bins");

  RunReport report;
  StageTimer timer(config.collect_timings, &report.timings_ms);
  const CameraIntrinsics k1 = inputs.camera.k;
  const int w = inputs.rgb.width(), h = inputs.rgb.height();

  // Geometry setup.
  const double z_ref = median_foreground_depth(inputs.mask, inputs.depth, config.mask_threshold);
  const double t_z = config.tz_auto ? 2.0 * z_ref : config.tz_m;
  const CameraIntrinsics k2{scaled_focal(k1.f, z_ref, t_z), k1.cx, k1.cy};
  const auto [anchor_px, anchor_pt] =
      select_anchor_pixel(inputs.mask, inputs.depth, k1, config.mask_threshold);
  (void)anchor_px;
  report.z_ref_m = z_ref;
  report.t_z_m = t_z;
  report.f2_px = k2.f;

  // Horizontal translation.
  double t_x = 0.0;
  switch (config.tx_mode) {
    case TxMode::zero:
      report.tx_mode = "zero";
      break;
    case TxMode::fixed:
      t_x = config.tx_m;
      report.tx_mode = "fixed";
      break;
    case TxMode::search: {
      report.tx_mode = "search";
      if (!inputs.target_mask) fail_invalid("rectify: tx search needs a target mask");
      SearchInputs si{&inputs.rgb, &inputs.depth, &inputs.mask, k1};
      SplatParams sp;
      sp.radius = config.splat_radius;
      sp.z_eps = config.z_eps;
      sp.threads = config.threads;
      const SearchResult sr = timer.run("search_tx", [&] {
        return search_translation(si, t_z, *inputs.target_mask, make_bins(), sp,
                                  config.mask_threshold);
      });
      t_x = sr.best_tx;
      report.search = sr;
      break;
    }
  }
  report.t_x_m = t_x;
  report.theta_rad = compute_theta(t_x, Point3{anchor_pt.x, anchor_pt.y, anchor_pt.z + t_z});

  // Hole counts before/after the horizontal move (search reports its own,
  // target-based counts; otherwise fall back to fill-hole counts).
  if (report.search) {
    report.missing_px_at_0 = report.search->missing_px_at_0;
    report.missing_px_at_best = report.search->missing_px_at_best;
  } else {
    report.missing_px_at_0 = timer.run("missing_at_0", [&] {
      return missing_pixels_for_tx(inputs, config, t_z, 0.0, anchor_pt, k2);
    });
    report.missing_px_at_best =
        t_x == 0.0 ? report.missing_px_at_0 : timer.run("missing_at_tx", [&] {
          return missing_pixels_for_tx(inputs, config, t_z, t_x, anchor_pt, k2);
        });
  }

  const RigidTransform move = compose_camera_move(t_z, t_x, anchor_pt);

  // Warp.
  SplatParams sp;
  sp.radius = config.splat_radius;
  sp.z_eps = config.z_eps;
  sp.threads = config.threads;
  RectifyArtifacts local;
  RectifyArtifacts& a = artifacts ? *artifacts : local;
  a.warped = timer.run("warp", [&] {
    return warp_frame(inputs.rgb, inputs.features ? &*inputs.features : nullptr, inputs.mask,
                      inputs.depth, k1, k2, move, w, h, sp, config.mask_threshold);
  });
  report.warp_stats = a.warped.rgb.stats;

  // Foreground: pull-push fill, then Laplacian blend keeping warped detail
  // where coverage is solid.
  a.fg_fill = timer.run("fill", [&] {
    return naive_fill(a.warped.rgb.image, a.warped.rgb.coverage, config.coverage_threshold);
  });
  a.blended = timer.run("blend", [&] {
    return blend(a.warped.rgb.image, a.fg_fill.image, a.warped.rgb.coverage,
                 config.blend_levels);
  });

  // Background: remove the (dilated) subject and fill the gap.
  a.bg_dilated_mask = timer.run("bg_dilate", [&] {
    return dilate_mask(inputs.mask, config.dilation_radius);
  });
  a.bg_filled = timer.run("bg_fill", [&] {
    Image bg_cov(w, h, 1);
    for (size_t i = 0; i < bg_cov.size(); ++i)
      bg_cov.data()[i] = 1.0f - a.bg_dilated_mask.data()[i];
    return naive_fill(inputs.rgb, bg_cov, config.coverage_threshold).image;
  });

  // Output mask: close warp seams in the thresholded warped mask (the
  // generator's mask stands in), then feather.
  a.mask_closed = timer.run("mask_close", [&] {
    Image bin(w, h, 1);
    for (size_t i = 0; i < bin.size(); ++i)
      bin.data()[i] = a.warped.warped_mask.data()[i] >= 0.5f ? 1.0f : 0.0f;
    if (config.mask_close_radius <= 0) return bin;
    return erode_mask(dilate_mask(bin, config.mask_close_radius), config.mask_close_radius);
  });
  a.mask_smoothed = timer.run("mask_smooth", [&] {
    return smooth_mask(a.mask_closed, config.mask_sigma);
  });

  a.final_image = timer.run("compose", [&] {
    return compose(CompositeInputs{a.blended, a.bg_filled, a.mask_smoothed});
  });

  if (inputs.reference) {
    report.psnr_db = psnr(a.final_image, *inputs.reference);
    report.ssim_val = ssim(a.final_image, *inputs.reference);
  }
  return report;
}

RunReport rectify(const PipelineConfig& config) {
  RectifyInputs inputs;
  inputs.rgb = read_png(config.rgb_path);
  inputs.depth = read_depth_any(config.depth_path);
  inputs.mask = read_png(config.mask_path);
  inputs.camera = read_camera_json(config.camera_path);
  if (!config.features_path.empty()) inputs.features = read_tensor(config.features_path);
  if (!config.target_mask_path.empty()) inputs.target_mask = read_png(config.target_mask_path);
  if (!config.reference_path.empty()) inputs.reference = read_png(config.reference_path);

  RectifyArtifacts artifacts;
  RunReport report = rectify_run(inputs, config, &artifacts);

  if (!config.out_image_path.empty()) write_png8(config.out_image_path, artifacts.final_image);
  if (!config.report_path.empty())
    write_text_file(config.report_path, report.to_json(make_bins()));

  if (!config.debug_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(config.debug_dir);
    const std::string d = config.debug_dir + "/";
    // Tensors preserve exact float values; PNGs are previews.
    write_tensor(d + "warped_rgb.tensor", artifacts.warped.rgb.image);
    write_tensor(d + "coverage.tensor", artifacts.warped.rgb.coverage);
    write_tensor(d + "warped_mask.tensor", artifacts.warped.warped_mask);
    write_tensor(d + "filled.tensor", artifacts.fg_fill.image);
    write_tensor(d + "blended.tensor", artifacts.blended);
    write_tensor(d + "bg_filled.tensor", artifacts.bg_filled);
    write_tensor(d + "mask_smoothed.tensor", artifacts.mask_smoothed);
    write_png8(d + "warped_rgb.png", artifacts.warped.rgb.image);
    write_png8(d + "coverage.png", artifacts.warped.rgb.coverage);
    write_png8(d + "filled.png", artifacts.fg_fill.image);
    write_png8(d + "blended.png", artifacts.blended);
    write_png8(d + "mask_smoothed.png", artifacts.mask_smoothed);
    write_png8(d + "final.png", artifacts.final_image);
  }
  return report;
}

}  // namespace dolly
