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

#include <map>
#include <optional>
#include <string>

#include "dolly/blendcomp.hpp"
#include "dolly/io.hpp"
#include "dolly/lossmetrics.hpp"
#include "dolly/txsearch.hpp"
#include "dolly/warp.hpp"

namespace dolly {

enum class TxMode { zero, fixed, search };

struct PipelineConfig {
  // Input / output paths (file-based entry point only).
  std::string rgb_path, depth_path, mask_path, camera_path;
  std::string features_path;     // optional tensor file
  std::string target_mask_path;  // required for TxMode::search
  std::string reference_path;    // optional; adds metrics to the report
  std::string out_image_path, report_path, debug_dir;

  // Camera move. t_z "auto" = 2x median subject depth.
  bool tz_auto = true;
  double tz_m = 0.0;
  TxMode tx_mode = TxMode::zero;
  double tx_m = 0.0;

  int bins_count = 50;  // the discretization is fixed at 50

  // Warping.
  double splat_radius = 0.5;
  double z_eps = 0.005;
  float mask_threshold = 0.5f;
  float coverage_threshold = 0.5f;

  // Post-processing.
  int blend_levels = 4;
  double mask_sigma = 3.0;
  int dilation_radius = 5;
  int mask_close_radius = 8;  // closes warp seams in the output mask

  LossWeights weights;
  int threads = 1;
  bool collect_timings = true;
};

struct RectifyInputs {
  Image rgb;
  DepthMap depth;
  Image mask;
  CameraSpec camera;
  std::optional<Image> features;
  std::optional<Image> target_mask;  // for TxMode::search
  std::optional<Image> reference;    // for report metrics
};

struct RunReport {
  int report_version = 1;
  std::string tx_mode;
  double t_z_m = 0.0;
  double t_x_m = 0.0;
  double theta_rad = 0.0;
  double z_ref_m = 0.0;
  double f2_px = 0.0;
  size_t missing_px_at_0 = 0;
  size_t missing_px_at_best = 0;
  SplatStats warp_stats;
  std::optional<SearchResult> search;
  std::optional<double> psnr_db;  // vs. reference
  std::optional<double> ssim_val;
  std::map<std::string, double> timings_ms;

  std::string to_json(const TranslationBins& bins) const;
};

/// Every intermediate the pipeline produces, for --debug-dir dumps and for
/// tests that re-derive each stage from module calls.
struct RectifyArtifacts {
  WarpFrameResult warped;
  FillResult fg_fill;
  Image blended;
  Image bg_dilated_mask;
  Image bg_filled;
  Image mask_closed;
  Image mask_smoothed;
  Image final_image;
};

/// In-memory pipeline: camera move -> warp -> fill -> blend -> background
/// fill -> mask smoothing -> composition.
RunReport rectify_run(const RectifyInputs& inputs, const PipelineConfig& config,
                      RectifyArtifacts* artifacts);

/// File-based pipeline: loads per config paths, runs, writes the final PNG,
/// the JSON report and optional debug dumps.
RunReport rectify(const PipelineConfig& config);

}  // namespace dolly
