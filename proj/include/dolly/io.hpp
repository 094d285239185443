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

#include <string>

#include "dolly/camgeom.hpp"
#include "dolly/image.hpp"

namespace dolly {

/// Intrinsics plus the image size they refer to, as serialized in camera
/// JSON documents: {"f": px, "cx": px, "cy": px, "width": int, "height": int}.
struct CameraSpec {
  CameraIntrinsics k;
  int width = 0;
  int height = 0;
};

// --- PNG (8-bit and 16-bit, gray/rgb/rgba; values mapped to [0,1]) ---
Image read_png(const std::string& path);
void write_png8(const std::string& path, const Image& img);
void write_png16(const std::string& path, const Image& img);

// --- PFM: single-channel float32, little-endian, meters. Invalid depth
// stored as 0; values <= 0 or non-finite read back as invalid. ---
DepthMap read_pfm(const std::string& path);
void write_pfm(const std::string& path, const DepthMap& depth);

// --- 16-bit PNG depth with a JSON sidecar (path + ".json") giving
// {"scale_m_per_unit": s}; raw 0 means invalid. ---
DepthMap read_depth_png16(const std::string& path);
void write_depth_png16(const std::string& path, const DepthMap& depth, double scale_m_per_unit);

/// Dispatches on extension: .pfm or .png (with sidecar).
DepthMap read_depth_any(const std::string& path);

// --- Raw tensor file: u32-LE header length, JSON header
// {"w","h","c","dtype":"f32","layout":"hwc"}, then float32 payload. The
// in-memory Image is planar; layout conversion happens here. ---
Image read_tensor(const std::string& path);
void write_tensor(const std::string& path, const Image& img);

// --- Camera / transform JSON ---
CameraSpec read_camera_json(const std::string& path);
void write_camera_json(const std::string& path, const CameraSpec& spec);

/// {"r": [9 row-major], "t": [3, meters]} fragments used inside larger docs.
std::string transform_to_json(const RigidTransform& m);
RigidTransform transform_from_json(const std::string& json_text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace dolly
