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

#include <cmath>
#include <cstdint>
#include <vector>

#include "dolly/error.hpp"

namespace dolly {

/// Planar float image. Channel planes are contiguous so per-channel
/// kernels can run over flat spans. Values are nominally in [0,1] for
/// color/mask data but the container does not enforce a range.
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels, float fill = 0.0f)
      : w_(width), h_(height), c_(channels) {
    if (width <= 0 || height <= 0 || channels <= 0)
      fail_invalid("Image: non-positive dimensions");
    data_.assign(static_cast<size_t>(w_) * h_ * c_, fill);
  }

  int width() const { return w_; }
  int height() const { return h_; }
  int channels() const { return c_; }
  bool empty() const { return data_.empty(); }
  size_t pixels() const { return static_cast<size_t>(w_) * h_; }
  size_t size() const { return data_.size(); }

  float* plane(int c) { return data_.data() + static_cast<size_t>(c) * pixels(); }
  const float* plane(int c) const { return data_.data() + static_cast<size_t>(c) * pixels(); }

  float& at(int x, int y, int c = 0) {
    return data_[static_cast<size_t>(c) * pixels() + static_cast<size_t>(y) * w_ + x];
  }
  float at(int x, int y, int c = 0) const {
    return data_[static_cast<size_t>(c) * pixels() + static_cast<size_t>(y) * w_ + x];
  }

  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }

  bool same_shape(const Image& o) const {
    return w_ == o.w_ && h_ == o.h_ && c_ == o.c_;
  }
  bool same_size(const Image& o) const { return w_ == o.w_ && h_ == o.h_; }

 private:
  int w_ = 0, h_ = 0, c_ = 0;
  std::vector<float> data_;
};

/// Per-pixel metric depth with a validity flag. Depth is stored in double
/// precision; geometry derived from it is expected to hold at 1e-9 m.
class DepthMap {
 public:
  DepthMap() = default;
  DepthMap(int width, int height) : w_(width), h_(height) {
    if (width <= 0 || height <= 0) fail_invalid("DepthMap: non-positive dimensions");
    z_.assign(static_cast<size_t>(w_) * h_, 0.0);
    valid_.assign(z_.size(), 0);
  }

  int width() const { return w_; }
  int height() const { return h_; }
  bool empty() const { return z_.empty(); }
  size_t pixels() const { return z_.size(); }

  double z(int x, int y) const { return z_[idx(x, y)]; }
  bool valid(int x, int y) const { return valid_[idx(x, y)] != 0; }

  /// Marks the pixel valid iff depth is finite and positive.
  void set(int x, int y, double depth) {
    const size_t i = idx(x, y);
    if (std::isfinite(depth) && depth > 0.0) {
      z_[i] = depth;
      valid_[i] = 1;
    } else {
      z_[i] = 0.0;
      valid_[i] = 0;
    }
  }
  void invalidate(int x, int y) {
    const size_t i = idx(x, y);
    z_[i] = 0.0;
    valid_[i] = 0;
  }

  const std::vector<double>& values() const { return z_; }
  const std::vector<uint8_t>& validity() const { return valid_; }

 private:
  size_t idx(int x, int y) const { return static_cast<size_t>(y) * w_ + x; }
  int w_ = 0, h_ = 0;
  std::vector<double> z_;
  std::vector<uint8_t> valid_;
};

inline void require_same_size(const Image& a, const Image& b, const char* where) {
  if (!a.same_size(b)) fail_invalid(std::string(where) + ": dimension mismatch");
}

}  // namespace dolly
