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

#include "dolly/blendcomp.hpp"

#include <algorithm>
#include <cmath>

#include "dolly/kernels.hpp"

namespace dolly {
namespace {

constexpr float kBinomial5[5] = {1.0f / 16, 4.0f / 16, 6.0f / 16, 4.0f / 16, 1.0f / 16};
// Zero-stuffed upsampling uses the doubled kernel per axis.
constexpr float kBinomial5Up[5] = {1.0f / 8, 4.0f / 8, 6.0f / 8, 4.0f / 8, 1.0f / 8};

Image conv_separable(const Image& img, const float* k, int taps) {
  const auto& kr = kernels::active();
  Image tmp(img.width(), img.height(), img.channels());
  Image out(img.width(), img.height(), img.channels());
  for (int c = 0; c < img.channels(); ++c) {
    kr.conv_h(img.plane(c), tmp.plane(c), img.width(), img.height(), k, taps);
    kr.conv_v(tmp.plane(c), out.plane(c), img.width(), img.height(), k, taps);
  }
  return out;
}

int max_levels(int w, int h) {
  return static_cast<int>(std::floor(std::log2(static_cast<double>(std::min(w, h)))));
}

}  // namespace

Image pyr_down(const Image& img) {
  const Image blurred = conv_separable(img, kBinomial5, 5);
  const int ow = (img.width() + 1) / 2, oh = (img.height() + 1) / 2;
  Image out(ow, oh, img.channels());
  for (int c = 0; c < img.channels(); ++c)
    for (int y = 0; y < oh; ++y)
      for (int x = 0; x < ow; ++x) out.at(x, y, c) = blurred.at(2 * x, 2 * y, c);
  return out;
}

Image pyr_up(const Image& img, int out_w, int out_h) {
  if ((out_w + 1) / 2 != img.width() || (out_h + 1) / 2 != img.height())
    fail_invalid("pyr_up: output size does not halve to the input size");
  Image stuffed(out_w, out_h, img.channels());
  for (int c = 0; c < img.channels(); ++c)
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x) stuffed.at(2 * x, 2 * y, c) = img.at(x, y, c);
  return conv_separable(stuffed, kBinomial5Up, 5);
}

ImagePyramid gaussian_pyramid(const Image& img, int n_levels) {
  if (n_levels < 1) fail_invalid("gaussian_pyramid: need at least one level");
  if (n_levels > 1 && n_levels > max_levels(img.width(), img.height()))
    fail_invalid("gaussian_pyramid: too many levels for image size");
  ImagePyramid pyr;
  pyr.kind = PyramidKind::gaussian;
  pyr.levels.push_back(img);
  for (int i = 1; i < n_levels; ++i) pyr.levels.push_back(pyr_down(pyr.levels.back()));
  return pyr;
}

ImagePyramid laplacian_pyramid(const Image& img, int n_levels) {
  ImagePyramid g = gaussian_pyramid(img, n_levels);
  ImagePyramid pyr;
  pyr.kind = PyramidKind::laplacian;
  pyr.levels.resize(g.levels.size());
  for (size_t i = 0; i + 1 < g.levels.size(); ++i) {
    const Image& fine = g.levels[i];
    const Image up = pyr_up(g.levels[i + 1], fine.width(), fine.height());
    Image residual(fine.width(), fine.height(), fine.channels());
    for (size_t j = 0; j < fine.size(); ++j)
      residual.data()[j] = fine.data()[j] - up.data()[j];
    pyr.levels[i] = std::move(residual);
  }
  pyr.levels.back() = std::move(g.levels.back());
  return pyr;
}

Image reconstruct(const ImagePyramid& pyramid) {
  if (pyramid.levels.empty()) fail_invalid("reconstruct: empty pyramid");
  if (pyramid.kind != PyramidKind::laplacian)
    fail_invalid("reconstruct: expected a laplacian pyramid");
  Image acc = pyramid.levels.back();
  for (size_t i = pyramid.levels.size() - 1; i-- > 0;) {
    const Image& residual = pyramid.levels[i];
    const Image up = pyr_up(acc, residual.width(), residual.height());
    Image next(residual.width(), residual.height(), residual.channels());
    for (size_t j = 0; j < residual.size(); ++j)
      next.data()[j] = residual.data()[j] + up.data()[j];
    acc = std::move(next);
  }
  return acc;
}

Image blend(const Image& a, const Image& b, const Image& mask, int n_levels) {
  if (!a.same_shape(b)) fail_invalid("blend: image shape mismatch");
  require_same_size(a, mask, "blend");
  if (mask.channels() != 1) fail_invalid("blend: mask must be single-channel");

  const ImagePyramid la = laplacian_pyramid(a, n_levels);
  const ImagePyramid lb = laplacian_pyramid(b, n_levels);
  const ImagePyramid gm = gaussian_pyramid(mask, n_levels);

  const auto& kr = kernels::active();
  ImagePyramid mixed;
  mixed.kind = PyramidKind::laplacian;
  mixed.levels.resize(la.levels.size());
  for (size_t i = 0; i < la.levels.size(); ++i) {
    const Image& va = la.levels[i];
    const Image& vb = lb.levels[i];
    const Image& vm = gm.levels[i];
    Image out(va.width(), va.height(), va.channels());
    for (int c = 0; c < va.channels(); ++c)
      kr.lerp(va.plane(c), vb.plane(c), vm.plane(0), out.plane(c), va.pixels());
    mixed.levels[i] = std::move(out);
  }
  Image result = reconstruct(mixed);
  for (size_t j = 0; j < result.size(); ++j)
    result.data()[j] = std::clamp(result.data()[j], 0.0f, 1.0f);
  return result;
}

Image smooth_mask(const Image& mask, double sigma) {
  if (sigma < 0.0) fail_invalid("smooth_mask: negative sigma");
  if (sigma == 0.0) return mask;
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  const int taps = 2 * radius + 1;
  std::vector<float> k(taps);
  double norm = 0.0;
  for (int i = 0; i < taps; ++i) {
    const double x = i - radius;
    k[i] = static_cast<float>(std::exp(-0.5 * x * x / (sigma * sigma)));
    norm += k[i];
  }
  for (int i = 0; i < taps; ++i) k[i] = static_cast<float>(k[i] / norm);
  return conv_separable(mask, k.data(), taps);
}

namespace {

Image disc_morph(const Image& mask, int radius, bool dilate) {
  if (radius < 0) fail_invalid("disc_morph: negative radius");
  const int w = mask.width(), h = mask.height();
  std::vector<uint8_t> bin(mask.pixels());
  kernels::active().threshold(mask.plane(0), bin.data(), mask.pixels(), 0.5f);

  Image out(w, h, 1);
  if (radius == 0) {
    for (size_t i = 0; i < mask.pixels(); ++i) out.data()[i] = bin[i] ? 1.0f : 0.0f;
    return out;
  }
  std::vector<std::pair<int, int>> disc;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx)
      if (dx * dx + dy * dy <= radius * radius) disc.emplace_back(dx, dy);

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      bool hit = !dilate;  // OR over the disc for dilation, AND for erosion
      for (const auto& [dx, dy] : disc) {
        const int xx = x + dx, yy = y + dy;
        // Out of bounds reads as background for dilation and foreground for
        // erosion, keeping erode the exact dual of dilate.
        const bool v = (xx >= 0 && xx < w && yy >= 0 && yy < h)
                           ? bin[static_cast<size_t>(yy) * w + xx] != 0
                           : !dilate;
        if (dilate) {
          if (v) { hit = true; break; }
        } else {
          if (!v) { hit = false; break; }
        }
      }
      out.at(x, y, 0) = hit ? 1.0f : 0.0f;
    }
  }
  return out;
}

}  // namespace

Image dilate_mask(const Image& mask, int radius) { return disc_morph(mask, radius, true); }
Image erode_mask(const Image& mask, int radius) { return disc_morph(mask, radius, false); }

Image compose(const CompositeInputs& c) {
  if (!c.fg_blended.same_shape(c.bg_inpainted)) fail_invalid("compose: image shape mismatch");
  require_same_size(c.fg_blended, c.mask_smoothed, "compose");
  if (c.mask_smoothed.channels() != 1) fail_invalid("compose: mask must be single-channel");
  const auto& kr = kernels::active();
  Image out(c.fg_blended.width(), c.fg_blended.height(), c.fg_blended.channels());
  for (int ch = 0; ch < out.channels(); ++ch)
    kr.lerp(c.fg_blended.plane(ch), c.bg_inpainted.plane(ch), c.mask_smoothed.plane(0),
            out.plane(ch), out.pixels());
  return out;
}

namespace {

struct PullLevel {
  Image value;
  std::vector<double> weight;
  int w, h;
};

}  // namespace

FillResult naive_fill(const Image& image, const Image& coverage, float coverage_threshold) {
  require_same_size(image, coverage, "naive_fill");
  if (coverage.channels() != 1) fail_invalid("naive_fill: coverage must be single-channel");
  const int w = image.width(), h = image.height(), ch = image.channels();
  const size_t npx = image.pixels();

  FillResult result;
  result.filled_mask = Image(w, h, 1);
  size_t n_holes = 0;
  for (size_t i = 0; i < npx; ++i) {
    if (coverage.data()[i] < coverage_threshold) {
      result.filled_mask.data()[i] = 1.0f;
      ++n_holes;
    }
  }
  if (n_holes == 0) {
    result.image = image;
    return result;
  }

  // Pull: coverage-weighted 2x2 reduction down to 1x1.
  std::vector<PullLevel> levels;
  {
    PullLevel base;
    base.w = w;
    base.h = h;
    base.value = image;
    base.weight.resize(npx);
    for (size_t i = 0; i < npx; ++i)
      base.weight[i] = std::clamp(static_cast<double>(coverage.data()[i]), 0.0, 1.0);
    levels.push_back(std::move(base));
  }
  while (levels.back().w > 1 || levels.back().h > 1) {
    const PullLevel& fine = levels.back();
    PullLevel coarse;
    coarse.w = (fine.w + 1) / 2;
    coarse.h = (fine.h + 1) / 2;
    coarse.value = Image(coarse.w, coarse.h, ch);
    coarse.weight.assign(static_cast<size_t>(coarse.w) * coarse.h, 0.0);
    for (int y = 0; y < coarse.h; ++y) {
      for (int x = 0; x < coarse.w; ++x) {
        double wsum = 0.0;
        std::vector<double> vsum(ch, 0.0);
        for (int dy = 0; dy < 2; ++dy)
          for (int dx = 0; dx < 2; ++dx) {
            const int fx = 2 * x + dx, fy = 2 * y + dy;
            if (fx >= fine.w || fy >= fine.h) continue;
            const double fw = fine.weight[static_cast<size_t>(fy) * fine.w + fx];
            if (fw <= 0.0) continue;
            wsum += fw;
            for (int c = 0; c < ch; ++c) vsum[c] += fw * fine.value.at(fx, fy, c);
          }
        if (wsum > 0.0) {
          for (int c = 0; c < ch; ++c)
            coarse.value.at(x, y, c) = static_cast<float>(vsum[c] / wsum);
          coarse.weight[static_cast<size_t>(y) * coarse.w + x] = std::min(1.0, wsum);
        }
      }
    }
    levels.push_back(std::move(coarse));
  }

  result.all_missing = levels.back().weight[0] <= 0.0;

  // Push: blend under-covered pixels with the bilinearly upsampled coarse fill.
  for (size_t li = levels.size() - 1; li-- > 0;) {
    PullLevel& fine = levels[li];
    const PullLevel& coarse = levels[li + 1];
    for (int y = 0; y < fine.h; ++y) {
      for (int x = 0; x < fine.w; ++x) {
        double& fw = fine.weight[static_cast<size_t>(y) * fine.w + x];
        if (fw >= 1.0) continue;
        // Coarse sample centers sit at fine coordinates (2i+0.5, 2j+0.5).
        const double cxf = (x - 0.5) / 2.0, cyf = (y - 0.5) / 2.0;
        const int x0 = std::clamp(static_cast<int>(std::floor(cxf)), 0, coarse.w - 1);
        const int y0 = std::clamp(static_cast<int>(std::floor(cyf)), 0, coarse.h - 1);
        const int x1 = std::min(x0 + 1, coarse.w - 1);
        const int y1 = std::min(y0 + 1, coarse.h - 1);
        const double ax = std::clamp(cxf - x0, 0.0, 1.0);
        const double ay = std::clamp(cyf - y0, 0.0, 1.0);
        for (int c = 0; c < ch; ++c) {
          const double up =
              (1 - ay) * ((1 - ax) * coarse.value.at(x0, y0, c) + ax * coarse.value.at(x1, y0, c)) +
              ay * ((1 - ax) * coarse.value.at(x0, y1, c) + ax * coarse.value.at(x1, y1, c));
          fine.value.at(x, y, c) = static_cast<float>(fw * fine.value.at(x, y, c) + (1.0 - fw) * up);
        }
        fw = 1.0;
      }
    }
  }

  // Only pixels below the coverage threshold may change.
  result.image = image;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (result.filled_mask.at(x, y, 0) > 0.0f)
        for (int c = 0; c < ch; ++c) result.image.at(x, y, c) = levels[0].value.at(x, y, c);
  return result;
}

FillResult naive_fill(const WarpedBundle& bundle, float coverage_threshold) {
  return naive_fill(bundle.image, bundle.coverage, coverage_threshold);
}

}  // namespace dolly
