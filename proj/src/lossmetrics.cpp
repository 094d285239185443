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

#include "dolly/lossmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dolly/kernels.hpp"

namespace dolly {
namespace {

constexpr float kMaskThreshold = 0.5f;

std::vector<uint8_t> binarize(const Image& mask) {
  std::vector<uint8_t> bin(mask.pixels());
  kernels::active().threshold(mask.plane(0), bin.data(), mask.pixels(), kMaskThreshold);
  return bin;
}

}  // namespace

double depth_loss(const DepthMap& d_pred, const DepthMap& d_gt, const Image& mask,
                  const LossWeights& w) {
  if (d_pred.width() != d_gt.width() || d_pred.height() != d_gt.height() ||
      mask.width() != d_pred.width() || mask.height() != d_pred.height())
    fail_invalid("depth_loss: dimension mismatch");

  double l1 = 0.0, ltanh = 0.0;
  size_t n = 0;
  for (int y = 0; y < d_pred.height(); ++y) {
    for (int x = 0; x < d_pred.width(); ++x) {
      if (mask.at(x, y, 0) < kMaskThreshold) continue;
      if (!d_pred.valid(x, y) || !d_gt.valid(x, y)) continue;
      const double dp = d_pred.z(x, y), dg = d_gt.z(x, y);
      l1 += std::abs(dp - dg);
      ltanh += std::abs(std::tanh(dp) - std::tanh(dg));
      ++n;
    }
  }
  if (n == 0) fail_invalid("depth_loss: empty foreground");
  l1 /= static_cast<double>(n);
  ltanh /= static_cast<double>(n);
  const double lgrad = multiscale_gradient_loss(d_pred, d_gt, mask);
  return w.alpha1 * l1 + w.alpha2 * ltanh + w.alpha3 * lgrad;
}

double multiscale_gradient_loss(const DepthMap& d_pred, const DepthMap& d_gt,
                                const Image& mask) {
  if (d_pred.width() != d_gt.width() || d_pred.height() != d_gt.height() ||
      mask.width() != d_pred.width() || mask.height() != d_pred.height())
    fail_invalid("multiscale_gradient_loss: dimension mismatch");

  auto usable = [&](int x, int y) {
    return mask.at(x, y, 0) >= kMaskThreshold && d_pred.valid(x, y) && d_gt.valid(x, y);
  };
  auto err = [&](int x, int y) { return d_pred.z(x, y) - d_gt.z(x, y); };

  bool any = false;
  double total = 0.0;
  for (int stride = 1; stride <= 8; stride *= 2) {
    double gsum = 0.0;
    size_t gcount = 0;
    for (int y = 0; y < d_pred.height(); y += stride) {
      for (int x = 0; x < d_pred.width(); x += stride) {
        if (!usable(x, y)) continue;
        any = true;
        if (x + stride < d_pred.width() && usable(x + stride, y)) {
          gsum += std::abs(err(x + stride, y) - err(x, y)) / stride;
          ++gcount;
        }
        if (y + stride < d_pred.height() && usable(x, y + stride)) {
          gsum += std::abs(err(x, y + stride) - err(x, y)) / stride;
          ++gcount;
        }
      }
    }
    if (gcount > 0) total += gsum / static_cast<double>(gcount);
  }
  if (!any) fail_invalid("multiscale_gradient_loss: empty foreground");
  return total;
}

namespace {

double masked_l1(const Image& a, const Image& b, const std::vector<uint8_t>& mask_bin,
                 bool* empty) {
  kernels::MaskedSum total;
  for (int c = 0; c < a.channels(); ++c) {
    const kernels::MaskedSum s = kernels::active().sum_abs_diff_masked(
        a.plane(c), b.plane(c), mask_bin.data(), a.pixels());
    total.sum += s.sum;
    total.count += s.count;
  }
  if (total.count == 0) {
    *empty = true;
    return 0.0;
  }
  return total.sum / static_cast<double>(total.count);
}

}  // namespace

double photometric_loss(const Image& i_g, const Image& i_t, const RegionMasks& regions,
                        const LossWeights& w, const PerceptualHook& hook,
                        bool* empty_region_warning) {
  if (!i_g.same_shape(i_t)) fail_invalid("photometric_loss: image shape mismatch");
  require_same_size(i_g, regions.all, "photometric_loss(all)");
  require_same_size(i_g, regions.face, "photometric_loss(face)");
  require_same_size(i_g, regions.missing, "photometric_loss(missing)");

  bool warned = false;
  const Image* masks[3] = {&regions.all, &regions.face, &regions.missing};
  const double omegas[3] = {w.omega_all, w.omega_face, w.omega_missing};
  double total = 0.0;
  for (int i = 0; i < 3; ++i) {
    const std::vector<uint8_t> bin = binarize(*masks[i]);
    bool empty = false;
    const double l1 = masked_l1(i_g, i_t, bin, &empty);
    double pcp = 0.0;
    if (hook && !empty) pcp = hook(i_g, i_t, *masks[i]);
    if (empty) {
      warned = true;
      continue;  // empty region contributes 0
    }
    total += omegas[i] * (w.mu * l1 + w.gamma * pcp);
  }
  if (empty_region_warning) *empty_region_warning = warned;
  return total;
}

double generator_gan_loss(const DiscriminatorResponse& d_fake,
                          const DiscriminatorResponse& d_real) {
  if (!d_fake.feature_map.same_shape(d_real.feature_map) ||
      !d_fake.score_map.same_shape(d_real.score_map))
    fail_invalid("generator_gan_loss: shape mismatch");
  const auto& kr = kernels::active();
  const double fdiff = kr.sum(d_fake.feature_map.data(), d_fake.feature_map.size()) -
                       kr.sum(d_real.feature_map.data(), d_real.feature_map.size());
  const double fmean = fdiff / static_cast<double>(d_fake.feature_map.size());
  const double smean = kr.sum(d_fake.score_map.data(), d_fake.score_map.size()) /
                       static_cast<double>(d_fake.score_map.size());
  return fmean - smean;
}

double discriminator_hinge_loss(const Image& d_fake_scores, const Image& d_real_scores) {
  double fake = 0.0, real = 0.0;
  for (size_t i = 0; i < d_fake_scores.size(); ++i)
    fake += std::max(0.0, 1.0 + static_cast<double>(d_fake_scores.data()[i]));
  for (size_t i = 0; i < d_real_scores.size(); ++i)
    real += std::max(0.0, 1.0 - static_cast<double>(d_real_scores.data()[i]));
  return fake / static_cast<double>(d_fake_scores.size()) +
         real / static_cast<double>(d_real_scores.size());
}

double mask_bce_loss(const Image& m_g, const Image& m_t) {
  require_same_size(m_g, m_t, "mask_bce_loss");
  constexpr double kEps = 1e-7;
  double total = 0.0;
  for (size_t i = 0; i < m_g.size(); ++i) {
    const double p = std::clamp(static_cast<double>(m_g.data()[i]), kEps, 1.0 - kEps);
    const double t = m_t.data()[i] >= kMaskThreshold ? 1.0 : 0.0;
    total -= t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
  }
  return total / static_cast<double>(m_g.size());
}

double overall_loss(const LossParts& parts, const LossWeights& w, const LossToggles& toggles) {
  const double depth = toggles.depth_enabled ? parts.depth : 0.0;
  return depth + parts.photo + w.beta * parts.gan + w.rho * parts.mask;
}

double psnr(const Image& a, const Image& b) {
  if (!a.same_shape(b)) fail_invalid("psnr: shape mismatch");
  const double sq = kernels::active().sum_sq_diff(a.data(), b.data(), a.size());
  const double mse = sq / static_cast<double>(a.size());
  if (mse <= 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

double psnr_masked(const Image& a, const Image& b, const Image& mask) {
  if (!a.same_shape(b)) fail_invalid("psnr_masked: shape mismatch");
  require_same_size(a, mask, "psnr_masked");
  double sq = 0.0;
  size_t n = 0;
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x) {
      if (mask.at(x, y, 0) < kMaskThreshold) continue;
      for (int c = 0; c < a.channels(); ++c) {
        const double d = static_cast<double>(a.at(x, y, c)) - b.at(x, y, c);
        sq += d * d;
        ++n;
      }
    }
  if (n == 0) fail_invalid("psnr_masked: empty mask");
  const double mse = sq / static_cast<double>(n);
  if (mse <= 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

namespace {

std::vector<double> to_luma(const Image& img) {
  std::vector<double> out(img.pixels());
  if (img.channels() == 1) {
    for (size_t i = 0; i < img.pixels(); ++i) out[i] = img.data()[i];
  } else if (img.channels() >= 3) {
    const float* r = img.plane(0);
    const float* g = img.plane(1);
    const float* b = img.plane(2);
    for (size_t i = 0; i < img.pixels(); ++i)
      out[i] = 0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i];
  } else {
    fail_invalid("ssim: unsupported channel count");
  }
  return out;
}

// Separable double-precision filtering ('same' size; only the fully
// windowed interior is consumed, so the border mode does not matter).
std::vector<double> filter2(const std::vector<double>& in, int w, int h,
                            const std::vector<double>& k) {
  const int r = static_cast<int>(k.size()) / 2;
  std::vector<double> tmp(in.size()), out(in.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int j = -r; j <= r; ++j) {
        const int xx = std::clamp(x + j, 0, w - 1);
        acc += k[j + r] * in[static_cast<size_t>(y) * w + xx];
      }
      tmp[static_cast<size_t>(y) * w + x] = acc;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int j = -r; j <= r; ++j) {
        const int yy = std::clamp(y + j, 0, h - 1);
        acc += k[j + r] * tmp[static_cast<size_t>(yy) * w + x];
      }
      out[static_cast<size_t>(y) * w + x] = acc;
    }
  return out;
}

}  // namespace

double ssim(const Image& a, const Image& b) {
  if (!a.same_shape(b)) fail_invalid("ssim: shape mismatch");
  constexpr int kWindow = 11, kRadius = 5;
  if (a.width() < kWindow || a.height() < kWindow)
    fail_invalid("ssim: image smaller than the 11x11 window");
  constexpr double kSigma = 1.5, kK1 = 0.01, kK2 = 0.03, kL = 1.0;
  const double c1 = (kK1 * kL) * (kK1 * kL);
  const double c2 = (kK2 * kL) * (kK2 * kL);

  std::vector<double> kern(kWindow);
  double norm = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double x = i - kRadius;
    kern[i] = std::exp(-0.5 * x * x / (kSigma * kSigma));
    norm += kern[i];
  }
  for (double& v : kern) v /= norm;

  const int w = a.width(), h = a.height();
  const std::vector<double> la = to_luma(a);
  const std::vector<double> lb = to_luma(b);
  std::vector<double> aa(la.size()), bb(la.size()), ab(la.size());
  for (size_t i = 0; i < la.size(); ++i) {
    aa[i] = la[i] * la[i];
    bb[i] = lb[i] * lb[i];
    ab[i] = la[i] * lb[i];
  }
  const std::vector<double> mu_a = filter2(la, w, h, kern);
  const std::vector<double> mu_b = filter2(lb, w, h, kern);
  const std::vector<double> e_aa = filter2(aa, w, h, kern);
  const std::vector<double> e_bb = filter2(bb, w, h, kern);
  const std::vector<double> e_ab = filter2(ab, w, h, kern);

  double total = 0.0;
  size_t count = 0;
  for (int y = kRadius; y < h - kRadius; ++y) {
    for (int x = kRadius; x < w - kRadius; ++x) {
      const size_t i = static_cast<size_t>(y) * w + x;
      const double ma = mu_a[i], mb = mu_b[i];
      const double va = e_aa[i] - ma * ma;
      const double vb = e_bb[i] - mb * mb;
      const double cov = e_ab[i] - ma * mb;
      const double val = ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) /
                         ((ma * ma + mb * mb + c1) * (va + vb + c2));
      total += val;
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

double landmark_error(const LandmarkSet& lm_pred, const LandmarkSet& lm_ref,
                      double image_size) {
  const size_t n = lm_pred.points.size();
  if (n != lm_ref.points.size()) fail_invalid("landmark_error: point count mismatch");
  if (n < 3) fail_geometry("landmark_error: need at least 3 points");
  if (!(image_size > 0.0)) fail_invalid("landmark_error: non-positive image size");

  Eigen::MatrixXd src(2, n), dst(2, n);
  for (size_t i = 0; i < n; ++i) {
    src.col(i) = lm_pred.points[i];
    dst.col(i) = lm_ref.points[i];
  }
  // Collinear or coincident configurations leave the similarity
  // under-determined.
  for (const auto* m : {&src, &dst}) {
    const Eigen::MatrixXd centered = m->colwise() - m->rowwise().mean();
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered);
    if (svd.singularValues()(1) < 1e-9 * std::max(1.0, svd.singularValues()(0)))
      fail_geometry("landmark_error: degenerate (collinear) landmark configuration");
  }

  const Eigen::Matrix3d t = Eigen::umeyama(src, dst, true);
  double total = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d p(lm_pred.points[i].x(), lm_pred.points[i].y(), 1.0);
    const Eigen::Vector3d q = t * p;
    total += (q.head<2>() - lm_ref.points[i]).norm();
  }
  return total / static_cast<double>(n) / image_size;
}

}  // namespace dolly
