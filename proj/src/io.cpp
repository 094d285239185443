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

#include "dolly/io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

#include "json.hpp"

namespace dolly {
namespace {

using json = nlohmann::json;

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::string& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) fail_io("cannot open '" + path + "'");
  return f;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

// ---------------------------------------------------------------- PNG

Image read_png(const std::string& path) {
  FilePtr fp = open_file(path, "rb");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail_io("libpng init failed");
  }
  std::vector<png_bytep> row_ptrs;
  std::vector<png_byte> buffer;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail_io("failed to decode PNG '" + path + "'");
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  png_set_palette_to_rgb(png);
  png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_swap(png);  // 16-bit samples as little-endian in memory
  png_read_update_info(png, info);

  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  const int channels = png_get_channels(png, info);
  const int depth = png_get_bit_depth(png, info);
  const size_t stride = png_get_rowbytes(png, info);

  buffer.resize(stride * h);
  row_ptrs.resize(h);
  for (int y = 0; y < h; ++y) row_ptrs[y] = buffer.data() + stride * y;
  png_read_image(png, row_ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  Image img(w, h, channels);
  if (depth == 8) {
    for (int y = 0; y < h; ++y) {
      const png_byte* row = buffer.data() + stride * y;
      for (int x = 0; x < w; ++x)
        for (int c = 0; c < channels; ++c)
          img.at(x, y, c) = static_cast<float>(row[x * channels + c]) / 255.0f;
    }
  } else if (depth == 16) {
    for (int y = 0; y < h; ++y) {
      const uint16_t* row = reinterpret_cast<const uint16_t*>(buffer.data() + stride * y);
      for (int x = 0; x < w; ++x)
        for (int c = 0; c < channels; ++c)
          img.at(x, y, c) = static_cast<float>(row[x * channels + c]) / 65535.0f;
    }
  } else {
    fail_io("unsupported PNG bit depth in '" + path + "'");
  }
  return img;
}

namespace {

void write_png_impl(const std::string& path, const Image& img, int bit_depth) {
  const int channels = img.channels();
  int color_type;
  switch (channels) {
    case 1: color_type = PNG_COLOR_TYPE_GRAY; break;
    case 3: color_type = PNG_COLOR_TYPE_RGB; break;
    case 4: color_type = PNG_COLOR_TYPE_RGBA; break;
    default: fail_invalid("write_png: unsupported channel count");
  }
  FilePtr fp = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    fail_io("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail_io("failed to encode PNG '" + path + "'");
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, img.width(), img.height(), bit_depth, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_set_swap(png);

  const int w = img.width(), h = img.height();
  if (bit_depth == 8) {
    std::vector<png_byte> row(static_cast<size_t>(w) * channels);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x)
        for (int c = 0; c < channels; ++c) {
          const float v = std::clamp(img.at(x, y, c), 0.0f, 1.0f);
          row[static_cast<size_t>(x) * channels + c] =
              static_cast<png_byte>(std::lround(v * 255.0f));
        }
      png_write_row(png, row.data());
    }
  } else {
    std::vector<uint16_t> row(static_cast<size_t>(w) * channels);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x)
        for (int c = 0; c < channels; ++c) {
          const float v = std::clamp(img.at(x, y, c), 0.0f, 1.0f);
          row[static_cast<size_t>(x) * channels + c] =
              static_cast<uint16_t>(std::lround(v * 65535.0f));
        }
      png_write_row(png, reinterpret_cast<png_bytep>(row.data()));
    }
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

void write_png8(const std::string& path, const Image& img) { write_png_impl(path, img, 8); }
void write_png16(const std::string& path, const Image& img) { write_png_impl(path, img, 16); }

// ---------------------------------------------------------------- PFM

DepthMap read_pfm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_io("cannot open '" + path + "'");
  std::string magic;
  in >> magic;
  if (magic != "Pf") fail_io("'" + path + "' is not a single-channel PFM");
  int w = 0, h = 0;
  double scale = 0.0;
  in >> w >> h >> scale;
  in.get();  // single whitespace before the raster
  if (w <= 0 || h <= 0) fail_io("bad PFM dimensions in '" + path + "'");
  if (scale >= 0.0) fail_io("big-endian PFM not supported ('" + path + "')");

  std::vector<float> raster(static_cast<size_t>(w) * h);
  in.read(reinterpret_cast<char*>(raster.data()), raster.size() * sizeof(float));
  if (!in) fail_io("truncated PFM '" + path + "'");

  DepthMap depth(w, h);
  // PFM scanlines run bottom-to-top.
  for (int y = 0; y < h; ++y) {
    const float* row = raster.data() + static_cast<size_t>(h - 1 - y) * w;
    for (int x = 0; x < w; ++x) depth.set(x, y, static_cast<double>(row[x]));
  }
  return depth;
}

void write_pfm(const std::string& path, const DepthMap& depth) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail_io("cannot open '" + path + "' for writing");
  out << "Pf\n" << depth.width() << " " << depth.height() << "\n-1.0\n";
  std::vector<float> row(depth.width());
  for (int y = depth.height() - 1; y >= 0; --y) {
    for (int x = 0; x < depth.width(); ++x)
      row[x] = depth.valid(x, y) ? static_cast<float>(depth.z(x, y)) : 0.0f;
    out.write(reinterpret_cast<const char*>(row.data()), row.size() * sizeof(float));
  }
  if (!out) fail_io("failed writing PFM '" + path + "'");
}

// ------------------------------------------------- 16-bit PNG depth

DepthMap read_depth_png16(const std::string& path) {
  const json sidecar = json::parse(read_text_file(path + ".json"));
  const double scale = sidecar.at("scale_m_per_unit").get<double>();
  if (!(scale > 0.0)) fail_io("bad scale in sidecar of '" + path + "'");
  const Image img = read_png(path);
  if (img.channels() != 1) fail_io("depth PNG must be single-channel: '" + path + "'");
  DepthMap depth(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      const double raw = std::lround(static_cast<double>(img.at(x, y, 0)) * 65535.0);
      if (raw > 0.0) depth.set(x, y, raw * scale);
    }
  return depth;
}

void write_depth_png16(const std::string& path, const DepthMap& depth, double scale_m_per_unit) {
  if (!(scale_m_per_unit > 0.0)) fail_invalid("write_depth_png16: scale must be positive");
  Image img(depth.width(), depth.height(), 1);
  for (int y = 0; y < depth.height(); ++y)
    for (int x = 0; x < depth.width(); ++x) {
      if (!depth.valid(x, y)) continue;
      const double units = depth.z(x, y) / scale_m_per_unit;
      img.at(x, y, 0) = static_cast<float>(std::clamp(units, 1.0, 65535.0) / 65535.0);
    }
  write_png16(path, img);
  json sidecar;
  sidecar["scale_m_per_unit"] = scale_m_per_unit;
  write_text_file(path + ".json", sidecar.dump(2) + "\n");
}

DepthMap read_depth_any(const std::string& path) {
  if (ends_with(path, ".pfm")) return read_pfm(path);
  if (ends_with(path, ".png")) return read_depth_png16(path);
  fail_io("unsupported depth format: '" + path + "' (expected .pfm or .png)");
}

// ---------------------------------------------------------------- tensor

Image read_tensor(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_io("cannot open '" + path + "'");
  uint32_t header_len = 0;
  in.read(reinterpret_cast<char*>(&header_len), sizeof(header_len));
  std::string header_text(header_len, '\0');
  in.read(header_text.data(), header_len);
  if (!in) fail_io("truncated tensor header in '" + path + "'");
  const json header = json::parse(header_text);
  const int w = header.at("w").get<int>();
  const int h = header.at("h").get<int>();
  const int c = header.at("c").get<int>();
  if (header.at("dtype").get<std::string>() != "f32")
    fail_io("tensor dtype must be f32: '" + path + "'");
  if (header.at("layout").get<std::string>() != "hwc")
    fail_io("tensor layout must be hwc: '" + path + "'");
  if (w <= 0 || h <= 0 || c <= 0) fail_io("bad tensor dimensions in '" + path + "'");

  std::vector<float> hwc(static_cast<size_t>(w) * h * c);
  in.read(reinterpret_cast<char*>(hwc.data()), hwc.size() * sizeof(float));
  if (!in) fail_io("truncated tensor payload in '" + path + "'");

  Image img(w, h, c);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int ch = 0; ch < c; ++ch)
        img.at(x, y, ch) = hwc[(static_cast<size_t>(y) * w + x) * c + ch];
  return img;
}

void write_tensor(const std::string& path, const Image& img) {
  json header;
  header["w"] = img.width();
  header["h"] = img.height();
  header["c"] = img.channels();
  header["dtype"] = "f32";
  header["layout"] = "hwc";
  const std::string header_text = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) fail_io("cannot open '" + path + "' for writing");
  const uint32_t header_len = static_cast<uint32_t>(header_text.size());
  out.write(reinterpret_cast<const char*>(&header_len), sizeof(header_len));
  out.write(header_text.data(), header_len);
  std::vector<float> hwc(static_cast<size_t>(img.width()) * img.height() * img.channels());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int ch = 0; ch < img.channels(); ++ch)
        hwc[(static_cast<size_t>(y) * img.width() + x) * img.channels() + ch] = img.at(x, y, ch);
  out.write(reinterpret_cast<const char*>(hwc.data()), hwc.size() * sizeof(float));
  if (!out) fail_io("failed writing tensor '" + path + "'");
}

// ---------------------------------------------------------------- JSON

CameraSpec read_camera_json(const std::string& path) {
  const json j = json::parse(read_text_file(path));
  CameraSpec spec;
  spec.k.f = j.at("f").get<double>();
  spec.k.cx = j.at("cx").get<double>();
  spec.k.cy = j.at("cy").get<double>();
  spec.width = j.at("width").get<int>();
  spec.height = j.at("height").get<int>();
  if (!spec.k.valid() || spec.width <= 0 || spec.height <= 0)
    fail_invalid("invalid camera parameters in '" + path + "'");
  return spec;
}

void write_camera_json(const std::string& path, const CameraSpec& spec) {
  json j;
  j["f"] = spec.k.f;
  j["cx"] = spec.k.cx;
  j["cy"] = spec.k.cy;
  j["width"] = spec.width;
  j["height"] = spec.height;
  write_text_file(path, j.dump(2) + "\n");
}

std::string transform_to_json(const RigidTransform& m) {
  json j;
  std::vector<double> r(9);
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) r[static_cast<size_t>(i) * 3 + k] = m.rotation()(i, k);
  j["r"] = r;
  j["t"] = {m.translation_vec().x(), m.translation_vec().y(), m.translation_vec().z()};
  return j.dump();
}

RigidTransform transform_from_json(const std::string& json_text) {
  const json j = json::parse(json_text);
  const auto r = j.at("r").get<std::vector<double>>();
  const auto t = j.at("t").get<std::vector<double>>();
  if (r.size() != 9 || t.size() != 3) fail_invalid("transform JSON needs 9 r and 3 t entries");
  Eigen::Matrix3d rm;
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) rm(i, k) = r[static_cast<size_t>(i) * 3 + k];
  return RigidTransform::from(rm, Eigen::Vector3d(t[0], t[1], t[2]));
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_io("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail_io("cannot open '" + path + "' for writing");
  out << content;
  if (!out) fail_io("failed writing '" + path + "'");
}

}  // namespace dolly
