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
#include <cstdio>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "dolly/io.hpp"
#include "oracles.hpp"

using namespace dolly;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("dolly_io_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("png 8-bit round trip is exact on the quantization grid") {
  TempDir tmp;
  std::mt19937_64 rng(5);
  Image img(37, 23, 3);
  for (size_t i = 0; i < img.size(); ++i) {
    const int level = static_cast<int>(rng() % 256);
    img.data()[i] = static_cast<float>(level) / 255.0f;
  }
  write_png8(tmp.file("x.png"), img);
  const Image back = read_png(tmp.file("x.png"));
  REQUIRE(back.same_shape(img));
  for (size_t i = 0; i < img.size(); ++i) CHECK(back.data()[i] == img.data()[i]);
}

TEST_CASE("png 16-bit gray round trip") {
  TempDir tmp;
  Image img(16, 9, 1);
  for (size_t i = 0; i < img.size(); ++i)
    img.data()[i] = static_cast<float>((i * 2654435761u) % 65536) / 65535.0f;
  write_png16(tmp.file("g.png"), img);
  const Image back = read_png(tmp.file("g.png"));
  REQUIRE(back.same_shape(img));
  for (size_t i = 0; i < img.size(); ++i)
    CHECK(back.data()[i] == doctest::Approx(img.data()[i]).epsilon(1e-9));
}

TEST_CASE("pfm round trip keeps f32 depth and invalid pixels") {
  TempDir tmp;
  DepthMap depth(13, 7);
  std::mt19937_64 rng(11);
  for (int y = 0; y < 7; ++y)
    for (int x = 0; x < 13; ++x)
      if ((x + y) % 3 != 0) depth.set(x, y, oracles::uniform(rng, 0.1, 5.0));
  write_pfm(tmp.file("d.pfm"), depth);
  const DepthMap back = read_pfm(tmp.file("d.pfm"));
  REQUIRE(back.width() == 13);
  REQUIRE(back.height() == 7);
  for (int y = 0; y < 7; ++y)
    for (int x = 0; x < 13; ++x) {
      CHECK(back.valid(x, y) == depth.valid(x, y));
      if (depth.valid(x, y))
        CHECK(back.z(x, y) == static_cast<double>(static_cast<float>(depth.z(x, y))));
    }
}

TEST_CASE("png16 depth with sidecar") {
  TempDir tmp;
  DepthMap depth(8, 8);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x)
      if (x > 0) depth.set(x, y, 0.001 * (x + 8 * y));
  write_depth_png16(tmp.file("d.png"), depth, 1e-4);
  const DepthMap back = read_depth_any(tmp.file("d.png"));
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      CHECK(back.valid(x, y) == depth.valid(x, y));
      if (depth.valid(x, y)) CHECK(back.z(x, y) == doctest::Approx(depth.z(x, y)).epsilon(1e-6));
    }
}

TEST_CASE("tensor file round trip is bit exact") {
  TempDir tmp;
  std::mt19937_64 rng(3);
  Image img(21, 5, 4);
  for (size_t i = 0; i < img.size(); ++i)
    img.data()[i] = static_cast<float>(oracles::uniform(rng, -10, 10));
  write_tensor(tmp.file("t.tensor"), img);
  const Image back = read_tensor(tmp.file("t.tensor"));
  REQUIRE(back.same_shape(img));
  for (size_t i = 0; i < img.size(); ++i) CHECK(back.data()[i] == img.data()[i]);
}

TEST_CASE("camera json round trip and validation") {
  TempDir tmp;
  CameraSpec spec;
  spec.k = {811.5, 320.25, 239.75};
  spec.width = 640;
  spec.height = 480;
  write_camera_json(tmp.file("cam.json"), spec);
  const CameraSpec back = read_camera_json(tmp.file("cam.json"));
  CHECK(back.k.f == spec.k.f);
  CHECK(back.k.cx == spec.k.cx);
  CHECK(back.k.cy == spec.k.cy);
  CHECK(back.width == spec.width);
  CHECK(back.height == spec.height);

  write_text_file(tmp.file("bad.json"), R"({"f":-1,"cx":0,"cy":0,"width":10,"height":10})");
  CHECK_THROWS_AS(read_camera_json(tmp.file("bad.json")), Error);
  CHECK_THROWS_AS(read_camera_json(tmp.file("missing.json")), Error);
}

TEST_CASE("transform json round trip") {
  const auto m = make_hzt_transform(0.07, -0.2);
  const auto back = transform_from_json(transform_to_json(m));
  CHECK((back.rotation() - m.rotation()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((back.translation_vec() - m.translation_vec()).norm() < 1e-15);

  CHECK_THROWS_AS(transform_from_json(R"({"r":[1,0,0,0,1,0,0,0],"t":[0,0,0]})"), Error);
}

TEST_CASE("io errors carry the io exit class") {
  try {
    read_png("/nonexistent/definitely_missing.png");
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::io_error);
  }
}
