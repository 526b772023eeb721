// Copyright 2026 the moseg authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <filesystem>

#include "doctest.h"
#include "moseg/image_io.hpp"
#include "moseg/synthdata.hpp"

using namespace moseg;
namespace fs = std::filesystem;

namespace {

synth::SceneConfig smallConfig() {
    synth::SceneConfig c;
    c.image_size = 64;
    c.num_frames = 48;
    c.sprite_scale = 0.25f;
    c.sprite_speed = 2.f;
    return c;
}

}  // namespace

TEST_CASE("zero-motion degenerate config: frames identical") {
    synth::SceneConfig c;
    c.image_size = 32;
    c.num_frames = 2;
    c.sprite_speed = 0.f;
    c.camera_motion = synth::CameraMotion::static_cam;
    auto s = synth::generateSequence(c, 3);
    REQUIRE(s.size() == 2);
    CHECK(s[0].frame.data == s[1].frame.data);
    CHECK(s[0].gt_mask.data == s[1].gt_mask.data);
}

TEST_CASE("displacement invariant: 12 px sprite moving 2 px over 32 frames passes") {
    synth::SceneConfig c;
    c.image_size = 96;
    c.num_frames = 32;
    c.sprite_scale = 0.125f;  // 12 px wide
    c.sprite_speed = 2.f;     // 62 px total displacement >= 12 px
    CHECK_NOTHROW(synth::generateSequence(c, 5));
}

TEST_CASE("invariant violations are rejected with named errors") {
    synth::SceneConfig c = smallConfig();
    c.sprite_speed = 0.1f;  // 4.7 px total < 16 px sprite width
    CHECK_THROWS_WITH_AS(synth::generateSequence(c, 1),
                         doctest::Contains("min_displacement"), std::invalid_argument);
    c = smallConfig();
    c.contrast_gap = 0.f;
    CHECK_THROWS_WITH_AS(synth::generateSequence(c, 1), doctest::Contains("contrast_gap"),
                         std::invalid_argument);
    c = smallConfig();
    c.sprite_scale = 0.7f;
    CHECK_THROWS_WITH_AS(synth::generateSequence(c, 1), doctest::Contains("sprite_scale"),
                         std::invalid_argument);
}

TEST_CASE("determinism: same config and seed give identical sequences") {
    auto a = synth::generateSequence(smallConfig(), 11);
    auto b = synth::generateSequence(smallConfig(), 11);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].frame.data == b[i].frame.data);
        CHECK(a[i].gt_mask.data == b[i].gt_mask.data);
        CHECK(a[i].homography == b[i].homography);
    }
    auto c = synth::generateSequence(smallConfig(), 12);
    CHECK(a[0].frame.data != c[0].frame.data);
}

TEST_CASE("A1: every pixel uncovered strictly more often than covered") {
    auto s = synth::generateSequence(smallConfig(), 21);
    const int n = s[0].gt_mask.numel();
    std::vector<int> covered(n, 0);
    for (const auto& smp : s)
        for (int i = 0; i < n; ++i)
            if (smp.gt_mask.data[i] > 0.5f) ++covered[i];
    for (int c : covered) CHECK((int)s.size() - c > c);
}

TEST_CASE("A2: sprite/background contrast gap holds on every frame") {
    auto cfg = smallConfig();
    auto s = synth::generateSequence(cfg, 22);
    const int S = cfg.image_size;
    for (const auto& smp : s) {
        double mIn = 0, nIn = 0, mAnn = 0, nAnn = 0;
        float cx = smp.gt_box.cx * S, cy = smp.gt_box.cy * S;
        float rad = 2.f * cfg.sprite_scale * S;
        for (int y = 0; y < S; ++y)
            for (int x = 0; x < S; ++x) {
                float lum =
                    (smp.frame.at(0, y, x) + smp.frame.at(1, y, x) + smp.frame.at(2, y, x)) / 3.f;
                if (smp.gt_mask.data[(size_t)y * S + x] > 0.5f) {
                    mIn += lum;
                    ++nIn;
                } else if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= rad * rad) {
                    mAnn += lum;
                    ++nAnn;
                }
            }
        REQUIRE(nIn > 0);
        REQUIRE(nAnn > 0);
        CHECK(std::abs(mIn / nIn - mAnn / nAnn) >= cfg.contrast_gap - 1e-6);
    }
}

TEST_CASE("gt_box is the tight bounding rectangle of gt_mask") {
    auto s = synth::generateSequence(smallConfig(), 23);
    const int S = s[0].gt_mask.shape[0];
    for (const auto& smp : s) {
        int x0 = S, x1 = -1, y0 = S, y1 = -1;
        for (int y = 0; y < S; ++y)
            for (int x = 0; x < S; ++x)
                if (smp.gt_mask.data[(size_t)y * S + x] > 0.5f) {
                    x0 = std::min(x0, x);
                    x1 = std::max(x1, x);
                    y0 = std::min(y0, y);
                    y1 = std::max(y1, y);
                }
        REQUIRE(x1 >= 0);
        CHECK(smp.gt_box.cx == doctest::Approx((x0 + x1 + 1) / 2.f / S).epsilon(1e-5));
        CHECK(smp.gt_box.w == doctest::Approx((x1 - x0 + 1) / (float)S).epsilon(1e-5));
        CHECK(smp.gt_box.h == doctest::Approx((y1 - y0 + 1) / (float)S).epsilon(1e-5));
    }
}

TEST_CASE("static camera homographies are the identity") {
    auto s = synth::generateSequence(smallConfig(), 24);
    for (const auto& smp : s) {
        synth::Homography id{1, 0, 0, 0, 1, 0, 0, 0, 1};
        for (int i = 0; i < 9; ++i) CHECK(smp.homography[i] == doctest::Approx(id[i]).epsilon(1e-6));
    }
}

TEST_CASE("dataset round trip: masks exact, frames within quantization") {
    auto cfg = smallConfig();
    cfg.num_frames = 48;
    auto s = synth::generateSequence(cfg, 25);
    s.resize(4);
    fs::path dir = fs::temp_directory_path() / "moseg_test_roundtrip";
    fs::remove_all(dir);
    synth::saveDataset(s, dir.string());
    auto r = synth::loadDataset(dir.string());
    REQUIRE(r.size() == 4);
    for (size_t i = 0; i < 4; ++i) {
        CHECK(r[i].gt_mask.data == s[i].gt_mask.data);
        float maxd = 0;
        for (size_t j = 0; j < s[i].frame.data.size(); ++j)
            maxd = std::max(maxd, std::abs(r[i].frame.data[j] - s[i].frame.data[j]));
        CHECK(maxd <= 0.5f / 255.f + 1e-6f);
        CHECK(r[i].gt_box.cx == doctest::Approx(s[i].gt_box.cx).epsilon(1e-5));
        for (int k = 0; k < 9; ++k)
            CHECK(r[i].homography[k] == doctest::Approx(s[i].homography[k]).epsilon(1e-5));
    }
    fs::remove_all(dir);
}

TEST_CASE("missing frame file is reported by index") {
    auto cfg = smallConfig();
    auto s = synth::generateSequence(cfg, 26);
    s.resize(4);
    fs::path dir = fs::temp_directory_path() / "moseg_test_missing";
    fs::remove_all(dir);
    synth::saveDataset(s, dir.string());
    fs::remove(dir / "frames" / "000003.png");
    CHECK_THROWS_WITH_AS(synth::loadDataset(dir.string()), doctest::Contains("missing frame 3"),
                         std::runtime_error);
    fs::remove_all(dir);
}

TEST_CASE("quantization: 0.5 stores as byte 128 and reloads as 128/255") {
    CHECK(io::quantize(0.5f) == 128);
    Tensor f({3, 4, 4});
    std::fill(f.data.begin(), f.data.end(), 0.5f);
    fs::path p = fs::temp_directory_path() / "moseg_test_gray.png";
    io::saveImage(f, p.string());
    Tensor r = io::loadImage(p.string());
    for (float v : r.data) CHECK(v == doctest::Approx(128.f / 255.f).epsilon(1e-6));
    fs::remove(p);
}
