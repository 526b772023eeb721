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

#include <cmath>
#include <random>

#include "doctest.h"
#include "moseg/detector.hpp"
#include "moseg/stn.hpp"

using namespace moseg;
using ad::Var;

namespace {

Tensor randomFrame(int n, int s, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> u(0.f, 1.f);
    Tensor t(n > 0 ? std::vector<int>{n, 3, s, s} : std::vector<int>{3, s, s});
    for (auto& v : t.data) v = u(rng);
    return t;
}

}  // namespace

TEST_CASE("decode_cell hand examples") {
    det::DetectorConfig cfg;  // 8x8, scales [0.2, 0.8], limit 1.5 cell widths

    auto [b0, l0] = det::decodeCell({0, 0, 0, 0, 0.37f}, 0, cfg);
    CHECK(b0.cx == doctest::Approx(0.0625f).epsilon(1e-6));
    CHECK(b0.cy == doctest::Approx(0.0625f).epsilon(1e-6));
    CHECK(b0.w == doctest::Approx(0.5f).epsilon(1e-6));
    CHECK(b0.h == doctest::Approx(0.5f).epsilon(1e-6));
    CHECK(l0 == 0.37f);

    // saturated positive offset from cell (0,0): 0.0625 + 1.5*0.125 = 0.25
    auto [b1, l1] = det::decodeCell({40.f, 0, 0, 0, 0}, 0, cfg);
    CHECK(b1.cx == doctest::Approx(0.25f).epsilon(1e-5));

    auto [b2, l2] = det::decodeCell({0, 0, -40.f, 0, 0}, 0, cfg);
    CHECK(b2.w == doctest::Approx(0.2f).epsilon(1e-5));

    // saturated negative offset clamps the center at 0
    auto [b3, l3] = det::decodeCell({-40.f, -40.f, 0, 0, 0}, 0, cfg);
    CHECK(b3.cx == 0.f);
    CHECK(b3.cy == 0.f);

    // cell centers of the last cell
    auto [b4, l4] = det::decodeCell({0, 0, 0, 0, 0}, 63, cfg);
    CHECK(b4.cx == doctest::Approx(1.f - 0.0625f).epsilon(1e-6));
    CHECK(b4.cy == doctest::Approx(1.f - 0.0625f).epsilon(1e-6));
}

TEST_CASE("detect: structural contract on a 64-cell grid") {
    det::DetectorConfig cfg;
    nn::Rng rng(1);
    det::Detector d(cfg, 64, rng);
    auto ps = d.detect(ad::constant(randomFrame(0, 64, 2)));
    REQUIRE(ps.size() == 1);
    CHECK(ps[0].boxes->value.shape == std::vector<int>{64, 4});
    double s = 0;
    for (float v : ps[0].probs->value.data) s += v;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-6));
    for (int c = 0; c < 64; ++c) {
        auto b = ps[0].box(c);
        CHECK(b.w >= 0.2f);
        CHECK(b.w <= 0.8f);
        CHECK(b.cx >= 0.f);
        CHECK(b.cx <= 1.f);
    }
}

TEST_CASE("detect: batching transparency") {
    det::DetectorConfig cfg;
    cfg.grid_h = cfg.grid_w = 4;
    nn::Rng rng(3);
    det::Detector d(cfg, 32, rng);
    Tensor f0 = randomFrame(0, 32, 4), f1 = randomFrame(0, 32, 5);
    Tensor fb({2, 3, 32, 32});
    std::copy(f0.data.begin(), f0.data.end(), fb.data.begin());
    std::copy(f1.data.begin(), f1.data.end(), fb.data.begin() + f0.numel());
    auto batched = d.detect(ad::constant(fb));
    auto s0 = d.detect(ad::constant(f0)), s1 = d.detect(ad::constant(f1));
    REQUIRE(batched.size() == 2);
    for (size_t i = 0; i < batched[0].boxes->value.data.size(); ++i) {
        CHECK(batched[0].boxes->value.data[i] ==
              doctest::Approx(s0[0].boxes->value.data[i]).epsilon(1e-5));
        CHECK(batched[1].boxes->value.data[i] ==
              doctest::Approx(s1[0].boxes->value.data[i]).epsilon(1e-5));
    }
    for (size_t i = 0; i < 16; ++i)
        CHECK(batched[1].probs->value.data[i] ==
              doctest::Approx(s1[0].probs->value.data[i]).epsilon(1e-5));
}

TEST_CASE("detect rejects a frame size not divisible by the grid") {
    det::DetectorConfig cfg;  // 8x8
    CHECK_THROWS(det::Detector(cfg, 60));
}

TEST_CASE("decodeBoxesOp gradients match finite differences") {
    det::DetectorConfig cfg;
    cfg.grid_h = cfg.grid_w = 2;
    for (auto basis : {det::OffsetBasis::cell, det::OffsetBasis::box}) {
        cfg.offset_basis = basis;
        std::mt19937_64 rng(7);
        // small raws keep the decoded center away from the [0,1] clamp kink
        std::uniform_real_distribution<float> u(-0.25f, 0.25f);
        Tensor raw({4, 2, 2});
        for (auto& v : raw.data) v = u(rng);
        Var rv = ad::leaf(raw, true);
        // weighted sum so every output entry has a distinct gradient
        Tensor wts({cfg.numCells(), 4});
        for (size_t i = 0; i < wts.data.size(); ++i) wts.data[i] = 0.3f + 0.1f * (float)i;
        auto build = [&] {
            Var boxes = det::decodeBoxesOp(rv, cfg);
            return ad::dot(boxes, ad::constant(wts));
        };
        Var root = build();
        rv->zeroGrad();
        ad::backward(root);
        for (size_t i = 0; i < raw.data.size(); ++i) {
            float h = 1e-3f, orig = rv->value.data[i];
            rv->value.data[i] = orig + h;
            float up = build()->scalar();
            rv->value.data[i] = orig - h;
            float dn = build()->scalar();
            rv->value.data[i] = orig;
            float fd = (up - dn) / (2 * h);
            // float32 evaluation limits central differences to ~1e-3 here
            CHECK(std::abs(rv->grad.data[i] - fd) <= 1e-3f * std::max(1.f, std::abs(fd)));
        }
    }
}

TEST_CASE("top-k selection and tie-breaking") {
    std::vector<float> onehot(64, 0.f);
    onehot[10] = 1.f;
    CHECK(det::topKCells(onehot, 1) == std::vector<int>{10});

    std::vector<float> uniform(64, 1.f / 64.f);
    CHECK(det::topKCells(uniform, 2) == std::vector<int>{0, 1});

    std::vector<float> p(64, 0.f);
    p[0] = 0.5f;
    p[1] = 0.3f;
    p[2] = 0.2f;
    CHECK(det::topKCells(p, 2) == std::vector<int>{0, 1});
    CHECK(det::topKCells(p, 0).empty());
}

TEST_CASE("regressBox produces valid normalized boxes") {
    det::DetectorConfig cfg;
    cfg.grid_h = cfg.grid_w = 4;
    nn::Rng rng(9);
    det::Detector d(cfg, 32, rng);
    auto boxes = d.regressBox(ad::constant(randomFrame(2, 32, 10)));
    REQUIRE(boxes.size() == 2);
    for (const auto& bv : boxes) {
        auto b = stn::boxFromVar(bv);
        CHECK(b.cx >= 0.f);
        CHECK(b.cx <= 1.f);
        CHECK(b.w >= cfg.scale_min);
        CHECK(b.w <= cfg.scale_max);
    }
}
