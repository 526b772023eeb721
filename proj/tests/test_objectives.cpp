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

#include <random>

#include "doctest.h"
#include "moseg/objectives.hpp"

using namespace moseg;
using ad::Var;

namespace {

Tensor randomFrame(int s, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> u(0.f, 1.f);
    Tensor t({3, s, s});
    for (auto& v : t.data) v = u(rng);
    return t;
}

const obj::Perceptual& phi() {
    static obj::Perceptual p;
    return p;
}

}  // namespace

TEST_CASE("composite_loss: identity, symmetry, and pixel term") {
    obj::LossWeights w;
    Tensor a = randomFrame(16, 1), b = randomFrame(16, 2);
    CHECK(obj::compositeLoss(ad::constant(a), ad::constant(a), w, phi())->scalar() == 0.f);

    float ab = obj::compositeLoss(ad::constant(a), ad::constant(b), w, phi())->scalar();
    float ba = obj::compositeLoss(ad::constant(b), ad::constant(a), w, phi())->scalar();
    CHECK(ab == doctest::Approx(ba).epsilon(1e-6));

    // with the perceptual weight off, the loss is exactly mean((a-b)^2)
    obj::LossWeights pixelOnly;
    pixelOnly.perceptual = 0.f;
    Tensor zeros({3, 16, 16}), ones({3, 16, 16});
    std::fill(ones.data.begin(), ones.data.end(), 1.f);
    CHECK(obj::compositeLoss(ad::constant(zeros), ad::constant(ones), pixelOnly, phi())->scalar() ==
          doctest::Approx(1.f).epsilon(1e-6));

    // full weights: pixel term 1 plus a strictly positive perceptual gap
    float full = obj::compositeLoss(ad::constant(zeros), ad::constant(ones), w, phi())->scalar();
    CHECK(full > 1.f);
}

TEST_CASE("composite_loss: fixed-seed perceptual gap is reproducible") {
    obj::LossWeights w;
    Tensor zeros({3, 16, 16}), ones({3, 16, 16});
    std::fill(ones.data.begin(), ones.data.end(), 1.f);
    float v1 = obj::compositeLoss(ad::constant(zeros), ad::constant(ones), w, phi())->scalar();
    obj::Perceptual phi2;  // same default seed
    float v2 = obj::compositeLoss(ad::constant(zeros), ad::constant(ones), w, phi2)->scalar();
    CHECK(v1 == v2);
}

TEST_CASE("v_prior hand values") {
    auto vp = [](float mean, float lambda) {
        Tensor m({1, 4, 4});
        std::fill(m.data.begin(), m.data.end(), mean);
        return obj::vPrior(ad::constant(m), lambda)->scalar();
    };
    CHECK(vp(0.f, 0.005f) == doctest::Approx(0.01).epsilon(1e-9));
    CHECK(vp(0.005f, 0.005f) == doctest::Approx(0.005).epsilon(1e-9));
    CHECK(vp(0.055f, 0.005f) == doctest::Approx(0.055).epsilon(1e-9));
    // v_prior >= lambda always
    for (float m : {0.f, 0.001f, 0.005f, 0.2f, 1.f}) CHECK(vp(m, 0.005f) >= 0.005f - 1e-9f);
}

TEST_CASE("v_prior rejects out-of-range masks") {
    Tensor m({1, 2, 2}, {0.5f, 1.2f, 0.1f, 0.f});
    CHECK_THROWS(obj::vPrior(ad::constant(m), 0.005f));
}

TEST_CASE("prob_prior hand values and symmetry") {
    auto pp = [](std::vector<float> p) {
        Tensor t({(int)p.size()}, p);
        return obj::probPrior(ad::constant(t))->scalar();
    };
    std::vector<float> onehot(64, 0.f);
    onehot[7] = 1.f;
    CHECK(pp(onehot) == doctest::Approx(0.0).epsilon(1e-7));
    CHECK(pp(std::vector<float>(64, 1.f / 64.f)) == doctest::Approx(0.984375).epsilon(1e-6));
    CHECK(pp({0.5f, 0.3f, 0.2f}) == doctest::Approx(pp({0.2f, 0.5f, 0.3f})).epsilon(1e-7));
    CHECK(pp({0.5f, 0.3f, 0.2f}) >= 0.f);
    CHECK(pp({0.5f, 0.3f, 0.2f}) <= 1.f - 1.f / 3.f + 1e-6f);
}

TEST_CASE("regionLossVar matches the value-level region loss on aligned boxes") {
    Tensor target = randomFrame(16, 3);
    Tensor pred = target;
    for (auto& v : pred.data) v += 0.1f;
    BoxGeometry box{0.5f, 0.5f, 0.5f, 0.5f};
    Var rl = obj::regionLossVar(pred, target, stn::boxVar(box));
    CHECK(rl->scalar() == doctest::Approx(0.01).epsilon(2e-3));
}

TEST_CASE("regionLossVar is differentiable in the box") {
    Tensor target = randomFrame(16, 4);
    Tensor pred = randomFrame(16, 5);
    Var box = stn::boxVar({0.45f, 0.5f, 0.4f, 0.45f}, true);
    Var rl = obj::regionLossVar(pred, target, box);
    box->zeroGrad();
    ad::backward(rl);
    float gsum = 0;
    for (float g : box->grad.data) gsum += std::abs(g);
    CHECK(gsum > 0.f);
}

TEST_CASE("background objective: perfect inpainting gives 0 for every box") {
    Tensor frame = randomFrame(16, 6);
    obj::ObjectiveContext ctx;
    ctx.phi = &phi();
    Var g = obj::backgroundObjective(frame, frame, stn::boxVar({0.5f, 0.5f, 0.4f, 0.4f}),
                                     ad::constantScalar(1.f), ctx);
    CHECK(g->scalar() == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("G on C=2: gradient pushes probability toward the high-loss box") {
    // region losses {0.01 background box, 0.08 sprite box}; G = E[-loss].
    // Minimizing G must increase p(sprite).
    Tensor logits({2}, {0.f, 0.f});
    Var lg = ad::leaf(logits, true);
    Var p = ad::softmaxFlat(lg);
    std::vector<Var> terms = {ad::constantScalar(-0.01f), ad::constantScalar(-0.08f)};
    Var g = sampler::exhaustiveExpectationVar(p, terms);
    lg->zeroGrad();
    ad::backward(g);
    // descent direction: -grad. p(sprite)=index 1 must rise.
    CHECK(lg->grad.data[1] < 0.f);
    CHECK(lg->grad.data[0] > 0.f);
}

TEST_CASE("foreground objective: loss is finite, weighted, and routed") {
    const int S = 32;
    Tensor frame = randomFrame(S, 7);
    nn::Rng rng(8);
    seg::Segmenter segmenter(16, rng);
    inpaint::Inpainter inpainter(S, rng);
    obj::Perceptual ph;
    obj::ObjectiveContext ctx;
    ctx.segmenter = &segmenter;
    ctx.inpainter = &inpainter;
    ctx.phi = &ph;

    Var box = stn::boxVar({0.5f, 0.5f, 0.4f, 0.4f}, true);
    auto fr = obj::foregroundObjective(frame, box, ad::constantScalar(1.f), ctx);
    CHECK(std::isfinite(fr.loss->scalar()));
    CHECK(fr.pasted_mask->value.shape == std::vector<int>{1, S, S});

    auto fr2 = obj::foregroundObjective(frame, box, ad::constantScalar(2.f), ctx);
    CHECK(fr2.loss->scalar() == doctest::Approx(2.f * fr.loss->scalar()).epsilon(1e-5));

    // O reaches the box and the segmenter, never the inpainter
    segmenter.params().zeroGrads();
    inpainter.params().zeroGrads();
    box->zeroGrad();
    ad::backward(fr.loss);
    CHECK(segmenter.params().maxAbsGrad() > 0.f);
    CHECK(inpainter.params().gradsAllZero());
}

TEST_CASE("erase scale 1.1 is applied inside both objectives") {
    const int S = 32;
    Tensor frame = randomFrame(S, 9);
    nn::Rng rng(10);
    seg::Segmenter segmenter(16, rng);
    inpaint::Inpainter inpainter(S, rng);
    obj::Perceptual ph;
    obj::ObjectiveContext ctx;
    ctx.segmenter = &segmenter;
    ctx.inpainter = &inpainter;
    ctx.phi = &ph;
    BoxGeometry b{0.5f, 0.5f, 0.5f, 0.5f};
    auto fr = obj::foregroundObjective(frame, stn::boxVar(b), ad::constantScalar(1.f), ctx);
    // the background was synthesized from an erase of extent 0.55
    auto e = inpaint::erase(frame, b, ctx.erase_scale);
    Tensor want = inpainter.inpaint(e);
    CHECK(fr.inpainted_background.data == want.data);
    CHECK(e.erase_box.w == doctest::Approx(0.55f));
}
