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

#include "moseg/objectives.hpp"

namespace moseg::obj {

Perceptual::Perceptual(uint64_t seed) {
    nn::Rng rng(seed);
    int chans[4] = {3, 8, 16, 16};
    for (int s = 0; s < 3; ++s)
        nn::createConvBlock(params_, "phi" + std::to_string(s), chans[s], chans[s + 1], 3, rng);
    params_.setRequiresGrad(false);
}

std::vector<Var> Perceptual::features(const Var& x) const {
    std::vector<Var> out;
    Var h = x;
    for (int s = 0; s < 3; ++s) {
        Var w = params_.get("phi" + std::to_string(s) + ".w");
        Var b = params_.get("phi" + std::to_string(s) + ".b");
        h = ad::tanhAct(nn::conv2d(h, w, b, 2, 1));
        out.push_back(h);
    }
    return out;
}

Var compositeLoss(const Var& a, const Var& b, const LossWeights& w, const Perceptual& phi) {
    if (!a->value.sameShape(b->value))
        throw std::invalid_argument("compositeLoss: shape mismatch");
    Var pixel = ad::meanAll(ad::square(ad::sub(a, b)));
    Var total = ad::mulScalar(pixel, w.pixel);
    if (w.perceptual > 0.f) {
        auto fa = phi.features(a);
        auto fb = phi.features(b);
        Var perc = ad::constantScalar(0.f);
        for (size_t s = 0; s < fa.size(); ++s)
            perc = ad::add(perc, ad::meanAll(ad::square(ad::sub(fa[s], fb[s]))));
        total = ad::add(total, ad::mulScalar(perc, w.perceptual / (float)fa.size()));
    }
    return total;
}

Var vPrior(const Var& pasted_mask, float lambda) {
    for (float v : pasted_mask->value.data)
        if (v < -1e-6f || v > 1.f + 1e-6f)
            throw std::invalid_argument("vPrior: mask values must lie in [0,1]");
    return ad::addScalar(ad::absVal(ad::addScalar(ad::meanAll(pasted_mask), -lambda)), lambda);
}

Var probPrior(const Var& p) {
    return ad::addScalar(ad::neg(ad::dot(p, p)), 1.f);
}

Var regionLossVar(const Tensor& prediction, const Tensor& target, const Var& box) {
    if (!prediction.sameShape(target))
        throw std::invalid_argument("regionLossVar: shape mismatch");
    int C = prediction.shape[0], H = prediction.shape[1], W = prediction.shape[2];
    Tensor err({1, H, W});
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            float s = 0.f;
            for (int c = 0; c < C; ++c) {
                float d = prediction.at(c, y, x) - target.at(c, y, x);
                s += d * d;
            }
            err.at(0, y, x) = s / C;
        }
    const int pw = 16;  // window patch resolution; interior weight is exactly 1
    Var ones = ad::constant(Tensor({1, pw, pw}, 1.f));
    Var win = stn::paste(ones, box, H, W);
    Var num = ad::dot(win, ad::constant(std::move(err)));
    Var den = ad::sumAll(win);
    if (den->value[0] <= 1e-9f) return ad::constantScalar(0.f);
    return ad::divElem(num, den);
}

ForegroundResult foregroundObjective(const Tensor& frame, const Var& box, const Var& is_weight,
                                     const ObjectiveContext& ctx) {
    int H = frame.shape[1], W = frame.shape[2];
    int cropSize = ctx.segmenter->cropSize();
    // B_c from the frozen inpainter; erase is a hard cut, so no gradient path.
    inpaint::ErasedInput erased =
        inpaint::erase(frame, stn::boxFromVar(box), ctx.erase_scale);
    Tensor background = ctx.inpainter->inpaint(erased);

    Var frameC = ad::constant(frame);
    Var patch = stn::crop(frameC, box, cropSize, cropSize);
    seg::SegOutput s = ctx.segmenter->segment(patch);
    Var composited = stn::composite(s.recon, s.mask, ad::constant(background), box);
    ForegroundResult r;
    r.loss = ad::mul(is_weight, compositeLoss(composited, frameC, ctx.weights, *ctx.phi));
    r.pasted_mask = stn::paste(s.mask, box, H, W);
    r.inpainted_background = std::move(background);
    return r;
}

Var backgroundObjective(const Tensor& frame, const Tensor& inpainted, const Var& box,
                        const Var& is_weight, const ObjectiveContext& ctx) {
    // erase dilation applied to the loss window as well
    Var dilated = ad::pack4(ad::pick(box, 0), ad::pick(box, 1),
                            ad::mulScalar(ad::pick(box, 2), ctx.erase_scale),
                            ad::mulScalar(ad::pick(box, 3), ctx.erase_scale));
    Var rl = regionLossVar(inpainted, frame, dilated);
    return ad::mul(is_weight, ad::neg(rl));
}

}  // namespace moseg::obj
