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

#include "moseg/inpainter.hpp"

#include <cmath>
#include <deque>

namespace moseg::inpaint {

PixelRect rasterize(const BoxGeometry& box, int h, int w) {
    PixelRect r;
    r.x0 = std::clamp((int)std::lround((box.cx - box.w / 2) * w), 0, w);
    r.x1 = std::clamp((int)std::lround((box.cx + box.w / 2) * w), 0, w);
    r.y0 = std::clamp((int)std::lround((box.cy - box.h / 2) * h), 0, h);
    r.y1 = std::clamp((int)std::lround((box.cy + box.h / 2) * h), 0, h);
    return r;
}

ErasedInput erase(const Tensor& frame, const BoxGeometry& box, float scale) {
    if (scale <= 0.f) throw std::invalid_argument("erase: scale must be > 0");
    if (frame.ndim() != 3 || frame.shape[0] != 3)
        throw std::invalid_argument("erase: frame must be [3,H,W]");
    int h = frame.shape[1], w = frame.shape[2];
    ErasedInput out;
    out.erase_box = box.dilated(scale).clippedToUnit();
    out.pixels = Tensor({4, h, w});
    std::copy(frame.data.begin(), frame.data.end(), out.pixels.data.begin());
    PixelRect r = rasterize(out.erase_box, h, w);
    for (int y = r.y0; y < r.y1; ++y)
        for (int x = r.x0; x < r.x1; ++x) {
            for (int c = 0; c < 3; ++c) out.pixels.at(c, y, x) = 0.f;
            out.pixels.at(3, y, x) = 1.f;
        }
    return out;
}

double regionLoss(const Tensor& prediction, const Tensor& target, const BoxGeometry& box) {
    if (!prediction.sameShape(target))
        throw std::invalid_argument("regionLoss: shape mismatch");
    int h = prediction.shape[1], w = prediction.shape[2];
    PixelRect r = rasterize(box, h, w);
    if (r.area() == 0) return 0.0;
    double s = 0.0;
    for (int y = r.y0; y < r.y1; ++y)
        for (int x = r.x0; x < r.x1; ++x)
            for (int c = 0; c < 3; ++c) {
                double d = prediction.at(c, y, x) - target.at(c, y, x);
                s += d * d / 3.0;
            }
    return s / r.area();
}

Inpainter::Inpainter(int image_size, nn::Rng& rng) : image_size_(image_size) { build(&rng); }
Inpainter::Inpainter(int image_size) : image_size_(image_size) { build(nullptr); }

void Inpainter::build(nn::Rng* rng) {
    if (image_size_ < 16 || (image_size_ & (image_size_ - 1)))
        throw std::invalid_argument("Inpainter: image size must be a power of two >= 16");
    nn::Rng local(11);
    nn::Rng& r = rng ? *rng : local;
    int stages = 0;
    while ((image_size_ >> stages) > 8) ++stages;  // down to 8x8
    encCh_.clear();
    int in_ch = 4;
    for (int s = 0; s < stages; ++s) {
        int out_ch = std::min(16 << s, 64);
        nn::createConvBlock(params_, "inpainter.enc" + std::to_string(s), in_ch, out_ch, 3, r);
        encCh_.push_back(out_ch);
        in_ch = out_ch;
    }
    for (int s = stages - 1; s >= 0; --s) {
        int skip = (s == 1 || s == 2) ? encCh_[s - 1] : 0;
        int out_ch = s > 0 ? encCh_[s - 1] : 16;
        nn::createConvBlock(params_, "inpainter.dec" + std::to_string(s), in_ch + skip, out_ch, 3,
                            r);
        in_ch = out_ch;
    }
    params_.create("inpainter.head.w", {3, in_ch, 3, 3}, r, (float)(in_ch * 9));
    params_.createZeros("inpainter.head.b", {3});
}

Var Inpainter::forward(const Var& erased) const {
    int sz = erased->value.shape[erased->value.ndim() - 1];
    if (sz != image_size_)
        throw std::invalid_argument("Inpainter: input size does not match configured size");
    int stages = (int)encCh_.size();
    std::vector<Var> skips;
    Var x = erased;
    for (int s = 0; s < stages; ++s) {
        x = nn::convBlock(x, params_, "inpainter.enc" + std::to_string(s), 2);
        skips.push_back(x);
    }
    for (int s = stages - 1; s >= 0; --s) {
        x = nn::upsampleNearest2(x);
        if (s == 1 || s == 2) x = ad::concatChannels(x, skips[s - 1]);
        x = nn::convBlock(x, params_, "inpainter.dec" + std::to_string(s), 1);
    }
    return ad::sigmoid(
        nn::conv2d(x, params_.get("inpainter.head.w"), params_.get("inpainter.head.b"), 1, 1));
}

Tensor Inpainter::inpaint(const ErasedInput& input) const {
    Tensor pred = forward(ad::constant(input.pixels))->value;
    int h = pred.shape[1], w = pred.shape[2];
    Tensor out({3, h, w});
    // hard copy-through: only the erased region is synthesized
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            bool erased = input.pixels.at(3, y, x) > 0.5f;
            for (int c = 0; c < 3; ++c)
                out.at(c, y, x) = erased ? pred.at(c, y, x) : input.pixels.at(c, y, x);
        }
    return out;
}

float trainInpainter(Inpainter& net, const std::vector<Tensor>& frames,
                     const StageOneOptions& opts, nn::Rng& rng) {
    if (frames.empty()) throw std::invalid_argument("trainInpainter: empty dataset");
    int H = frames.front().shape[1], W = frames.front().shape[2];
    nn::Adam adam(opts.lr);
    std::uniform_real_distribution<float> uni(0.f, 1.f);
    std::uniform_int_distribution<size_t> pickFrame(0, frames.size() - 1);
    std::deque<float> recent;
    for (int step = 0; step < opts.steps; ++step) {
        Tensor batch({opts.batch_size, 4, H, W});
        std::vector<PixelRect> rects(opts.batch_size);
        std::vector<const Tensor*> targets(opts.batch_size);
        for (int b = 0; b < opts.batch_size; ++b) {
            const Tensor& frame = frames[pickFrame(rng)];
            targets[b] = &frame;
            BoxGeometry box;
            box.w = opts.scale_min + uni(rng) * (opts.scale_max - opts.scale_min);
            box.h = opts.scale_min + uni(rng) * (opts.scale_max - opts.scale_min);
            box.cx = box.w / 2 + uni(rng) * (1.f - box.w);
            box.cy = box.h / 2 + uni(rng) * (1.f - box.h);
            ErasedInput e = erase(frame, box, opts.erase_scale);
            rects[b] = rasterize(e.erase_box, H, W);
            std::copy(e.pixels.data.begin(), e.pixels.data.end(),
                      batch.data.begin() + (size_t)b * 4 * H * W);
        }
        Var pred = net.forward(ad::constant(std::move(batch)));  // [N,3,H,W]
        // region-restricted L2, area-normalized per image
        Var loss = ad::constantScalar(0.f);
        for (int b = 0; b < opts.batch_size; ++b) {
            const PixelRect& r = rects[b];
            if (r.area() == 0) continue;
            Var diff = ad::sub(ad::pickBatch(pred, b), ad::constant(*targets[b]));
            Tensor win({3, H, W});
            float wv = 1.f / (3.f * r.area());
            for (int c = 0; c < 3; ++c)
                for (int y = r.y0; y < r.y1; ++y)
                    for (int x = r.x0; x < r.x1; ++x) win.at(c, y, x) = wv;
            loss = ad::add(loss, ad::dot(ad::square(diff), ad::constant(std::move(win))));
        }
        loss = ad::mulScalar(loss, 1.f / opts.batch_size);
        ad::backward(loss);
        adam.step(net.params());
        if (opts.logger) opts.logger(step, loss->scalar());
        recent.push_back(loss->scalar());
        if (recent.size() > 32) recent.pop_front();
    }
    float s = 0.f;
    for (float v : recent) s += v;
    return recent.empty() ? 0.f : s / recent.size();
}

}  // namespace moseg::inpaint
