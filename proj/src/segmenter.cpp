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

#include "moseg/segmenter.hpp"

namespace moseg::seg {

Segmenter::Segmenter(int crop_size, nn::Rng& rng) : crop_size_(crop_size) { build(&rng); }
Segmenter::Segmenter(int crop_size) : crop_size_(crop_size) { build(nullptr); }

void Segmenter::build(nn::Rng* rng) {
    if (crop_size_ < 16 || (crop_size_ & (crop_size_ - 1)))
        throw std::invalid_argument("Segmenter: crop size must be a power of two >= 16");
    nn::Rng local(7);
    nn::Rng& r = rng ? *rng : local;
    int stages = 0;
    while ((crop_size_ >> stages) > 4) ++stages;  // encode down to 4x4
    // Keep 16 * bottleneck_ch < crop^2 * 3 / 8.
    int cap = (crop_size_ * crop_size_ * 3 / 8 - 1) / 16;
    encCh_.clear();
    int in_ch = 3;
    for (int s = 0; s < stages; ++s) {
        int out_ch = std::min({16 << s, 64, cap});
        nn::createConvBlock(params_, "segmenter.enc" + std::to_string(s), in_ch, out_ch, 3, r);
        encCh_.push_back(out_ch);
        in_ch = out_ch;
    }
    for (int s = stages - 1; s >= 0; --s) {
        // skip connections only on the two topmost decoder stages
        int skip = (s == 1 || s == 2) ? encCh_[s - 1] : 0;
        int out_ch = s > 0 ? encCh_[s - 1] : 16;
        nn::createConvBlock(params_, "segmenter.dec" + std::to_string(s), in_ch + skip, out_ch, 3,
                            r);
        in_ch = out_ch;
    }
    params_.create("segmenter.recon.w", {3, in_ch, 3, 3}, r, (float)(in_ch * 9));
    params_.createZeros("segmenter.recon.b", {3});
    params_.create("segmenter.mask.w", {1, in_ch, 3, 3}, r, (float)(in_ch * 9));
    params_.createZeros("segmenter.mask.b", {1});
}

int Segmenter::bottleneckVolume() const { return 16 * encCh_.back(); }

SegOutput Segmenter::segment(const Var& patch) const {
    int sz = patch->value.shape[patch->value.ndim() - 1];
    if (sz != crop_size_)
        throw std::invalid_argument("Segmenter: patch size does not match configured crop size");
    int stages = (int)encCh_.size();
    std::vector<Var> skips;
    Var x = patch;
    for (int s = 0; s < stages; ++s) {
        x = nn::convBlock(x, params_, "segmenter.enc" + std::to_string(s), 2);
        skips.push_back(x);
    }
    for (int s = stages - 1; s >= 0; --s) {
        x = nn::upsampleNearest2(x);
        if (s == 1 || s == 2) x = ad::concatChannels(x, skips[s - 1]);
        x = nn::convBlock(x, params_, "segmenter.dec" + std::to_string(s), 1);
    }
    SegOutput out;
    out.recon = ad::sigmoid(nn::conv2d(x, params_.get("segmenter.recon.w"),
                                       params_.get("segmenter.recon.b"), 1, 1));
    out.mask = ad::sigmoid(nn::conv2d(x, params_.get("segmenter.mask.w"),
                                      params_.get("segmenter.mask.b"), 1, 1));
    return out;
}

}  // namespace moseg::seg
