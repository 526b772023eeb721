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

#include "moseg/detector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace moseg::det {

void DetectorConfig::validate() const {
    if (grid_h <= 0 || grid_w <= 0) throw std::invalid_argument("DetectorConfig: bad grid");
    if (!(0.f < scale_min && scale_min < scale_max && scale_max <= 1.f))
        throw std::invalid_argument("DetectorConfig: need 0 < scale_min < scale_max <= 1");
    if (offset_limit_factor <= 0.f)
        throw std::invalid_argument("DetectorConfig: offset_limit_factor must be > 0");
}

std::pair<BoxGeometry, float> decodeCell(const std::array<float, 5>& raw, int cell_index,
                                         const DetectorConfig& config) {
    if (cell_index < 0 || cell_index >= config.numCells())
        throw std::out_of_range("decodeCell: cell index out of range");
    int gy = cell_index / config.grid_w;
    int gx = cell_index % config.grid_w;
    float cw = 1.f / config.grid_w, ch = 1.f / config.grid_h;
    float scale = config.scale_max - config.scale_min;
    BoxGeometry b;
    b.w = config.scale_min + 1.f / (1.f + std::exp(-raw[2])) * scale;
    b.h = config.scale_min + 1.f / (1.f + std::exp(-raw[3])) * scale;
    float basis_x = config.offset_basis == OffsetBasis::cell ? cw : b.w;
    float basis_y = config.offset_basis == OffsetBasis::cell ? ch : b.h;
    b.cx = std::clamp((gx + 0.5f) * cw + std::tanh(raw[0]) * config.offset_limit_factor * basis_x,
                      0.f, 1.f);
    b.cy = std::clamp((gy + 0.5f) * ch + std::tanh(raw[1]) * config.offset_limit_factor * basis_y,
                      0.f, 1.f);
    return {b, raw[4]};
}

std::vector<int> topKCells(const std::vector<float>& probs, int k) {
    if (k > (int)probs.size()) throw std::invalid_argument("topKCells: k > C");
    std::vector<int> idx(probs.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return probs[a] > probs[b]; });
    idx.resize(std::max(0, k));
    return idx;
}

std::vector<BoxGeometry> sampleTopK(const ProposalSet& proposals, int k) {
    std::vector<BoxGeometry> out;
    for (int c : topKCells(proposals.probList(), k)) out.push_back(proposals.box(c));
    return out;
}

/// raw: [4,gh,gw] head output -> [C,4] decoded boxes.
ad::Var decodeBoxesOp(const ad::Var& raw, const DetectorConfig& cfg) {
    int gh = cfg.grid_h, gw = cfg.grid_w, C = gh * gw;
    Tensor out({C, 4});
    for (int c = 0; c < C; ++c) {
        int gy = c / gw, gx = c % gw;
        std::array<float, 5> r{raw->value.at(0, gy, gx), raw->value.at(1, gy, gx),
                               raw->value.at(2, gy, gx), raw->value.at(3, gy, gx), 0.f};
        auto [b, logit] = decodeCell(r, c, cfg);
        out[(size_t)c * 4 + 0] = b.cx;
        out[(size_t)c * 4 + 1] = b.cy;
        out[(size_t)c * 4 + 2] = b.w;
        out[(size_t)c * 4 + 3] = b.h;
    }
    auto n = std::make_shared<ad::Node>(std::move(out));
    n->parents = {raw};
    n->requires_grad = raw->requires_grad;
    if (n->requires_grad) {
        ad::Node* self = n.get();
        n->backprop = [self, raw, cfg, gh, gw, C] {
            raw->ensureGrad();
            float cw = 1.f / gw, chh = 1.f / gh;
            float scale = cfg.scale_max - cfg.scale_min;
            for (int c = 0; c < C; ++c) {
                int gy = c / gw, gx = c % gw;
                float tdx = std::tanh(raw->value.at(0, gy, gx));
                float tdy = std::tanh(raw->value.at(1, gy, gx));
                float sw = 1.f / (1.f + std::exp(-raw->value.at(2, gy, gx)));
                float sh = 1.f / (1.f + std::exp(-raw->value.at(3, gy, gx)));
                float gcx = self->grad[(size_t)c * 4 + 0];
                float gcy = self->grad[(size_t)c * 4 + 1];
                float gw_ = self->grad[(size_t)c * 4 + 2];
                float gh_ = self->grad[(size_t)c * 4 + 3];
                // zero the center gradient where the [0,1] clamp binds
                if (self->value[(size_t)c * 4 + 0] <= 0.f || self->value[(size_t)c * 4 + 0] >= 1.f)
                    gcx = 0.f;
                if (self->value[(size_t)c * 4 + 1] <= 0.f || self->value[(size_t)c * 4 + 1] >= 1.f)
                    gcy = 0.f;
                float bx = cfg.offset_basis == OffsetBasis::cell ? cw
                                                                 : cfg.scale_min + sw * scale;
                float by = cfg.offset_basis == OffsetBasis::cell ? chh
                                                                 : cfg.scale_min + sh * scale;
                raw->grad.at(0, gy, gx) += gcx * (1 - tdx * tdx) * cfg.offset_limit_factor * bx;
                raw->grad.at(1, gy, gx) += gcy * (1 - tdy * tdy) * cfg.offset_limit_factor * by;
                float dwdr = sw * (1 - sw) * scale;
                float dhdr = sh * (1 - sh) * scale;
                raw->grad.at(2, gy, gx) += gw_ * dwdr;
                raw->grad.at(3, gy, gx) += gh_ * dhdr;
                if (cfg.offset_basis == OffsetBasis::box) {
                    raw->grad.at(2, gy, gx) += gcx * tdx * cfg.offset_limit_factor * dwdr;
                    raw->grad.at(3, gy, gx) += gcy * tdy * cfg.offset_limit_factor * dhdr;
                }
            }
        };
    }
    return n;
}

namespace {

ad::Var flattenTo1d(const ad::Var& x) {
    // view helper: [1,gh,gw] logits map -> [C]
    Tensor out({x->value.numel()}, x->value.data);
    auto n = std::make_shared<ad::Node>(std::move(out));
    n->parents = {x};
    n->requires_grad = x->requires_grad;
    if (n->requires_grad) {
        ad::Node* self = n.get();
        n->backprop = [self, x] {
            x->ensureGrad();
            for (int i = 0; i < self->grad.numel(); ++i) x->grad[i] += self->grad[i];
        };
    }
    return n;
}

}  // namespace

Detector::Detector(const DetectorConfig& cfg, int image_size, nn::Rng& rng)
    : cfg_(cfg), image_size_(image_size) {
    buildArchitecture(&rng);
}

Detector::Detector(const DetectorConfig& cfg, int image_size) : cfg_(cfg), image_size_(image_size) {
    buildArchitecture(nullptr);
}

void Detector::buildArchitecture(nn::Rng* rng) {
    cfg_.validate();
    if (image_size_ % cfg_.grid_h != 0 || image_size_ % cfg_.grid_w != 0)
        throw std::invalid_argument("Detector: frame size must be divisible by grid dims");
    int ratio = image_size_ / cfg_.grid_h;
    int stages = 0;
    while ((1 << stages) < ratio) ++stages;
    if ((1 << stages) != ratio)
        throw std::invalid_argument("Detector: image/grid ratio must be a power of two");
    stageChannels_.clear();
    int in_ch = 3;
    nn::Rng local(42);
    nn::Rng& r = rng ? *rng : local;
    for (int s = 0; s < stages; ++s) {
        int out_ch = cfg_.trunk_channels[std::min<size_t>(s, cfg_.trunk_channels.size() - 1)];
        nn::createConvBlock(params_, "detector.trunk" + std::to_string(s), in_ch, out_ch, 3, r);
        stageChannels_.push_back(out_ch);
        in_ch = out_ch;
    }
    nn::createConvBlock(params_, "detector.trunk_top", in_ch, in_ch, 3, r);  // stride-1 mixing stage
    params_.create("detector.boxhead.w", {4, in_ch, 3, 3}, r, (float)(in_ch * 9));
    params_.createZeros("detector.boxhead.b", {4});
    params_.create("detector.probhead.w", {1, in_ch, 3, 3}, r, (float)(in_ch * 9));
    params_.createZeros("detector.probhead.b", {1});
    params_.create("detector.reghead.w", {4, in_ch, cfg_.grid_h, cfg_.grid_w}, r,
                   (float)(in_ch * cfg_.numCells()));
    params_.createZeros("detector.reghead.b", {4});
}

std::vector<ProposalSet> Detector::detect(const Var& frame) const {
    Var x = frame;
    bool batched = frame->value.ndim() == 4;
    int H = batched ? frame->value.shape[2] : frame->value.shape[1];
    if (H != image_size_)
        throw std::invalid_argument("Detector: frame size does not match configured size");
    int n = batched ? frame->value.shape[0] : 1;
    for (size_t s = 0; s < stageChannels_.size(); ++s)
        x = nn::convBlock(x, params_, "detector.trunk" + std::to_string(s), 2);
    x = nn::convBlock(x, params_, "detector.trunk_top", 1);
    Var rawBox = nn::conv2d(x, params_.get("detector.boxhead.w"), params_.get("detector.boxhead.b"),
                            1, 1);
    // Probability head reads frozen trunk features: the categorical path and
    // the geometry path share no trainable parameter.
    Var rawLogit = nn::conv2d(ad::detach(x), params_.get("detector.probhead.w"),
                              params_.get("detector.probhead.b"), 1, 1);
    std::vector<ProposalSet> out;
    for (int i = 0; i < n; ++i) {
        Var rb = batched ? ad::pickBatch(rawBox, i) : rawBox;
        Var rl = batched ? ad::pickBatch(rawLogit, i) : rawLogit;
        ProposalSet ps;
        ps.boxes = decodeBoxesOp(rb, cfg_);
        ps.logits = flattenTo1d(rl);
        ps.probs = ad::softmaxFlat(ps.logits);
        out.push_back(std::move(ps));
    }
    return out;
}

std::vector<Var> Detector::regressBox(const Var& frame) const {
    Var x = frame;
    bool batched = frame->value.ndim() == 4;
    int n = batched ? frame->value.shape[0] : 1;
    for (size_t s = 0; s < stageChannels_.size(); ++s)
        x = nn::convBlock(x, params_, "detector.trunk" + std::to_string(s), 2);
    x = nn::convBlock(x, params_, "detector.trunk_top", 1);
    Var raw = nn::conv2d(x, params_.get("detector.reghead.w"), params_.get("detector.reghead.b"),
                         1, 0);  // [n,4,1,1]
    std::vector<Var> out;
    float scale = cfg_.scale_max - cfg_.scale_min;
    for (int i = 0; i < n; ++i) {
        Var r = flattenTo1d(batched ? ad::pickBatch(raw, i) : raw);  // [4]
        // cx = 0.5 + 0.5*tanh(dx); w = smin + sigmoid(rw)*(smax-smin)
        Var cx = ad::addScalar(ad::mulScalar(ad::tanhAct(ad::pick(r, 0)), 0.5f), 0.5f);
        Var cy = ad::addScalar(ad::mulScalar(ad::tanhAct(ad::pick(r, 1)), 0.5f), 0.5f);
        Var w = ad::addScalar(ad::mulScalar(ad::sigmoid(ad::pick(r, 2)), scale), cfg_.scale_min);
        Var h = ad::addScalar(ad::mulScalar(ad::sigmoid(ad::pick(r, 3)), scale), cfg_.scale_min);
        // pack into a 4-vector
        Tensor packed({4}, {cx->value[0], cy->value[0], w->value[0], h->value[0]});
        auto node = std::make_shared<ad::Node>(std::move(packed));
        node->parents = {cx, cy, w, h};
        node->requires_grad = cx->requires_grad || cy->requires_grad || w->requires_grad ||
                              h->requires_grad;
        if (node->requires_grad) {
            ad::Node* self = node.get();
            std::array<Var, 4> ps{cx, cy, w, h};
            node->backprop = [self, ps] {
                for (int k = 0; k < 4; ++k) {
                    ps[k]->ensureGrad();
                    ps[k]->grad[0] += self->grad[k];
                }
            };
        }
        out.push_back(node);
    }
    return out;
}

}  // namespace moseg::det
