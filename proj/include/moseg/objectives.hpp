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

#pragma once

#include "moseg/inpainter.hpp"
#include "moseg/sampler.hpp"
#include "moseg/segmenter.hpp"
#include "moseg/stn.hpp"

namespace moseg::obj {

using ad::Var;

struct LossWeights {
    float pixel = 1.f;
    float perceptual = 2.f;
    float prob_prior = 0.1f;
    float v_prior = 0.25f;
    float lambda_v = 0.005f;
};

/// Fixed, seed-deterministic conv feature stack; never trained. Stands in
/// for a pretrained perceptual backbone.
class Perceptual {
public:
    explicit Perceptual(uint64_t seed = 0x705e5ccu);
    std::vector<Var> features(const Var& x) const;  // 3 downsampling stages

private:
    nn::ParamStore params_;
};

/// pixel * mean((a-b)^2) + perceptual * mean_stages mean((phi(a)-phi(b))^2)
Var compositeLoss(const Var& a, const Var& b, const LossWeights& w, const Perceptual& phi);

/// |mean(mask) - lambda| + lambda (v-shaped area prior)
Var vPrior(const Var& pasted_mask, float lambda);

/// 1 - sum_c p(c)^2; minimal for a one-hot p.
Var probPrior(const Var& p);

/// Soft-window area-normalized region loss: dot(win, err) / sum(win), where
/// win = paste(ones, box) and err is the channel-mean squared error map.
/// Differentiable in `box` (used by the joint / G-only ablation routings).
Var regionLossVar(const Tensor& prediction, const Tensor& target, const Var& box);

struct ObjectiveContext {
    const seg::Segmenter* segmenter = nullptr;
    const inpaint::Inpainter* inpainter = nullptr;
    const Perceptual* phi = nullptr;
    LossWeights weights;
    float erase_scale = 1.1f;
};

struct ForegroundResult {
    Var loss;         // is_weight * compositeLoss(F, I)
    Var pasted_mask;  // [1,H,W], for the v-prior
    Tensor inpainted_background;
};

/// O for one image and one sampled candidate. `box` carries gradient to the
/// geometry path; `is_weight` must already be detached from p.
ForegroundResult foregroundObjective(const Tensor& frame, const Var& box, const Var& is_weight,
                                     const ObjectiveContext& ctx);

/// G for one image and one sampled candidate: is_weight * (-regionLoss).
/// `is_weight` carries gradient to p; `box` is detached under separate
/// routing and live under joint/G-only routing. `inpainted` is the frozen
/// inpainter's output for the erased frame.
Var backgroundObjective(const Tensor& frame, const Tensor& inpainted, const Var& box,
                        const Var& is_weight, const ObjectiveContext& ctx);

}  // namespace moseg::obj
