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

#include <functional>

#include "moseg/geometry.hpp"
#include "moseg/nn.hpp"

namespace moseg::inpaint {

using ad::Var;

/// Frame with a rectangular region cut out: 3 color channels zeroed inside
/// the region plus a binary region-indicator channel.
struct ErasedInput {
    Tensor pixels;          // [4,H,W]
    BoxGeometry erase_box;  // dilated, clipped to the frame
};

/// Dilates `box` by `scale` about its center, clips to the frame, zeroes the
/// region, sets the indicator channel.
ErasedInput erase(const Tensor& frame, const BoxGeometry& box, float scale);

/// Pixel raster of a normalized box on an HxW grid: [x0,x1) x [y0,y1).
struct PixelRect {
    int x0, y0, x1, y1;
    int area() const { return std::max(0, x1 - x0) * std::max(0, y1 - y0); }
};
PixelRect rasterize(const BoxGeometry& box, int h, int w);

/// Mean per-pixel squared error (channel-averaged) over the erased region;
/// 0 for an empty region.
double regionLoss(const Tensor& prediction, const Tensor& target, const BoxGeometry& box);

struct StageOneOptions {
    int steps = 2000;
    int batch_size = 8;
    float lr = 1e-3f;
    float scale_min = 0.2f, scale_max = 0.8f;
    float erase_scale = 1.0f;  // random training boxes are used as-is
    std::function<void(int, float)> logger;  // (step, loss)
};

/// Region-inpainting network; trained once on random erasures, then frozen.
class Inpainter {
public:
    Inpainter(int image_size, nn::Rng& rng);
    explicit Inpainter(int image_size);  // checkpoint restore

    /// [N,4,H,W] (or [4,H,W]) -> [N,3,H,W] raw network output, sigmoid range.
    Var forward(const Var& erased) const;

    /// Full-frame prediction with hard copy-through outside the erased region.
    Tensor inpaint(const ErasedInput& input) const;

    int imageSize() const { return image_size_; }
    nn::ParamStore& params() { return params_; }
    const nn::ParamStore& params() const { return params_; }

private:
    void build(nn::Rng* rng);
    int image_size_;
    std::vector<int> encCh_;
    nn::ParamStore params_;
};

/// Stage-1 loop: random frame, random box, erase, minimize the region loss.
/// Deterministic for a fixed rng seed. Returns the final validation loss proxy
/// (running mean of the last 32 step losses).
float trainInpainter(Inpainter& net, const std::vector<Tensor>& frames,
                     const StageOneOptions& opts, nn::Rng& rng);

}  // namespace moseg::inpaint
