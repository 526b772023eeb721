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

#include <algorithm>
#include <cmath>

#include "moseg/tensor.hpp"

namespace moseg {

/// Axis-aligned box in normalized image coordinates (center + extents).
struct BoxGeometry {
    float cx = 0.5f, cy = 0.5f, w = 0.f, h = 0.f;

    float area() const { return w * h; }

    BoxGeometry dilated(float scale) const { return {cx, cy, w * scale, h * scale}; }

    BoxGeometry clippedToUnit() const {
        float x0 = std::max(0.f, cx - w / 2), x1 = std::min(1.f, cx + w / 2);
        float y0 = std::max(0.f, cy - h / 2), y1 = std::min(1.f, cy + h / 2);
        if (x1 <= x0 || y1 <= y0) return {cx, cy, 0.f, 0.f};
        return {(x0 + x1) / 2, (y0 + y1) / 2, x1 - x0, y1 - y0};
    }

    static float iou(const BoxGeometry& a, const BoxGeometry& b) {
        float ix0 = std::max(a.cx - a.w / 2, b.cx - b.w / 2);
        float ix1 = std::min(a.cx + a.w / 2, b.cx + b.w / 2);
        float iy0 = std::max(a.cy - a.h / 2, b.cy - b.h / 2);
        float iy1 = std::min(a.cy + a.h / 2, b.cy + b.h / 2);
        float inter = std::max(0.f, ix1 - ix0) * std::max(0.f, iy1 - iy0);
        float uni = a.area() + b.area() - inter;
        return uni <= 0.f ? 0.f : inter / uni;
    }

    /// Tight box of a binary HxW mask; zero box if the mask is empty.
    static BoxGeometry tightFromMask(const Tensor& mask) {
        int h = mask.shape[mask.ndim() - 2], w = mask.shape[mask.ndim() - 1];
        int x0 = w, x1 = -1, y0 = h, y1 = -1;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                if (mask.data[(size_t)y * w + x] > 0.5f) {
                    x0 = std::min(x0, x); x1 = std::max(x1, x);
                    y0 = std::min(y0, y); y1 = std::max(y1, y);
                }
        if (x1 < 0) return {0.5f, 0.5f, 0.f, 0.f};
        return {(x0 + x1 + 1) / (2.f * w), (y0 + y1 + 1) / (2.f * h),
                (x1 - x0 + 1) / (float)w, (y1 - y0 + 1) / (float)h};
    }
};

}  // namespace moseg
