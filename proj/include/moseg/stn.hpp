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

#include "moseg/autodiff.hpp"
#include "moseg/geometry.hpp"

namespace moseg::stn {

using ad::Var;

/// Bilinear crop of the box region of a CHW frame to out_h x out_w.
/// Samples outside the frame are edge-clamped. Differentiable in both the
/// frame and the box parameters (box is a 4-vector [cx,cy,w,h]).
Var crop(const Var& frame, const Var& box, int out_h, int out_w);

/// Inverse of crop: places a CHW patch onto an H x W canvas through the box.
/// Zero outside the box support. For matched sampling densities this is the
/// exact transpose of crop (inner-product adjoint).
Var paste(const Var& patch, const Var& box, int canvas_h, int canvas_w);

/// F = paste(recon) * paste(mask) + background * (1 - paste(mask)).
/// recon: [3,p,p], mask: [1,p,p] in [0,1], background: [3,H,W].
/// Throws if the mask leaves [0,1].
Var composite(const Var& recon, const Var& mask, const Var& background, const Var& box);

// Value-level conveniences (no gradient bookkeeping).
Tensor cropValue(const Tensor& frame, const BoxGeometry& box, int out_h, int out_w);
Tensor pasteValue(const Tensor& patch, const BoxGeometry& box, int canvas_h, int canvas_w);
Var boxVar(const BoxGeometry& b, bool requires_grad = false);
BoxGeometry boxFromVar(const Var& box);

}  // namespace moseg::stn
