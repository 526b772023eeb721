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

#include "moseg/synthdata.hpp"

namespace moseg::flow {

/// Displacement-image encoding: ch0 = (dx/max_disp + 1)/2, ch1 likewise for
/// dy, ch2 = |d|/max_disp; all clamped to [0,1].
constexpr float kDefaultMaxDisp = 16.f;

std::array<float, 3> encodeDisplacement(float dx, float dy, float max_disp = kDefaultMaxDisp);
std::array<float, 2> decodeDisplacement(float c0, float c1, float max_disp = kDefaultMaxDisp);

/// Warps src into tgt's frame through the prev->cur homography (bilinear,
/// edge clamp). Throws on a singular matrix.
Tensor stabilize(const Tensor& src, const Tensor& tgt, const synth::Homography& homography);

/// Ground-truth flow image of a synthetic pair: after stabilization the only
/// residual motion is the sprite's, so displacement = sprite_velocity inside
/// the current mask and zero elsewhere.
Tensor analyticFlow(const synth::SceneSample& prev, const synth::SceneSample& cur,
                    float max_disp = kDefaultMaxDisp);

struct FlowIngest {
    bool enabled = false;
    std::vector<Tensor> images;
};

/// Reads flow/%06d.png for `num_frames` frames. Absent directory -> flow mode
/// disabled; a missing file -> error naming the index.
FlowIngest ingestFlow(const std::string& directory, int num_frames);

}  // namespace moseg::flow
