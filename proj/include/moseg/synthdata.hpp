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

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "moseg/geometry.hpp"

namespace moseg::synth {

enum class SpriteShape { ellipse, polygon };
enum class CameraMotion { static_cam, rotation_homography, translation };

struct SceneConfig {
    int image_size = 128;          // square frames
    int num_frames = 32;
    SpriteShape sprite_shape = SpriteShape::ellipse;
    float sprite_scale = 0.25f;    // fraction of image width, in [0.1, 0.5]
    float sprite_speed = 2.f;      // pixels per frame
    CameraMotion camera_motion = CameraMotion::static_cam;
    uint64_t background_texture_seed = 1;
    uint64_t sprite_texture_seed = 2;
    float contrast_gap = 0.15f;    // minimum mean-intensity separation

    /// Throws std::invalid_argument naming the violated invariant.
    void validate() const;
};

/// Row-major 3x3 homography mapping previous-frame coords to current-frame.
using Homography = std::array<float, 9>;

struct SceneSample {
    Tensor frame;                 // [3,S,S] in [0,1]
    Tensor gt_mask;               // [S,S] binary
    BoxGeometry gt_box;           // tight box of gt_mask
    Homography homography;        // previous -> current (identity for frame 0)
    std::array<float, 2> sprite_velocity{0.f, 0.f};  // px/frame, (vx, vy)
    std::optional<Tensor> flow_image;                // [3,S,S], see flowext
};

/// Deterministic in (config, seed). Validates config and checks the
/// generated sequence against the coverage and contrast invariants.
std::vector<SceneSample> generateSequence(const SceneConfig& config, uint64_t seed);

/// Layout: frames/%06d.png, masks/%06d.png, flow/%06d.png (optional),
/// manifest.json. Returns the manifest path.
std::string saveDataset(const std::vector<SceneSample>& samples, const std::string& directory);
std::vector<SceneSample> loadDataset(const std::string& directory);

}  // namespace moseg::synth
