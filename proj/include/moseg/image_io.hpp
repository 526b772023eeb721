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
#include <cstdint>
#include <string>

#include "moseg/tensor.hpp"

namespace moseg::io {

/// 8-bit quantization used for every stored frame: round half up.
inline uint8_t quantize(float v) {
    int b = (int)std::floor(v * 255.f + 0.5f);
    return (uint8_t)std::clamp(b, 0, 255);
}

/// [3,H,W] float in [0,1] <-> 8-bit RGB PNG.
void saveImage(const Tensor& chw, const std::string& path);
Tensor loadImage(const std::string& path);

/// [H,W] binary mask <-> 8-bit grayscale PNG (0/255).
void saveMask(const Tensor& hw, const std::string& path);
Tensor loadMask(const std::string& path);

}  // namespace moseg::io
