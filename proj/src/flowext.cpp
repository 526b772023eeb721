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

#include "moseg/flowext.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>

#include "moseg/image_io.hpp"

namespace fs = std::filesystem;

namespace moseg::flow {

std::array<float, 3> encodeDisplacement(float dx, float dy, float max_disp) {
    auto clamp01 = [](float v) { return std::clamp(v, 0.f, 1.f); };
    return {clamp01((dx / max_disp + 1.f) / 2.f), clamp01((dy / max_disp + 1.f) / 2.f),
            clamp01(std::sqrt(dx * dx + dy * dy) / max_disp)};
}

std::array<float, 2> decodeDisplacement(float c0, float c1, float max_disp) {
    return {(c0 * 2.f - 1.f) * max_disp, (c1 * 2.f - 1.f) * max_disp};
}

Tensor stabilize(const Tensor& src, const Tensor& tgt, const synth::Homography& m) {
    if (!src.sameShape(tgt)) throw std::invalid_argument("stabilize: src/tgt shape mismatch");
    Eigen::Matrix3f M;
    M << m[0], m[1], m[2], m[3], m[4], m[5], m[6], m[7], m[8];
    if (std::fabs(M.determinant()) < 1e-12f)
        throw std::invalid_argument("stabilize: singular homography");
    Eigen::Matrix3f inv = M.inverse();
    int C = src.shape[0], H = src.shape[1], W = src.shape[2];
    Tensor out({C, H, W});
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            // out(x_cur) = src(H^-1 x_cur), pixel centers at +0.5
            float cx = x + 0.5f, cy = y + 0.5f;
            float d = inv(2, 0) * cx + inv(2, 1) * cy + inv(2, 2);
            float sx = (inv(0, 0) * cx + inv(0, 1) * cy + inv(0, 2)) / d - 0.5f;
            float sy = (inv(1, 0) * cx + inv(1, 1) * cy + inv(1, 2)) / d - 0.5f;
            int x0 = (int)std::floor(sx), y0 = (int)std::floor(sy);
            float fx = sx - x0, fy = sy - y0;
            int x0c = std::clamp(x0, 0, W - 1), x1c = std::clamp(x0 + 1, 0, W - 1);
            int y0c = std::clamp(y0, 0, H - 1), y1c = std::clamp(y0 + 1, 0, H - 1);
            for (int c = 0; c < C; ++c)
                out.at(c, y, x) = (1 - fy) * ((1 - fx) * src.at(c, y0c, x0c) + fx * src.at(c, y0c, x1c)) +
                                  fy * ((1 - fx) * src.at(c, y1c, x0c) + fx * src.at(c, y1c, x1c));
        }
    return out;
}

Tensor analyticFlow(const synth::SceneSample& prev, const synth::SceneSample& cur,
                    float max_disp) {
    if (!prev.frame.sameShape(cur.frame))
        throw std::invalid_argument("analyticFlow: samples are not from the same sequence");
    int H = cur.frame.shape[1], W = cur.frame.shape[2];
    Tensor out({3, H, W});
    auto zero = encodeDisplacement(0.f, 0.f, max_disp);
    auto fg = encodeDisplacement(cur.sprite_velocity[0], cur.sprite_velocity[1], max_disp);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            const auto& e = cur.gt_mask.data[(size_t)y * W + x] > 0.5f ? fg : zero;
            for (int c = 0; c < 3; ++c) out.at(c, y, x) = e[c];
        }
    return out;
}

FlowIngest ingestFlow(const std::string& directory, int num_frames) {
    FlowIngest out;
    if (!fs::exists(directory)) return out;  // flow mode unavailable, not an error
    out.enabled = true;
    char name[32];
    for (int i = 0; i < num_frames; ++i) {
        std::snprintf(name, sizeof name, "%06d.png", i);
        auto p = fs::path(directory) / name;
        if (!fs::exists(p))
            throw std::runtime_error("ingestFlow: missing flow image " + std::to_string(i));
        out.images.push_back(io::loadImage(p.string()));
    }
    return out;
}

}  // namespace moseg::flow
