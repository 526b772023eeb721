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

#include "moseg/geometry.hpp"
#include "moseg/nn.hpp"

namespace moseg::det {

using ad::Var;

/// Whether the center-offset limit is measured in cell widths or in the
/// predicted box width.
enum class OffsetBasis { cell, box };

struct DetectorConfig {
    int grid_h = 8, grid_w = 8;
    float scale_min = 0.2f, scale_max = 0.8f;
    float offset_limit_factor = 1.5f;
    OffsetBasis offset_basis = OffsetBasis::cell;
    std::vector<int> trunk_channels = {16, 32, 48, 64, 64};  // extended/truncated per resolution

    int numCells() const { return grid_h * grid_w; }
    void validate() const;
};

/// One grid of candidates for one frame: C decoded boxes, their logits, and
/// the softmax-normalized categorical distribution over them.
struct ProposalSet {
    Var boxes;   // [C,4] (cx,cy,w,h)
    Var logits;  // [C]
    Var probs;   // [C]

    BoxGeometry box(int c) const {
        const float* b = boxes->value.data.data() + (size_t)c * 4;
        return {b[0], b[1], b[2], b[3]};
    }
    std::vector<float> probList() const { return probs->value.data; }
};

/// decode of one cell's raw head outputs; exposed for tests.
/// raw = (dx, dy, w, h, p). Returns the box and the passthrough logit.
std::pair<BoxGeometry, float> decodeCell(const std::array<float, 5>& raw, int cell_index,
                                         const DetectorConfig& config);

/// Differentiable decode of a whole [4,gh,gw] raw head map into [C,4] boxes.
Var decodeBoxesOp(const Var& raw, const DetectorConfig& config);

/// k highest-probability boxes, descending, ties broken by lower cell index.
std::vector<BoxGeometry> sampleTopK(const ProposalSet& proposals, int k);
std::vector<int> topKCells(const std::vector<float>& probs, int k);

/// Grid-proposal head: stride-2 conv trunk down to grid resolution, a 4-channel
/// box head on the trunk, and a 1-channel probability head that reads
/// stop-gradient trunk features so that the probability path shares no trained
/// parameter with the box path.
class Detector {
public:
    Detector(const DetectorConfig& cfg, int image_size, nn::Rng& rng);
    /// Loads an existing parameter set (checkpoint restore).
    Detector(const DetectorConfig& cfg, int image_size);

    /// frame: [3,H,W] or [N,3,H,W]; one ProposalSet per image.
    std::vector<ProposalSet> detect(const Var& frame) const;

    /// Direct-regression ablation head: one global box per image, no grid.
    std::vector<Var> regressBox(const Var& frame) const;

    nn::ParamStore& params() { return params_; }
    const nn::ParamStore& params() const { return params_; }
    const DetectorConfig& config() const { return cfg_; }
    int imageSize() const { return image_size_; }

private:
    void buildArchitecture(nn::Rng* rng);
    DetectorConfig cfg_;
    int image_size_;
    std::vector<int> stageChannels_;
    nn::ParamStore params_;
};

}  // namespace moseg::det
