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

#include <iosfwd>
#include <optional>

#include "moseg/config.hpp"
#include "moseg/detector.hpp"
#include "moseg/evalkit.hpp"
#include "moseg/flowext.hpp"
#include "moseg/inpainter.hpp"
#include "moseg/objectives.hpp"
#include "moseg/segmenter.hpp"
#include "moseg/synthdata.hpp"

namespace moseg::train {

/// Per-step loss decomposition; every Var is a scalar node of one step graph.
struct StepGraph {
    ad::Var o_loss;           // foreground objective (importance-weighted mean)
    ad::Var g_loss;           // background objective
    ad::Var flow_loss;        // optional flow background objective
    ad::Var v_prior_loss;     // weighted v-shaped mask prior
    ad::Var prob_prior_loss;  // weighted L2 concentration prior on p
    ad::Var total;
};

struct StepStats {
    int step;
    float total, o, g, gf, v, pp, epsilon;
};

/// Stage-2 trainer: detector + segmenter against frozen inpainters.
class Stage2 {
public:
    Stage2(const TrainConfig& cfg, const inpaint::Inpainter* inpainter,
           const inpaint::Inpainter* flow_inpainter);

    /// Builds the full loss graph for one batch without touching weights.
    StepGraph buildStepGraph(const std::vector<const synth::SceneSample*>& batch);

    /// One optimizer step; throws on NaN loss naming the batch indices.
    StepStats trainStep(const std::vector<synth::SceneSample>& dataset,
                        const std::vector<size_t>& indices);

    void saveCheckpoint(const std::string& path) const;
    void loadCheckpoint(const std::string& path);

    det::Detector& detector() { return *detector_; }
    seg::Segmenter& segmenter() { return *segmenter_; }
    nn::Rng& rng() { return rng_; }
    int step() const { return step_; }
    const TrainConfig& config() const { return cfg_; }

private:
    TrainConfig cfg_;
    std::unique_ptr<det::Detector> detector_;
    std::unique_ptr<seg::Segmenter> segmenter_;
    const inpaint::Inpainter* inpainter_;
    const inpaint::Inpainter* flow_inpainter_;
    obj::Perceptual phi_;
    nn::Adam adam_det_, adam_seg_;
    nn::Rng rng_;
    int step_ = 0;
};

/// Full stage-2 loop; one JSON metrics line per step to `metrics` if given.
void trainStage2(Stage2& trainer, const std::vector<synth::SceneSample>& dataset,
                 const std::string& checkpoint_path, std::ostream* metrics);

struct Inference {
    std::vector<BoxGeometry> boxes;      // k boxes, descending probability
    std::vector<float> confidences;
    std::vector<Tensor> soft_masks;      // [H,W] each, pasted; 0 outside box support
};

Inference infer(const Tensor& frame, const det::Detector& detector, const seg::Segmenter& segmenter,
                int k);

/// Full protocol: threshold grid search on soft masks, refined J/F, mAP@0.5.
eval::EvalReport evaluate(const std::vector<synth::SceneSample>& dataset,
                          const det::Detector& detector, const seg::Segmenter& segmenter);

}  // namespace moseg::train
